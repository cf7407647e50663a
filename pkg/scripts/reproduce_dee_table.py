"""Rebuild the beam-combining distance extension table from published PLEs
and print it next to the published DEE and d2 values."""

import argparse

from mmwchan.extension import build_dee_table, load_ple_file

PUBLISHED = {
    ("28GHz", "coherent"): [(1.074, 296), (1.119, 376), (1.153, 450)],
    ("28GHz", "noncoherent"): [(1.033, 238), (1.050, 261), (1.062, 278)],
    ("73GHz", "coherent"): [(1.076, 300), (1.121, 380), (1.152, 448)],
    ("73GHz", "noncoherent"): [(1.032, 237), (1.048, 258), (1.058, 272)],
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--ple-file", help="PLE table (default: bundled values)")
    parser.add_argument("--d1", type=float, default=200.0)
    args = parser.parse_args()

    print(f"{'freq':6} {'mode':12} {'k':>2} {'ple':>6} {'dee':>7} {'ref':>6} {'d2_m':>8} {'ref':>5} {'rel_err':>8}")
    for label, _, fits in load_ple_file(args.ple_file):
        for row in build_dee_table(fits, args.d1, label):
            ref = PUBLISHED.get((label, row.mode))
            if row.k_beams == 1 or ref is None or args.d1 != 200.0:
                print(f"{label:6} {row.mode:12} {row.k_beams:2d} {row.ple:6.3f} {row.dee:7.4f} {'':>6} {row.d2_m:8.1f}")
                continue
            dee_ref, d2_ref = ref[row.k_beams - 2]
            rel = (row.d2_m - d2_ref) / d2_ref
            print(
                f"{label:6} {row.mode:12} {row.k_beams:2d} {row.ple:6.3f} {row.dee:7.4f} {dee_ref:6.3f} "
                f"{row.d2_m:8.1f} {d2_ref:5d} {rel:8.2%}"
            )


if __name__ == "__main__":
    main()
