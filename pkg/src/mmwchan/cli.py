"""
Command-line front end.

    mmwchan generate --seed 42 --output out/
    mmwchan summary --input out/campaign.json
    mmwchan delay-stats --input out/campaign.json --class nlos
    mmwchan pathloss-fit --input out/campaign.json --class nlos --k 4
    mmwchan dee-table --d1 200
    mmwchan extend --dee 1.152 --d1 200
    mmwchan trace --scene out/scene.json --tx 0 0 7 --rx 100 0 2
    mmwchan synth-omni --input out/campaign.json --scene out/scene.json
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import report
from .campaign import LosClass, load_campaign, summarize_campaign
from .combining import MODES, multibeam_samples
from .constants import DEFAULT_THRESHOLD_DB
from .delay import FILTERS, EmptyStatsError, directional_stats, empirical_cdf, percentile
from .extension import (
    build_dee_table,
    distance_extension_factor,
    extended_distance,
    extension_curve,
    load_ple_file,
)
from .omni import GATE_DEG, omni_stats
from .pathloss import DegenerateFitError, all_angle_samples, fit_ple
from .raytrace import load_scene, trace_paths
from .synth import GeneratorConfig, config_from_dict, generate_campaign, write_outputs


class CliError(ValueError):
    pass


def _emit(args, name, header, rows):
    """Write a table to --output/<name> when given, and to stdout."""
    if getattr(args, "output", None):
        text = report.write_table(Path(args.output) / name, header, rows)
    else:
        text = report.render(header, rows)
    if not getattr(args, "quiet", False):
        sys.stdout.write(f"# {name}\n{text}")


def _classes(args):
    return [LosClass.parse(args.los_class)] if args.los_class else list(LosClass)


def _load(args):
    campaign = load_campaign(args.input)
    if args.exclude:
        try:
            campaign = campaign.without(args.exclude)
        except KeyError as exc:
            raise CliError(str(exc.args[0])) from None
    return campaign


def cmd_summary(args):
    campaign = _load(args)
    rows = summarize_campaign(campaign, args.d_max, args.threshold_db)
    _emit(args, "summary.csv", report.SUMMARY_HEADER, report.summary_rows(rows))
    return 0


def cmd_delay_stats(args):
    campaign = _load(args)
    filters = FILTERS if args.filter == "both" else (args.filter,)
    stats_rows, sample_rows, pct_rows, skipped = [], [], [], []
    cdfs = {}
    for flt in filters:
        for cls in _classes(args):
            try:
                st = directional_stats(campaign, cls, flt, args.threshold_db)
            except EmptyStatsError as exc:
                skipped.append((flt, cls.value, str(exc)))
                continue
            stats_rows.append((flt, cls.value, st.n_samples, st.mean_ns, st.std_ns))
            for s in st.samples:
                sample_rows.append((flt, cls.value, s.location_id, s.azimuth_deg, s.elevation_deg, s.sigma_tau_ns))
            cdf = empirical_cdf(st.values)
            cdfs[(flt, cls.value)] = cdf
            pct_rows.append((flt, cls.value, percentile(cdf, 0.5), percentile(cdf, 0.9)))
    _emit(args, "delay_stats.csv", report.STATS_HEADER, stats_rows)
    _emit(
        args,
        "delay_samples.csv",
        ("filter", "class", "location_id", "azimuth_deg", "elevation_deg", "sigma_tau_ns"),
        sample_rows,
    )
    _emit(args, "delay_percentiles.csv", ("filter", "class", "p50_ns", "p90_ns"), pct_rows)
    for (flt, cls), cdf in cdfs.items():
        _emit(args, f"cdf_{flt}_{cls.lower()}.csv", report.CDF_HEADER, zip(cdf.values.tolist(), cdf.probabilities.tolist()))
    for flt, cls, msg in skipped:
        print(f"warning: {flt}/{cls}: {msg}", file=sys.stderr)
    return 0


def cmd_pathloss_fit(args):
    campaign = _load(args)
    freq = args.freq or campaign.carrier_freq_hz
    cls = LosClass.parse(args.los_class) if args.los_class else None
    modes = MODES if args.mode is None else (args.mode,)
    rows = []
    ple_block = {"freq_label": args.freq_label or f"{freq / 1e9:g}GHz", "freq_hz": freq}
    try:
        model = fit_ple(all_angle_samples(campaign, cls, args.threshold_db), freq)
        rows.append(("all-angles", "", "", model.ple, model.shadow_sigma_db, model.n_samples))
        ple_block["all_angles"] = model.ple
        for mode in modes:
            ple_block[mode] = {}
            for k in range(1, args.k + 1):
                model = fit_ple(multibeam_samples(campaign, k, mode, cls, args.threshold_db), freq)
                tag = "single-best-beam" if k == 1 else f"multibeam-{k}"
                rows.append((tag, mode, k, model.ple, model.shadow_sigma_db, model.n_samples))
                ple_block[mode][str(k)] = model.ple
    except DegenerateFitError as exc:
        raise CliError(f"path loss fit failed: {exc}") from None
    _emit(args, "pathloss_fit.csv", report.FIT_HEADER, rows)
    if args.output:
        path = Path(args.output) / "pathloss_ples.json"
        path.write_text(json.dumps([ple_block], indent=1) + "\n", encoding="utf-8")
    return 0


def cmd_dee_table(args):
    rows = []
    for label, _, fits in load_ple_file(args.ple_file):
        try:
            rows.extend(build_dee_table(fits, args.d1, label))
        except (KeyError, ValueError) as exc:
            raise CliError(f"{label}: {exc}") from None
    _emit(args, "dee_table.csv", report.dee_header(args.d1), report.dee_rows(rows))
    return 0


def cmd_extend(args):
    if args.dee is None:
        if args.n1 is None or args.n2 is None:
            raise CliError("give --dee or both --n1 and --n2")
        if args.n1 < args.n2:
            raise CliError(f"n1 = {args.n1} < n2 = {args.n2}; need n1 >= n2")
        dee_value = args.n1 / args.n2
    else:
        dee_value = args.dee
    try:
        d2 = extended_distance(args.d1, dee_value)
        def_ = distance_extension_factor(args.d1, dee_value)
        _emit(args, "extend.csv", ("d1_m", "dee", "d2_m", "def"), [(args.d1, dee_value, d2, def_)])
        if args.d_max is not None:
            curve = extension_curve(dee_value, args.d_min, args.d_max, args.step)
            _emit(args, "extension_curve.csv", ("d1_m", "d2_m"), curve)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    return 0


def cmd_trace(args):
    scene = load_scene(args.scene)
    try:
        paths = trace_paths(scene, args.tx, args.rx, args.max_order)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    _emit(args, "trace.csv", report.TRACE_HEADER, report.trace_rows(paths))
    return 0


def cmd_synth_omni(args):
    campaign = _load(args)
    scene = load_scene(args.scene)
    rep = omni_stats(campaign, scene, args.gate_deg, args.threshold_db, args.max_order)
    stat_rows = [
        (c.los_class.value, c.n_synthesized, c.n_measured, c.stats.mean_ns, c.stats.std_ns) for c in rep.classes
    ]
    _emit(args, "omni_stats.csv", report.OMNI_STATS_HEADER, stat_rows)
    _emit(
        args,
        "omni_samples.csv",
        ("class", "location_id", "sigma_tau_ns", "n_matches"),
        [(r.los_class.value, r.location_id, r.sigma_tau_ns, r.n_matches) for r in rep.locations if r.synthesized],
    )
    for c in rep.classes:
        if c.n_synthesized:
            cdf = empirical_cdf(c.stats.values)
            _emit(args, f"omni_cdf_{c.los_class.value.lower()}.csv", report.CDF_HEADER,
                  zip(cdf.values.tolist(), cdf.probabilities.tolist()))
    if args.output:
        for r in rep.locations:
            if r.synthesized:
                report.write_table(
                    Path(args.output) / "omni_pdps" / f"{r.location_id}.csv",
                    report.OMNI_PDP_HEADER,
                    zip(r.pdp.delays_ns.tolist(), r.pdp.powers),
                )
    failures = rep.failures()
    _emit(args, "failures.csv", ("location_id", "reason"), [(r.location_id, r.reason) for r in failures])
    if failures:
        print(f"warning: {len(failures)} location(s) not synthesized; see failures.csv", file=sys.stderr)
    return 0


def cmd_generate(args):
    if args.config:
        cfg = config_from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
    else:
        cfg = GeneratorConfig()
    if args.n_locations is not None:
        cfg.n_locations = args.n_locations
    if args.sounder:
        cfg.sounder = args.sounder
    if args.ple is not None:
        cfg.ple = args.ple
    if args.shadow_db is not None:
        cfg.shadow_sigma_db = args.shadow_db
    campaign, truth, scene = generate_campaign(cfg, args.seed)
    paths = write_outputs(campaign, truth, scene, args.output)
    for p in paths:
        print(p)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="directory for output tables")
    common.add_argument("--quiet", action="store_true", help="do not echo tables to stdout")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", required=True, help="campaign file")
    data.add_argument("--threshold-db", type=float, default=DEFAULT_THRESHOLD_DB)
    data.add_argument("--exclude", nargs="+", default=[], metavar="ID", help="location ids to leave out")
    data.add_argument("--class", dest="los_class", choices=["los", "nlos", "LOS", "NLOS"])

    parser = argparse.ArgumentParser(prog="mmwchan", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("summary", parents=[common, data], help="outage/signal counts per LOS class")
    p.add_argument("--d-max", type=float, default=200.0)
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("delay-stats", parents=[common, data], help="directional RMS delay spread statistics")
    p.add_argument("--filter", choices=list(FILTERS) + ["both"], default="both")
    p.set_defaults(func=cmd_delay_stats)

    p = sub.add_parser("pathloss-fit", parents=[common, data], help="close-in PLE fits incl. beam combining")
    p.add_argument("--k", type=int, default=4, help="largest number of combined beams")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--freq", type=float, help="carrier frequency for the 1 m anchor (default: campaign)")
    p.add_argument("--freq-label")
    p.set_defaults(func=cmd_pathloss_fit)

    p = sub.add_parser("dee-table", parents=[common], help="distance extension table from PLEs")
    p.add_argument("--ple-file", help="PLE table (default: bundled published values)")
    p.add_argument("--d1", type=float, default=200.0)
    p.set_defaults(func=cmd_dee_table)

    p = sub.add_parser("extend", parents=[common], help="extended distance and DEF")
    p.add_argument("--dee", type=float)
    p.add_argument("--n1", type=float)
    p.add_argument("--n2", type=float)
    p.add_argument("--d1", type=float, default=200.0)
    p.add_argument("--d-min", type=float, default=1.0)
    p.add_argument("--d-max", type=float, help="also emit the extension curve up to this distance")
    p.add_argument("--step", type=float, default=1.0)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("trace", parents=[common], help="specular paths between two points")
    p.add_argument("--scene", required=True)
    p.add_argument("--tx", type=float, nargs=3, required=True, metavar=("X", "Y", "Z"))
    p.add_argument("--rx", type=float, nargs=3, required=True, metavar=("X", "Y", "Z"))
    p.add_argument("--max-order", type=int, default=2)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("synth-omni", parents=[common, data], help="absolute-timing omnidirectional synthesis")
    p.add_argument("--scene", required=True)
    p.add_argument("--gate-deg", type=float, default=GATE_DEG)
    p.add_argument("--max-order", type=int, default=2)
    p.set_defaults(func=cmd_synth_omni)

    p = sub.add_parser("generate", help="synthetic campaign with ground truth")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--output", required=True)
    p.add_argument("--config", help="JSON generator configuration")
    p.add_argument("--n-locations", type=int)
    p.add_argument("--sounder", choices=["28GHz", "73GHz"])
    p.add_argument("--ple", type=float)
    p.add_argument("--shadow-db", type=float)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
