"""End-to-end acceptance checks, one test per criterion.

Each test appends a PASS/FAIL line that is echoed in the terminal summary.
"""

import csv
import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, make_pdp
from mmwchan import cli
from mmwchan.campaign import total_power, valid_records
from mmwchan.combining import combine_coherent, combine_noncoherent, multibeam_samples
from mmwchan.delay import rms_delay_spread
from mmwchan.extension import distance_extension_factor, load_ple_file
from mmwchan.omni import match_angles_to_paths, omni_stats, synthesize_omni_pdp
from mmwchan.pathloss import CloseInModel, all_angle_samples, fit_ple, predict_path_loss
from mmwchan.raytrace import predict_strongest_aoas, rectangle, reflection_residuals, trace_paths
from mmwchan.synth import GeneratorConfig, generate_campaign, generate_path_loss_samples

pytestmark = pytest.mark.acceptance

# Published DEE and d2 (metres) per (frequency, mode, k).
PUBLISHED_DEE = {
    ("28GHz", "coherent", 2): (1.074, 296),
    ("28GHz", "coherent", 3): (1.119, 376),
    ("28GHz", "coherent", 4): (1.153, 450),
    ("28GHz", "noncoherent", 2): (1.033, 238),
    ("28GHz", "noncoherent", 3): (1.050, 261),
    ("28GHz", "noncoherent", 4): (1.062, 278),
    ("73GHz", "coherent", 2): (1.076, 300),
    ("73GHz", "coherent", 3): (1.121, 380),
    ("73GHz", "coherent", 4): (1.152, 448),
    ("73GHz", "noncoherent", 2): (1.032, 237),
    ("73GHz", "noncoherent", 3): (1.048, 258),
    ("73GHz", "noncoherent", 4): (1.058, 272),
}


def record(number, title, ok, detail=""):
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_criterion_01_dee_table(tmp_path):
    start = time.perf_counter()
    code = cli.main(["dee-table", "--output", str(tmp_path), "--quiet"])
    elapsed = time.perf_counter() - start
    rows = read_csv(tmp_path / "dee_table.csv")
    got = {(r[0], r[1], int(r[2])): (float(r[4]), float(r[5])) for r in rows[1:]}
    worst_dee = worst_d2 = 0.0
    for key, (dee_ref, d2_ref) in PUBLISHED_DEE.items():
        dee_v, d2_v = got[key]
        worst_dee = max(worst_dee, abs(dee_v - dee_ref))
        worst_d2 = max(worst_d2, abs(d2_v - d2_ref) / d2_ref)
    ok = code == 0 and worst_dee <= 0.001 + 1e-12 and worst_d2 <= 0.01 and elapsed < 1.0
    record(1, "published DEE and d2 reproduction", ok,
           f"max |dDEE|={worst_dee:.4g}, max d2 rel={worst_d2:.4g}, {elapsed:.3f} s")


def test_criterion_02_def():
    value = distance_extension_factor(200.0, 1.152)
    record(2, "DEF(200, 1.152) = 2.24 +/- 0.005", abs(value - 2.24) <= 0.005, f"{value:.5f}")


def test_criterion_03_equal_path_loss_identity():
    worst = 0.0
    for label, block, fits in load_ple_file():
        for mode in ("coherent", "noncoherent"):
            n1 = fits[(mode, 1)]
            for k in (2, 3, 4):
                n2 = fits[(mode, k)]
                a = predict_path_loss(CloseInModel(block["freq_hz"], n1), 200.0)
                b = predict_path_loss(CloseInModel(block["freq_hz"], n2), 200.0 ** (n1 / n2))
                worst = max(worst, abs(a - b))
    record(3, "equal path loss at d1 and d1^DEE", worst < 1e-9, f"max diff {worst:.3g} dB")


def _exact_rms(pdp):
    """Naive moment loop in exact rational arithmetic."""
    bw = Fraction(pdp.bin_width_ns)
    start = Fraction(pdp.start_delay_ns)
    num1 = num2 = den = Fraction(0)
    for k, p in enumerate(pdp.powers):
        if p > 0:
            w = Fraction(p)
            tau = start + k * bw
            den += w
            num1 += w * tau
            num2 += w * tau * tau
    mean = num1 / den
    return math.sqrt(num2 / den - mean * mean)


def test_criterion_04_delay_spread_oracle():
    rng = np.random.default_rng(2015)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 17))
        powers = rng.uniform(0.0, 1.0, n) * (rng.uniform(size=n) > 0.3)
        if not powers.any():
            powers[int(rng.integers(n))] = 1.0
        pdp = make_pdp(powers, noise=0.01, start=float(rng.uniform(0.0, 1000.0)))
        exact = _exact_rms(pdp)
        got = rms_delay_spread(pdp)
        err = abs(got - exact) if exact == 0 else abs(got - exact) / exact
        worst = max(worst, err)
    impulse = rms_delay_spread(make_pdp([0, 0, 3.0, 0]))
    pair = rms_delay_spread(make_pdp([1.0, 0, 0, 0, 1.0]))  # spacing 10 ns
    ok = worst <= 1e-12 and impulse == 0.0 and pair == 5.0
    record(4, "RMS delay spread vs exact moment oracle", ok,
           f"max rel err {worst:.3g}, impulse {impulse}, pair {pair}")


def test_criterion_05_ple_recovery():
    errors = {}
    for ple in (2.0, 3.728, 4.556, 4.687):
        sounder = "28GHz" if ple == 4.556 else "73GHz"
        cfg = GeneratorConfig(sounder=sounder, ple=ple, n_locations=20)
        campaign, truth, _ = generate_campaign(cfg, seed=5)
        model = fit_ple(all_angle_samples(campaign), campaign.carrier_freq_hz)
        errors[ple] = abs(model.ple - ple)
    samples = generate_path_loss_samples(3.728, 8.0, 10_000, 73e9, seed=11)
    shadowed = fit_ple(samples, 73e9)
    ok = max(errors.values()) <= 1e-6 and abs(shadowed.ple - 3.728) < 0.05
    record(5, "PLE recovery on synthetic data", ok,
           f"zero-shadow max err {max(errors.values()):.3g}, 8 dB err {abs(shadowed.ple - 3.728):.4f}")


def test_criterion_06_combining_invariants(generated, generated_28):
    rng = np.random.default_rng(6)
    violations = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 9))
        p = 10.0 ** rng.uniform(-12, 0, n)
        perm = rng.permutation(p)
        prev_c = prev_n = 0.0
        for k in range(1, n + 1):
            c, nc = combine_coherent(p, k), combine_noncoherent(p, k)
            if not (c >= nc >= p.max()):
                violations += 1
            if c < prev_c or nc < prev_n:
                violations += 1
            if combine_coherent(perm, k) != c or combine_noncoherent(perm, k) != nc:
                violations += 1
            prev_c, prev_n = c, nc
    ordering_ok = True
    for campaign, _, _ in (generated, generated_28):
        freq = campaign.carrier_freq_hz
        n1 = fit_ple(multibeam_samples(campaign, 1, "coherent"), freq).ple
        for k in (2, 3, 4):
            coh = fit_ple(multibeam_samples(campaign, k, "coherent"), freq).ple
            non = fit_ple(multibeam_samples(campaign, k, "noncoherent"), freq).ple
            ordering_ok &= coh <= non <= n1
    record(6, "beam combining invariants and fitted PLE ordering", violations == 0 and ordering_ok,
           f"{violations} violations over 10000 vectors")


def _grid_oracle_length(tx, rx):
    # Facet is the plane z = 0 on [0, 10] x [0, 10]: coarse 1 cm grid, then 1 mm around the best cell.
    def lengths(xs, ys):
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([gx, gy, np.zeros_like(gx)], axis=-1)
        return np.linalg.norm(pts - tx, axis=-1) + np.linalg.norm(pts - rx, axis=-1), gx, gy

    coarse = np.linspace(0.0, 10.0, 1001)
    L, gx, gy = lengths(coarse, coarse)
    i = np.unravel_index(np.argmin(L), L.shape)
    x0, y0 = gx[i], gy[i]
    fx = np.clip(np.arange(x0 - 0.02, x0 + 0.02 + 1e-9, 0.001), 0, 10)
    fy = np.clip(np.arange(y0 - 0.02, y0 + 0.02 + 1e-9, 0.001), 0, 10)
    L, _, _ = lengths(fx, fy)
    return float(L.min())


def _random_scene(rng):
    facets = [rectangle((-30, -30, 0), (60, 0, 0), (0, 60, 0), id="ground")]
    for j in range(int(rng.integers(2, 6))):
        x, y = rng.uniform(-25, 25, 2)
        ang = rng.uniform(0, 2 * math.pi)
        u = np.array([math.cos(ang), math.sin(ang), 0.0]) * rng.uniform(5, 20)
        facets.append(rectangle((x, y, 0.0), u, (0, 0, rng.uniform(5, 30)), id=f"w{j}"))
    return facets


def test_criterion_07_ray_tracer(generated):
    rng = np.random.default_rng(7)
    facet = [rectangle((0, 0, 0), (10, 0, 0), (0, 10, 0), id="floor")]
    grid_err = 0.0
    for _ in range(5):
        tx = np.array([*rng.uniform(1, 9, 2), rng.uniform(1, 5)])
        rx = np.array([*rng.uniform(1, 9, 2), rng.uniform(1, 5)])
        first = [p for p in trace_paths(facet, tx, rx, 1) if p.order == 1]
        grid_err = max(grid_err, abs(first[0].total_length_m - _grid_oracle_length(tx, rx)))

    _, _, scene = generated
    campaign = generated[0]
    worst_res = 0.0
    n_paths = 0
    for loc in campaign.sorted_locations()[:8]:
        for p in trace_paths(scene, loc.tx_pos, loc.rx_pos):
            n_paths += 1
            worst_res = max([worst_res] + reflection_residuals(p, scene))

    mismatches = 0
    for _ in range(100):
        sc = _random_scene(rng)
        a = np.array([*rng.uniform(-20, 20, 2), rng.uniform(1, 10)])
        b = np.array([*rng.uniform(-20, 20, 2), rng.uniform(1, 10)])
        fwd = trace_paths(sc, a, b)
        back = trace_paths(sc, b, a)
        for p in fwd:
            worst_res = max([worst_res] + reflection_residuals(p, sc))
        f = sorted((round(p.total_length_m, 9), p.facet_ids) for p in fwd)
        r = sorted((round(p.total_length_m, 9), tuple(reversed(p.facet_ids))) for p in back)
        mismatches += f != r
    ok = grid_err <= 1e-3 and worst_res < 1e-9 and mismatches == 0
    record(7, "ray tracer oracle, reflection law and reciprocity", ok,
           f"grid err {grid_err:.2g} m, max residual {worst_res:.2g} rad over {n_paths}+ paths, "
           f"{mismatches} reciprocity mismatches")


def test_criterion_08_omni_closure(generated):
    campaign, truth, scene = generated
    rep = omni_stats(campaign, scene, threads=1)
    truth_by_id = {t["id"]: t for t in truth["locations"]}
    by_id = {loc.id: loc for loc in campaign.locations}
    worst_arrival = 0.0
    worst_energy = 0.0
    for r in rep.locations:
        if not r.synthesized:
            continue
        t = truth_by_id[r.location_id]
        first = r.pdp.delays_ns[r.pdp.nonzero_indices()[0]]
        worst_arrival = max(worst_arrival, abs(first - t["first_arrival_ns"]))
        loc = by_id[r.location_id]
        paths = trace_paths(scene, loc.tx_pos, loc.rx_pos)
        pairing = match_angles_to_paths(valid_records(loc), predict_strongest_aoas(paths))
        parts = math.fsum(total_power(rec.pdp) for rec, _ in pairing.matches)
        worst_energy = max(worst_energy, abs(total_power(r.pdp) - parts) / parts)

    # Single-path case: only the LOS ray survives once the canyon walls are removed.
    los_only = [f for f in scene if "blocker" in f.id]
    single_ok = True
    n_single = 0
    for loc in campaign.by_class("LOS"):
        records = valid_records(loc)
        paths = trace_paths(los_only, loc.tx_pos, loc.rx_pos)
        pairing = match_angles_to_paths(records, predict_strongest_aoas(paths))
        if len(pairing.matches) != 1:
            single_ok = False
            continue
        n_single += 1
        omni = synthesize_omni_pdp(pairing)
        single_ok &= rms_delay_spread(omni) == rms_delay_spread(pairing.matches[0][0].pdp)
    ok = worst_arrival <= 2.5 and worst_energy <= 1e-12 and single_ok and n_single > 0
    record(8, "omni synthesis closure", ok,
           f"first-arrival err {worst_arrival:.3g} ns, energy rel {worst_energy:.2g}, "
           f"{n_single} single-path locations exact")


def test_criterion_09_table_structure(tmp_path, generated):
    from mmwchan.synth import write_outputs

    gen = tmp_path / "gen"
    write_outputs(*generated, gen)
    data = ["--input", str(gen / "campaign.json"), "--quiet"]
    out = tmp_path / "out"
    assert cli.main(["summary", "--output", str(out)] + data) == 0
    assert cli.main(["delay-stats", "--output", str(out)] + data) == 0
    assert cli.main(["dee-table", "--output", str(out), "--quiet"]) == 0
    assert cli.main(["synth-omni", "--scene", str(gen / "scene.json"), "--output", str(out)] + data) == 0

    checks = []
    summary = read_csv(out / "summary.csv")
    # outage table: six row groups, each split into LOS and NLOS, with a count and distance range.
    checks.append(summary[0] == ["group", "los_class", "count", "d_min_m", "d_max_m"])
    checks.append(len(summary) - 1 == 12)
    checks.append({(r[0], r[1]) for r in summary[1:]} == set(itertools.product(
        ["measured_d_le_max", "measured_all_d", "signal_d_le_max", "outage_d_le_max", "signal_all_d", "outage_all_d"],
        ["LOS", "NLOS"])))
    # directional delay spread table: mean and std per (pointing filter, LOS class).
    stats = read_csv(out / "delay_stats.csv")
    checks.append(stats[0][-2:] == ["mean_ns", "std_ns"] and len(stats) - 1 == 4)
    # distance extension table: two frequencies x two modes x k = 1..4 with PLE, DEE and d2.
    dee_rows = read_csv(out / "dee_table.csv")
    checks.append(dee_rows[0] == ["freq_label", "mode", "k", "ple", "dee", "d2_at_200m"] and len(dee_rows) - 1 == 16)
    # omni table: mean and std per LOS class with synthesized-out-of-measured counts.
    omni = read_csv(out / "omni_stats.csv")
    checks.append(omni[0] == ["class", "n_synthesized", "n_measured", "mean_ns", "std_ns"])
    checks.append([r[0] for r in omni[1:]] == ["LOS", "NLOS"])
    record(9, "emitted tables carry the published row/column structure", all(checks), f"{sum(checks)}/{len(checks)} checks")


def _run_pipeline(root, threads, monkeypatch):
    monkeypatch.setenv("MMWCHAN_NUM_THREADS", str(threads))
    gen = root / "gen"
    out = root / "out"
    assert cli.main(["generate", "--seed", "42", "--output", str(gen)]) == 0
    data = ["--input", str(gen / "campaign.json"), "--output", str(out), "--quiet"]
    assert cli.main(["summary"] + data) == 0
    assert cli.main(["delay-stats"] + data) == 0
    assert cli.main(["pathloss-fit"] + data) == 0
    assert cli.main(["dee-table", "--ple-file", str(out / "pathloss_ples.json"), "--output", str(out), "--quiet"]) == 0
    assert cli.main(["synth-omni", "--scene", str(gen / "scene.json")] + data) == 0
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_criterion_10_determinism(tmp_path, monkeypatch, capsys):
    runs = [
        _run_pipeline(tmp_path / "a", 1, monkeypatch),
        _run_pipeline(tmp_path / "b", 1, monkeypatch),
        _run_pipeline(tmp_path / "c", 4, monkeypatch),
    ]
    capsys.readouterr()
    same_campaign = runs[0]["gen/campaign.json"] == runs[1]["gen/campaign.json"]
    same_all = runs[0] == runs[1] == runs[2]
    record(10, "byte-identical generation and pipeline across runs and thread counts",
           same_campaign and same_all, f"{len(runs[0])} files compared")
