"""
Seeded synthetic campaigns with known ground truth.

Every location sits in its own straight street canyon: two parallel
building walls along x, the transmitter at one end and the receiver at the
other. Clusters are the LOS ray (LOS locations only), the two single-wall
reflections and the two wall-to-wall double reflections. Their geometry
follows in closed form from the images of the transmitter in the walls. NLOS
locations get a narrow blocking facet across the direct ray; clusters whose
ray crosses the blocker are dropped.

Each cluster is seen by one directional record pointed straight at it
(ideal boxcar beam); a few more records point at empty directions and
capture only noise. Cluster powers follow a close-in path loss law whose
exponent is offset per power rank, with offsets that average to zero at
every location, so the all-angle exponent equals the configured one.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .campaign import AngleRecord, Campaign, LocationMeasurement, Pdp, save_campaign
from .constants import SOUNDERS, SPEED_OF_LIGHT
from .pathloss import PathLossSample, fspl_at_ref
from .raytrace import rectangle, save_scene

# Signal taps are kept only while at least this factor above the 5 dB cutoff.
TAP_MARGIN = 2.0
NOISE_SPAN = 2.0  # noise bins are uniform on (0, NOISE_SPAN * noise_floor)
WALL_HEIGHT_M = 60.0
BLOCKER_HALF_WIDTH_M = 1.5


class GeneratorError(ValueError):
    pass


@dataclass
class GeneratorConfig:
    sounder: str = "73GHz"
    n_locations: int = 24
    los_fraction: float = 0.25
    outage_fraction: float = 0.15
    d_min_m: float = 30.0
    d_max_m: float = 120.0
    ple: float = 4.687
    beam_ple_spread: float = 0.4
    shadow_sigma_db: float = 0.0
    tx_heights_m: tuple = (7.0, 17.0)
    rx_height_m: float = 2.0
    canyon_half_width: tuple = (0.2, 0.35)
    taps_per_cluster: int = 8
    tap_decay_ns: float = 6.0
    lead_bins: tuple = (2, 12)
    pdp_bins: int = 96
    n_scan_records: int = 4
    max_cluster_order: int = 2
    cell_spacing_m: float = 5000.0

    def validate(self):
        if self.sounder not in SOUNDERS:
            raise GeneratorError(f"sounder must be one of {sorted(SOUNDERS)}, got {self.sounder!r}")
        if self.n_locations < 0:
            raise GeneratorError("n_locations must be >= 0")
        for name in ("los_fraction", "outage_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise GeneratorError(f"{name} must lie in [0, 1]")
        if not 1.0 < self.d_min_m <= self.d_max_m:
            raise GeneratorError("need 1 < d_min_m <= d_max_m")
        if not self.ple > 0 or self.ple - self.beam_ple_spread / 2 <= 0:
            raise GeneratorError("per-beam exponents must stay positive")
        if self.beam_ple_spread < 0 or self.shadow_sigma_db < 0:
            raise GeneratorError("beam_ple_spread and shadow_sigma_db must be >= 0")
        if self.max_cluster_order not in (1, 2):
            raise GeneratorError("max_cluster_order must be 1 or 2")
        if self.taps_per_cluster < 1 or self.tap_decay_ns <= 0:
            raise GeneratorError("need at least one tap and a positive decay")
        lo, hi = self.lead_bins
        if not 0 <= lo < hi or hi + self.taps_per_cluster > self.pdp_bins:
            raise GeneratorError("lead_bins and taps must fit inside pdp_bins")
        a, b = self.canyon_half_width
        if not 0 < a <= b:
            raise GeneratorError("canyon_half_width must be an increasing positive pair")


def _angles(vec):
    x, y, z = vec
    az = math.degrees(math.atan2(x, y)) % 360.0
    if az >= 360.0:
        az = 0.0
    return az, math.degrees(math.atan2(z, math.hypot(x, y)))


def _unit(az, el):
    a, e = math.radians(az), math.radians(el)
    return np.array([math.cos(e) * math.sin(a), math.cos(e) * math.cos(a), math.sin(e)])


def _sep_deg(a, b):
    return math.degrees(math.acos(max(-1.0, min(1.0, float(_unit(*a) @ _unit(*b))))))


def _in_beam(point_dir, cluster_dir, hpbw_az, hpbw_el):
    daz = (cluster_dir[0] - point_dir[0] + 180.0) % 360.0 - 180.0
    return abs(daz) <= hpbw_az / 2 and abs(cluster_dir[1] - point_dir[1]) <= hpbw_el / 2


def weighted_sigma(delays, weights):
    delays = np.asarray(delays, float)
    weights = np.asarray(weights, float)
    mean = float(np.sum(weights * delays) / np.sum(weights))
    return math.sqrt(float(np.sum(weights * (delays - mean) ** 2) / np.sum(weights))), mean


def closed_form_ple(distances, path_losses, anchor_db):
    x = 10.0 * np.log10(np.asarray(distances, float))
    y = np.asarray(path_losses, float) - anchor_db
    return float(np.sum(x * y) / np.sum(x * x))


def _tap_shape(cfg, bw, power_mw, cutoff, decay_ns):
    """Densities (mW/ns) of the kept taps, normalized so they carry `power_mw`."""
    w = np.exp(-np.arange(cfg.taps_per_cluster) * bw / decay_ns)
    for n in range(w.size, 0, -1):
        dens = power_mw * w[:n] / w[:n].sum() / bw
        if dens[-1] >= TAP_MARGIN * cutoff:
            return dens
    return None


def _canyon(rng, cfg, dist, los):
    """Draw canyon geometry with the requested 3-D TX-RX distance."""
    h_tx = float(rng.choice(cfg.tx_heights_m))
    h_rx = cfg.rx_height_m
    dz = h_tx - h_rx
    horiz = math.sqrt(max(dist**2 - dz**2, 1.0))
    for _ in range(100):
        half_w = rng.uniform(*cfg.canyon_half_width) * horiz
        half_w = max(half_w, 8.0)
        y_tx = rng.uniform(-0.4, 0.4) * half_w
        y_rx = rng.uniform(-0.4, 0.4) * half_w
        dy = y_rx - y_tx
        if dy * dy >= horiz * horiz:
            continue
        dx = math.sqrt(horiz * horiz - dy * dy)
        geo = dict(half_w=half_w, y_tx=y_tx, y_rx=y_rx, dx=dx, h_tx=h_tx, h_rx=h_rx)
        if los or _blocker_clear(geo):
            return geo
    raise GeneratorError("could not place a canyon geometry")


def _unfolded_image_y(geo, walls):
    """Local y of the transmitter image after reflecting in `walls` in order."""
    y = geo["y_tx"]
    for w in walls:
        y = 2 * w - y
    return y


def _fold(y_u, half_w):
    # map an unfolded canyon coordinate back into [-half_w, half_w]
    r = (y_u + half_w) % (4 * half_w)
    return r - half_w if r <= 2 * half_w else 3 * half_w - r


def _ray_y_at(geo, walls, x):
    """Real local y of the ray bouncing off `walls`, at distance x from the TX."""
    y_img = _unfolded_image_y(geo, walls)
    y_u = y_img + (geo["y_rx"] - y_img) * x / geo["dx"]
    return _fold(y_u, geo["half_w"])


def _blocker_clear(geo, walls=None):
    mid = geo["dx"] / 2
    y_mid = (geo["y_tx"] + geo["y_rx"]) / 2
    seqs = [walls] if walls is not None else [(geo["half_w"],), (-geo["half_w"],)]
    return all(abs(_ray_y_at(geo, seq, mid) - y_mid) > BLOCKER_HALF_WIDTH_M + 1.0 for seq in seqs)


def _cell_facets(geo, origin, tag, los):
    dx, w = geo["dx"], geo["half_w"]
    ox, oy = origin
    x0 = ox - 20.0
    length = dx + 40.0
    facets = [
        rectangle((x0, oy + w, 0.0), (length, 0, 0), (0, 0, WALL_HEIGHT_M), id=f"{tag}/north"),
        rectangle((x0, oy - w, 0.0), (length, 0, 0), (0, 0, WALL_HEIGHT_M), id=f"{tag}/south"),
    ]
    if not los:
        y_mid = oy + (geo["y_tx"] + geo["y_rx"]) / 2
        facets.append(
            rectangle(
                (ox + dx / 2, y_mid - BLOCKER_HALF_WIDTH_M, 0.0),
                (0, 2 * BLOCKER_HALF_WIDTH_M, 0),
                (0, 0, WALL_HEIGHT_M),
                id=f"{tag}/blocker",
            )
        )
    return facets


def _clusters(cfg, geo, origin, tx, rx, los):
    """LOS and wall-reflected clusters seen from `rx`, shortest first."""
    clusters = []
    if los:
        clusters.append({"kind": "los", "source": tx})
    north, south = geo["half_w"], -geo["half_w"]
    bounces = [("north", (north,)), ("south", (south,))]
    if cfg.max_cluster_order >= 2:
        bounces += [("north-south", (north, south)), ("south-north", (south, north))]
    for kind, walls in bounces:
        if not los and not _blocker_clear(geo, walls):
            continue
        image = tx.copy()
        image[1] = origin[1] + _unfolded_image_y(geo, walls)
        clusters.append({"kind": kind, "source": image})
    for c in clusters:
        vec = c.pop("source") - rx
        c["path_length_m"] = float(np.linalg.norm(vec))
        c["delay_ns"] = c["path_length_m"] / SPEED_OF_LIGHT * 1e9
        c["aoa_az_deg"], c["aoa_el_deg"] = _angles(vec)
    clusters.sort(key=lambda c: c["path_length_m"])
    return clusters


def _separated(clusters, min_sep_deg):
    dirs = [(c["aoa_az_deg"], c["aoa_el_deg"]) for c in clusters]
    return all(_sep_deg(a, b) > min_sep_deg for a, b in itertools.combinations(dirs, 2))


def generate_campaign(config: Optional[GeneratorConfig] = None, seed: int = 42):
    """Build ``(campaign, ground_truth, scene)`` from a config and seed.

    ``ground_truth`` is a plain dict ready for JSON; ``scene`` is the facet
    list holding every location's canyon.
    """
    cfg = config or GeneratorConfig()
    cfg.validate()
    rng = np.random.default_rng(seed)
    snd = SOUNDERS[cfg.sounder]
    bw = 2.5
    eirp = snd["tx_power_dbm"] + snd["tx_gain_dbi"] + snd["rx_gain_dbi"]
    anchor = fspl_at_ref(snd["carrier_freq_hz"])
    # a single bin sitting exactly at the cutoff carries the weakest measurable power
    p_min_mw = 10.0 ** ((eirp - snd["max_path_loss_db"]) / 10.0)
    cutoff = p_min_mw / bw
    noise_floor = cutoff / 10.0 ** 0.5

    n = cfg.n_locations
    n_los = int(round(n * cfg.los_fraction))
    n_out = int(round((n - n_los) * cfg.outage_fraction))
    classes = ["LOS"] * n_los + ["NLOS"] * (n - n_los)
    outage_flags = [False] * (n - n_out) + [True] * n_out
    width = max(2, len(str(max(n - 1, 0))))

    locations, truths, scene = [], [], []
    for i in range(n):
        loc_id = f"L{i:0{width}d}"
        los = classes[i] == "LOS"
        for _ in range(100):
            dist = float(rng.uniform(cfg.d_min_m, cfg.d_max_m))
            geo = _canyon(rng, cfg, dist, los)
            # Cells step diagonally so no facet of one cell faces another cell.
            origin = (i * cfg.cell_spacing_m, i * cfg.cell_spacing_m)
            tx = np.array([origin[0], origin[1] + geo["y_tx"], geo["h_tx"]])
            rx = np.array([origin[0] + geo["dx"], origin[1] + geo["y_rx"], geo["h_rx"]])
            clusters = _clusters(cfg, geo, origin, tx, rx, los)
            # redraw until every cluster is resolvable by its own beam
            if _separated(clusters, max(snd["hpbw_az_deg"], snd["hpbw_el_deg"])):
                break
        else:
            raise GeneratorError(f"{loc_id}: could not place resolvable clusters")
        dist = float(np.linalg.norm(tx - rx))
        scene.extend(_cell_facets(geo, origin, loc_id, los))
        shadow = float(rng.normal(0.0, cfg.shadow_sigma_db)) if cfg.shadow_sigma_db > 0 else 0.0

        n_c = len(clusters)
        for rank, c in enumerate(clusters):
            offset = 0.0 if n_c == 1 else cfg.beam_ple_spread * (rank / (n_c - 1) - 0.5)
            c["ple"] = cfg.ple + offset
            c["path_loss_db"] = anchor + 10.0 * c["ple"] * math.log10(dist) + shadow
            c["power_mw"] = 10.0 ** ((eirp - c["path_loss_db"]) / 10.0)
            c["tap_decay_ns"] = float(cfg.tap_decay_ns * rng.uniform(0.5, 2.0))
            dens = _tap_shape(cfg, bw, c["power_mw"], cutoff, c["tap_decay_ns"])
            c["detected"] = dens is not None
            c["tap_density_mw_per_ns"] = [] if dens is None else dens.tolist()
            if dens is not None:
                c["sigma_tau_ns"], _ = weighted_sigma(np.arange(dens.size) * bw, dens)

        outage = outage_flags[i] and not los
        records = []
        if not outage:
            pointing = [(c["aoa_az_deg"], c["aoa_el_deg"]) for c in clusters]
            tries = 0
            while len(pointing) < n_c + cfg.n_scan_records and tries < 1000:
                tries += 1
                cand = (float(rng.uniform(0.0, 360.0)), float(rng.uniform(-10.0, 20.0)))
                if cand[0] >= 360.0:
                    continue
                if any(_sep_deg(cand, p) < max(snd["hpbw_az_deg"], snd["hpbw_el_deg"]) for p in pointing):
                    continue
                pointing.append(cand)
            for j, (az, el) in enumerate(pointing):
                powers = rng.uniform(0.0, NOISE_SPAN * noise_floor, cfg.pdp_bins)
                captured = [
                    c
                    for c in clusters
                    if c["detected"] and _in_beam((az, el), (c["aoa_az_deg"], c["aoa_el_deg"]), snd["hpbw_az_deg"], snd["hpbw_el_deg"])
                ]
                lead = int(rng.integers(cfg.lead_bins[0], cfg.lead_bins[1]))
                if captured:
                    t_first = min(c["delay_ns"] for c in captured)
                    signal = np.zeros(cfg.pdp_bins)
                    for c in captured:
                        start = lead + int(math.floor((c["delay_ns"] - t_first) / bw + 0.5))
                        dens = np.asarray(c["tap_density_mw_per_ns"])
                        stop = min(cfg.pdp_bins, start + dens.size)
                        signal[start:stop] += dens[: stop - start]
                    powers = np.where(signal > 0, signal, powers)
                records.append(
                    AngleRecord(
                        azimuth_deg=az,
                        elevation_deg=el,
                        pdp=Pdp(tuple(powers.tolist()), noise_floor=noise_floor, bin_width_ns=bw),
                        boresight=(los and j == 0),
                    )
                )
        locations.append(
            LocationMeasurement(
                id=loc_id,
                tr_distance_m=dist,
                los_class=classes[i],
                records=tuple(records),
                outage=outage,
                tx_pos=tuple(tx.tolist()),
                rx_pos=tuple(rx.tolist()),
            )
        )
        truths.append(_location_truth(loc_id, classes[i], dist, outage, clusters, shadow, bw))

    campaign = Campaign(locations=tuple(locations), noise_floor=noise_floor, **snd)
    truth = {
        "seed": seed,
        "config": _config_dict(cfg),
        "carrier_freq_hz": snd["carrier_freq_hz"],
        "noise_floor": noise_floor,
        "ple_all_angles": cfg.ple,
        "shadow_sigma_db": cfg.shadow_sigma_db,
        "locations": truths,
    }
    truth.update(_truth_fits(truths, anchor, eirp))
    return campaign, truth, tuple(scene)


def _location_truth(loc_id, los_class, dist, outage, clusters, shadow, bw):
    out = {
        "id": loc_id,
        "los_class": los_class,
        "distance_m": dist,
        "outage": outage,
        "shadow_db": shadow,
        "clusters": clusters,
    }
    seen = [c for c in clusters if c["detected"]] if not outage else []
    if seen:
        strongest = max(seen, key=lambda c: c["power_mw"])
        out["strongest_sigma_tau_ns"] = strongest["sigma_tau_ns"]
        delays = np.concatenate([c["delay_ns"] + np.arange(len(c["tap_density_mw_per_ns"])) * bw for c in seen])
        weights = np.concatenate([c["tap_density_mw_per_ns"] for c in seen])
        out["omni_sigma_tau_ns"], _ = weighted_sigma(delays, weights)
        out["first_arrival_ns"] = min(c["delay_ns"] for c in seen)
    return out


def _truth_fits(truths, anchor, eirp):
    dist_all, pl_all = [], []
    per_mode = {"coherent": {}, "noncoherent": {}}
    combined = {(m, k): ([], []) for m in per_mode for k in (1, 2, 3, 4)}
    for t in truths:
        seen = [c for c in t["clusters"] if c["detected"]] if not t["outage"] else []
        if not seen:
            continue
        for c in seen:
            dist_all.append(t["distance_m"])
            pl_all.append(c["path_loss_db"])
        powers = sorted((c["power_mw"] for c in seen), reverse=True)
        for (mode, k), (ds, pls) in combined.items():
            top = powers[:k]
            p = sum(top) if mode == "noncoherent" else sum(math.sqrt(v) for v in top) ** 2
            ds.append(t["distance_m"])
            pls.append(eirp - 10.0 * math.log10(p))
    out = {}
    if dist_all:
        out["ple_fit_all_angles"] = closed_form_ple(dist_all, pl_all, anchor)
        for (mode, k), (ds, pls) in combined.items():
            per_mode[mode][str(k)] = closed_form_ple(ds, pls, anchor)
        out["ple_by_mode"] = per_mode
    return out


def _config_dict(cfg):
    d = asdict(cfg)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def config_from_dict(obj):
    fields_ = {k: tuple(v) if isinstance(v, list) else v for k, v in obj.items()}
    return GeneratorConfig(**fields_)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_outputs(campaign, truth, scene, out_dir):
    """Write campaign.json, ground_truth.json and scene.json into `out_dir`."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_campaign(campaign, out / "campaign.json")
    (out / "ground_truth.json").write_text(json.dumps(truth, indent=1, default=_json_default) + "\n", encoding="utf-8")
    save_scene(scene, out / "scene.json")
    return out / "campaign.json", out / "ground_truth.json", out / "scene.json"


def generate_path_loss_samples(ple, shadow_sigma_db, n_samples, freq_hz, seed=0, d_range=(100.0, 1000.0)):
    """Independent close-in path loss draws with log-normal shadowing."""
    rng = np.random.default_rng(seed)
    anchor = fspl_at_ref(freq_hz)
    d = rng.uniform(d_range[0], d_range[1], n_samples)
    pl = anchor + 10.0 * ple * np.log10(d) + rng.normal(0.0, shadow_sigma_db, n_samples)
    return [PathLossSample(float(a), float(b), freq_hz=freq_hz) for a, b in zip(d, pl)]
