"""
Absolute-timing omnidirectional PDP synthesis.

The strongest measured pointing angles at a location are paired with
ray-traced arrival directions. Each paired excess-delay PDP is slid so its
first arrival sits at the traced propagation delay, and the slid profiles
are added bin by bin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .campaign import Campaign, LocationMeasurement, LosClass, Pdp, has_signal, rank_records, valid_records
from .constants import DEFAULT_THRESHOLD_DB
from .delay import DelaySample, DelaySpreadStats, rms_delay_spread
from .parallel import ordered_map
from .raytrace import MAX_ORDER, RayPath, angular_distance_deg, predict_strongest_aoas, trace_paths

GATE_DEG = 20.0
MAX_ANGLES = 4


class SynthesisError(ValueError):
    pass


@dataclass(frozen=True)
class AnglePathPairing:
    matches: tuple = ()
    unmatched_records: tuple = ()
    unmatched_paths: tuple = ()


def match_angles_to_paths(records, paths: Sequence[RayPath], gate_deg=GATE_DEG, max_angles=MAX_ANGLES):
    """Greedy pairing of measured angles with predicted arrival directions.

    `records` may be a location (its valid records are used) or a list of
    already thresholded records. The strongest records pick first; each takes
    the nearest unused prediction within `gate_deg` of great-circle distance,
    preferring the shorter path on equal distance.
    """
    if isinstance(records, LocationMeasurement):
        records = valid_records(records)
    ranked = rank_records(records)
    chosen, rest = ranked[:max_angles], ranked[max_angles:]
    free = list(paths)
    matches, unmatched = [], []
    for rec in chosen:
        best = None
        for path in free:
            dist = angular_distance_deg(rec.angle_key, path.aoa)
            if dist > gate_deg:
                continue
            # rounding makes mirror-image directions tie despite last-bit noise
            key = (round(dist, 9), path.total_length_m)
            if best is None or key < best[0]:
                best = (key, path)
        if best is None:
            unmatched.append(rec)
        else:
            matches.append((rec, best[1]))
            free.remove(best[1])
    return AnglePathPairing(tuple(matches), tuple(unmatched + rest), tuple(free))


def synthesize_omni_pdp(pairing: AnglePathPairing) -> Pdp:
    """Superimpose the paired PDPs on an absolute delay axis.

    The axis starts at the earliest paired path delay. Other profiles are
    placed at the nearest bin to their path delay, so absolute timing is
    quantized to half a bin.
    """
    if not pairing.matches:
        raise SynthesisError("no matched angles to synthesize from")
    widths = {rec.pdp.bin_width_ns for rec, _ in pairing.matches}
    if len(widths) != 1:
        raise SynthesisError(f"matched profiles use different bin widths: {sorted(widths)}")
    bw = widths.pop()
    t0 = min(path.delay_ns for _, path in pairing.matches)
    parts = []
    for rec, path in pairing.matches:
        powers = rec.pdp.power_array
        nz = np.flatnonzero(powers > 0)
        if nz.size == 0:
            raise SynthesisError(f"record at {rec.angle_key} has no power above threshold")
        offset = int(math.floor((path.delay_ns - t0) / bw + 0.5))
        parts.append((offset, powers[nz[0] : nz[-1] + 1]))
    length = max(offset + seg.size for offset, seg in parts)
    omni = np.zeros(length)
    for offset, seg in parts:
        omni[offset : offset + seg.size] += seg
    noise = max(rec.pdp.noise_floor for rec, _ in pairing.matches)
    return Pdp(powers=tuple(omni.tolist()), noise_floor=noise, bin_width_ns=bw, start_delay_ns=t0)


@dataclass(frozen=True)
class OmniLocationResult:
    location_id: str
    los_class: LosClass
    synthesized: bool
    reason: str = ""
    pdp: Optional[Pdp] = None
    sigma_tau_ns: Optional[float] = None
    n_matches: int = 0


@dataclass(frozen=True)
class OmniClassStats:
    los_class: LosClass
    n_synthesized: int
    n_measured: int
    stats: DelaySpreadStats


@dataclass(frozen=True)
class OmniReport:
    locations: tuple
    classes: tuple

    def failures(self):
        return [r for r in self.locations if not r.synthesized]


def synthesize_location(
    location: LocationMeasurement,
    scene,
    gate_deg=GATE_DEG,
    threshold_db=DEFAULT_THRESHOLD_DB,
    max_order=MAX_ORDER,
) -> OmniLocationResult:
    """Trace, match and synthesize one location; failures are reported, not raised."""

    def fail(reason):
        return OmniLocationResult(location.id, location.los_class, False, reason)

    if location.tx_pos is None or location.rx_pos is None:
        return fail("missing tx/rx coordinates")
    records = valid_records(location, threshold_db)
    if not records:
        return fail("no valid angles")
    try:
        paths = trace_paths(scene, location.tx_pos, location.rx_pos, max_order)
    except ValueError as exc:
        return fail(f"ray tracing failed: {exc}")
    if not paths:
        return fail("no ray-traced paths")
    pairing = match_angles_to_paths(records, predict_strongest_aoas(paths), gate_deg)
    if not pairing.matches:
        return fail("no measured angle within the angular gate")
    pdp = synthesize_omni_pdp(pairing)
    return OmniLocationResult(
        location.id,
        location.los_class,
        True,
        pdp=pdp,
        sigma_tau_ns=rms_delay_spread(pdp),
        n_matches=len(pairing.matches),
    )


def omni_stats(
    campaign: Campaign,
    scene,
    gate_deg=GATE_DEG,
    threshold_db=DEFAULT_THRESHOLD_DB,
    max_order=MAX_ORDER,
    threads=None,
) -> OmniReport:
    """Omnidirectional delay-spread statistics per LOS class.

    `scene` is one facet list shared by all locations or a mapping from
    location id to its own facet list. Only locations with signal are
    attempted; the per-class count of those is reported as ``n_measured``.
    """
    candidates = [loc for loc in campaign.sorted_locations() if has_signal(loc, threshold_db)]

    def work(loc):
        loc_scene = scene.get(loc.id) if isinstance(scene, Mapping) else scene
        if loc_scene is None:
            return OmniLocationResult(loc.id, loc.los_class, False, "no scene for location")
        return synthesize_location(loc, loc_scene, gate_deg, threshold_db, max_order)

    results = ordered_map(work, candidates, threads)
    classes = []
    for cls in LosClass:
        in_class = [r for r in results if r.los_class == cls]
        done = [r for r in in_class if r.synthesized]
        stats = DelaySpreadStats.from_samples(DelaySample(r.location_id, None, None, r.sigma_tau_ns) for r in done)
        classes.append(OmniClassStats(cls, len(done), len(in_class), stats))
    return OmniReport(tuple(results), tuple(classes))
