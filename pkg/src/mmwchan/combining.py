"""
Post-detection combining of the strongest beams at a location.
"""

from __future__ import annotations

import math

from .campaign import Campaign, rank_records, total_power, valid_records
from .constants import DEFAULT_THRESHOLD_DB
from .pathloss import mw_to_dbm, path_loss_from_record

MODES = ("coherent", "noncoherent")


def strongest(powers_mw, k):
    """The `k` largest powers in descending order, and whether fewer than
    `k` were available."""
    powers = [float(p) for p in powers_mw]
    if not powers:
        raise ValueError("no beam powers to combine")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if any(p < 0 or not math.isfinite(p) for p in powers):
        raise ValueError("beam powers must be finite and non-negative")
    chosen = sorted(powers, reverse=True)[:k]
    return chosen, len(powers) < k


def combine_noncoherent(powers_mw, k):
    """Sum of the `k` strongest powers (mW)."""
    chosen, _ = strongest(powers_mw, k)
    return math.fsum(chosen)


def combine_coherent(powers_mw, k):
    """Square of the summed amplitudes of the `k` strongest beams (mW)."""
    chosen, _ = strongest(powers_mw, k)
    # Expanded square: sum(p) + 2*sum_{i<j} sqrt(p_i p_j). Every term is
    # non-negative, so the correctly rounded sum never drops below the
    # non-coherent one.
    amps = [math.sqrt(p) for p in chosen]
    cross = [2.0 * amps[i] * amps[j] for i in range(len(amps)) for j in range(i + 1, len(amps))]
    return math.fsum(chosen + cross)


def combine(powers_mw, k, mode):
    if mode == "coherent":
        return combine_coherent(powers_mw, k)
    if mode == "noncoherent":
        return combine_noncoherent(powers_mw, k)
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def beam_powers(location, threshold_db=DEFAULT_THRESHOLD_DB):
    """Total powers of a location's valid beams, strongest first."""
    return [total_power(rec.pdp) for rec in rank_records(valid_records(location, threshold_db))]


def multibeam_samples(campaign: Campaign, k, mode="coherent", los_class=None, threshold_db=DEFAULT_THRESHOLD_DB):
    """Path loss samples for the `k` strongest beams combined at each location.

    With ``k == 1`` both modes give the single-best-beam samples. Locations
    with fewer than `k` valid beams combine all they have.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    locs = campaign.sorted_locations() if los_class is None else campaign.by_class(los_class)
    tag = "single-best-beam" if k == 1 else "multibeam"
    out = []
    for loc in locs:
        if loc.outage:
            continue
        powers = beam_powers(loc, threshold_db)
        if not powers:
            continue
        combined = combine(powers, k, mode)
        out.append(path_loss_from_record(campaign, loc, mw_to_dbm(combined), tag=tag, k_beams=k))
    return out
