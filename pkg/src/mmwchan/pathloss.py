"""
Close-in (1 m free-space anchored) path loss models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .campaign import Campaign, LocationMeasurement, total_power, valid_records
from .constants import DEFAULT_THRESHOLD_DB, REFERENCE_DISTANCE_M, SPEED_OF_LIGHT

TAGS = ("single-best-beam", "multibeam", "all-angles")


class DegenerateFitError(ValueError):
    pass


def fspl_at_ref(freq_hz: float) -> float:
    """Friis free-space path loss at the 1 m reference distance, in dB."""
    if not freq_hz > 0:
        raise ValueError(f"frequency must be > 0, got {freq_hz}")
    return 20.0 * math.log10(4.0 * math.pi * REFERENCE_DISTANCE_M * freq_hz / SPEED_OF_LIGHT)


@dataclass(frozen=True)
class PathLossSample:
    distance_m: float
    path_loss_db: float
    tag: str = "all-angles"
    k_beams: int = 1
    location_id: str = ""
    beyond_measurable: bool = False
    freq_hz: Optional[float] = None

    def __post_init__(self):
        if not (self.distance_m > 0 and math.isfinite(self.distance_m)):
            raise ValueError(f"distance_m must be > 0, got {self.distance_m}")
        if not math.isfinite(self.path_loss_db):
            raise ValueError(f"path_loss_db must be finite, got {self.path_loss_db}")
        if self.freq_hz is not None and self.distance_m >= REFERENCE_DISTANCE_M:
            floor = fspl_at_ref(self.freq_hz)
            if self.path_loss_db < floor:
                raise ValueError(
                    f"path loss {self.path_loss_db:.3f} dB at {self.distance_m} m is below "
                    f"the {floor:.3f} dB free-space value at 1 m"
                )


@dataclass(frozen=True)
class CloseInModel:
    carrier_freq_hz: float
    ple: float
    shadow_sigma_db: float = 0.0
    n_samples: int = 0
    d0_m: float = REFERENCE_DISTANCE_M

    def __post_init__(self):
        if self.d0_m != REFERENCE_DISTANCE_M:
            raise ValueError("close-in models are anchored at d0 = 1 m")
        if not self.ple > 0:
            raise ValueError(f"PLE must be > 0, got {self.ple}")

    @property
    def anchor_db(self):
        return fspl_at_ref(self.carrier_freq_hz)


def path_loss_db(eirp_gain_db, received_power_dbm):
    return eirp_gain_db - received_power_dbm


def path_loss_from_record(
    campaign: Campaign,
    location: LocationMeasurement,
    received_power_dbm: float,
    tag: str = "all-angles",
    k_beams: int = 1,
) -> PathLossSample:
    """Gain-free path loss for a received power measured at `location`.

    Samples beyond the campaign's maximum measurable path loss are returned
    with ``beyond_measurable`` set and are skipped by :func:`fit_ple`.
    """
    pl = path_loss_db(campaign.eirp_gain_db, received_power_dbm)
    return PathLossSample(
        distance_m=location.tr_distance_m,
        path_loss_db=pl,
        tag=tag,
        k_beams=k_beams,
        location_id=location.id,
        beyond_measurable=pl > campaign.max_path_loss_db,
        freq_hz=campaign.carrier_freq_hz,
    )


def mw_to_dbm(power_mw):
    if not power_mw > 0:
        raise ValueError(f"power must be > 0 mW to express in dBm, got {power_mw}")
    return 10.0 * math.log10(power_mw)


def all_angle_samples(campaign: Campaign, los_class=None, threshold_db=DEFAULT_THRESHOLD_DB):
    """One path loss sample per valid pointing angle."""
    locs = campaign.sorted_locations() if los_class is None else campaign.by_class(los_class)
    out = []
    for loc in locs:
        if loc.outage:
            continue
        for rec in valid_records(loc, threshold_db):
            out.append(path_loss_from_record(campaign, loc, mw_to_dbm(total_power(rec.pdp))))
    return out


def fit_ple(samples: Sequence[PathLossSample], freq_hz: float) -> CloseInModel:
    """Least-squares PLE through the fixed free-space anchor at 1 m.

    Minimizes sum((PL_i - FSPL(1 m) - 10 n log10 d_i)^2) over n, which has
    the closed form n = sum(y_i x_i) / sum(x_i^2) with x_i = 10 log10 d_i.
    """
    usable = [s for s in samples if not s.beyond_measurable]
    if len(usable) < 2:
        raise DegenerateFitError(f"need at least 2 measurable samples, got {len(usable)}")
    for s in usable:
        if s.distance_m < REFERENCE_DISTANCE_M:
            raise ValueError(f"distance {s.distance_m} m lies inside the 1 m reference distance")
    anchor = fspl_at_ref(freq_hz)
    x = [10.0 * math.log10(s.distance_m) for s in usable]
    y = [s.path_loss_db - anchor for s in usable]
    sxx = math.fsum(xi * xi for xi in x)
    if sxx == 0.0:
        raise DegenerateFitError("all samples sit at the 1 m reference distance")
    n = math.fsum(xi * yi for xi, yi in zip(x, y)) / sxx
    resid = [yi - n * xi for xi, yi in zip(x, y)]
    sigma = math.sqrt(math.fsum(r * r for r in resid) / len(resid))
    return CloseInModel(carrier_freq_hz=freq_hz, ple=n, shadow_sigma_db=sigma, n_samples=len(usable))


def predict_path_loss(model: CloseInModel, d_m: float) -> float:
    if not d_m >= REFERENCE_DISTANCE_M:
        raise ValueError(f"close-in model is defined for d >= 1 m, got {d_m}")
    return model.anchor_db + 10.0 * model.ple * math.log10(d_m)
