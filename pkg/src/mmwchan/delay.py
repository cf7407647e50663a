"""
RMS delay spread, directional delay-spread statistics and empirical CDFs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .campaign import Campaign, LosClass, Pdp, rank_records, valid_records
from .constants import DEFAULT_THRESHOLD_DB


class UndefinedMomentError(ValueError):
    """Raised for delay moments of a profile with no power."""


class EmptyStatsError(ValueError):
    pass


def _relative_moments(pdp: Pdp):
    # Delays are taken relative to the first nonzero bin so that the result
    # depends only on bin offsets, not on where the profile sits in time.
    powers = pdp.power_array
    nz = np.flatnonzero(powers > 0)
    if nz.size == 0:
        raise UndefinedMomentError("profile has no nonzero bins")
    first = nz[0]
    weights = powers[first:]
    rel = np.arange(weights.size) * pdp.bin_width_ns
    total = math.fsum(weights)
    mean_rel = math.fsum(weights * rel) / total
    var = math.fsum(weights * (rel - mean_rel) ** 2) / total
    first_delay = pdp.start_delay_ns + first * pdp.bin_width_ns
    return first_delay, mean_rel, var


def mean_excess_delay(pdp: Pdp) -> float:
    """Power-weighted mean of the bin delays of `pdp`, in ns."""
    first_delay, mean_rel, _ = _relative_moments(pdp)
    return first_delay + mean_rel


def rms_delay_spread(pdp: Pdp) -> float:
    """RMS delay spread in ns.

    The central second moment is accumulated directly, which equals the
    second raw moment minus the squared mean but cannot go negative.
    """
    _, _, var = _relative_moments(pdp)
    return math.sqrt(var)


@dataclass(frozen=True)
class DelaySample:
    location_id: str
    azimuth_deg: Optional[float]
    elevation_deg: Optional[float]
    sigma_tau_ns: float


@dataclass(frozen=True)
class DelaySpreadStats:
    mean_ns: float
    std_ns: float
    samples: tuple

    @classmethod
    def from_samples(cls, samples: Sequence[DelaySample]):
        samples = tuple(samples)
        if not samples:
            return cls(math.nan, math.nan, ())
        values = np.array([s.sigma_tau_ns for s in samples])
        mean = math.fsum(values) / values.size
        std = math.sqrt(math.fsum((values - mean) ** 2) / values.size)
        return cls(mean, std, samples)

    @property
    def n_samples(self):
        return len(self.samples)

    @property
    def values(self):
        return [s.sigma_tau_ns for s in self.samples]


FILTERS = ("all-angles", "strongest-beam")


def directional_stats(
    campaign: Campaign,
    los_class,
    filter: str = "all-angles",
    threshold_db: float = DEFAULT_THRESHOLD_DB,
) -> DelaySpreadStats:
    """Delay-spread statistics over one LOS class.

    ``all-angles`` takes one sample per valid pointing angle;
    ``strongest-beam`` takes one per location, from its highest-power angle.
    Samples are ordered by location id, then (azimuth, elevation).
    """
    if filter not in FILTERS:
        raise ValueError(f"filter must be one of {FILTERS}, got {filter!r}")
    cls = LosClass.parse(los_class)
    samples = []
    for loc in campaign.by_class(cls):
        if loc.outage:
            continue
        records = valid_records(loc, threshold_db)
        if not records:
            continue
        if filter == "strongest-beam":
            records = rank_records(records)[:1]
        for rec in records:
            samples.append(DelaySample(loc.id, rec.azimuth_deg, rec.elevation_deg, rms_delay_spread(rec.pdp)))
    if not samples:
        raise EmptyStatsError(f"no valid angles for class {cls.value}")
    return DelaySpreadStats.from_samples(samples)


@dataclass(frozen=True)
class Cdf:
    values: np.ndarray
    probabilities: np.ndarray

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.values.size


def empirical_cdf(samples) -> Cdf:
    values = np.sort(np.asarray(samples, dtype=float))
    if values.size == 0:
        raise ValueError("empirical CDF needs at least one sample")
    n = values.size
    return Cdf(values, np.arange(1, n + 1) / n)


def percentile(cdf: Cdf, p: float) -> float:
    """Smallest sample value whose CDF reaches `p`."""
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    idx = int(np.searchsorted(cdf.probabilities, p, side="left"))
    return float(cdf.values[min(idx, cdf.values.size - 1)])
