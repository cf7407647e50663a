"""
Measurement campaign domain model: power delay profiles, directional
records, locations, file I/O, noise thresholding and outage summaries.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .constants import BIN_WIDTH_NS, DEFAULT_THRESHOLD_DB


class CampaignError(ValueError):
    """Base class for campaign loading problems."""


class CampaignParseError(CampaignError):
    """The campaign file is not well formed; `locus` points at the bad record."""

    def __init__(self, message, locus=""):
        self.locus = locus
        super().__init__(f"{locus}: {message}" if locus else message)


class CampaignValidationError(CampaignError):
    """A value violates a domain invariant; `field_name` names the field."""

    def __init__(self, field_name, message):
        self.field_name = field_name
        super().__init__(f"{field_name}: {message}")


class LosClass(str, enum.Enum):
    LOS = "LOS"
    NLOS = "NLOS"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise CampaignValidationError("los_class", f"expected LOS or NLOS, got {value!r}") from None


@dataclass(frozen=True)
class Pdp:
    """
    Time-binned power delay profile.

    Bin ``k`` sits at delay ``start_delay_ns + k * bin_width_ns`` and holds a
    power density in mW/ns. ``noise_floor`` is the mean thermal noise density
    in the same units.
    """

    powers: tuple
    noise_floor: float
    bin_width_ns: float = BIN_WIDTH_NS
    start_delay_ns: float = 0.0

    def __post_init__(self):
        powers = tuple(float(p) for p in self.powers)
        object.__setattr__(self, "powers", powers)
        if not (self.bin_width_ns > 0 and math.isfinite(self.bin_width_ns)):
            raise CampaignValidationError("bin_width_ns", f"must be > 0, got {self.bin_width_ns}")
        if not (self.noise_floor > 0 and math.isfinite(self.noise_floor)):
            raise CampaignValidationError("noise_floor", f"must be > 0, got {self.noise_floor}")
        if not math.isfinite(self.start_delay_ns):
            raise CampaignValidationError("start_delay_ns", "must be finite")
        for p in powers:
            if not (p >= 0 and math.isfinite(p)):
                raise CampaignValidationError("powers", f"power densities must be finite and >= 0, got {p}")

    def __len__(self):
        return len(self.powers)

    @property
    def power_array(self):
        return np.asarray(self.powers, dtype=float)

    @property
    def delays_ns(self):
        return self.start_delay_ns + np.arange(len(self.powers)) * self.bin_width_ns

    def nonzero_indices(self):
        return np.flatnonzero(self.power_array > 0)

    def is_valid(self):
        """True when at least one bin carries power."""
        return any(p > 0 for p in self.powers)

    def scaled(self, factor):
        return replace(self, powers=tuple(p * factor for p in self.powers))

    def shifted(self, delta_ns):
        return replace(self, start_delay_ns=self.start_delay_ns + delta_ns)


@dataclass(frozen=True)
class AngleRecord:
    """One directional measurement at RX pointing angle (azimuth, elevation)."""

    azimuth_deg: float
    elevation_deg: float
    pdp: Pdp
    boresight: bool = False

    def __post_init__(self):
        if not (0.0 <= self.azimuth_deg < 360.0):
            raise CampaignValidationError("azimuth_deg", f"must lie in [0, 360), got {self.azimuth_deg}")
        if not (-90.0 <= self.elevation_deg <= 90.0):
            raise CampaignValidationError("elevation_deg", f"must lie in [-90, 90], got {self.elevation_deg}")

    @property
    def angle_key(self):
        return (self.azimuth_deg, self.elevation_deg)


@dataclass(frozen=True)
class LocationMeasurement:
    id: str
    tr_distance_m: float
    los_class: LosClass
    records: tuple = ()
    outage: bool = False
    tx_pos: Optional[tuple] = None
    rx_pos: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "los_class", LosClass.parse(self.los_class))
        for name in ("tx_pos", "rx_pos"):
            pos = getattr(self, name)
            if pos is not None:
                pos = tuple(float(v) for v in pos)
                if len(pos) != 3:
                    raise CampaignValidationError(name, "must have three coordinates")
                object.__setattr__(self, name, pos)
        if not (self.tr_distance_m > 0 and math.isfinite(self.tr_distance_m)):
            raise CampaignValidationError("tr_distance_m", f"must be > 0, got {self.tr_distance_m}")
        if self.outage and self.records:
            raise CampaignValidationError("outage", f"location {self.id} is marked outage but has records")
        if not self.outage and not self.records:
            raise CampaignValidationError("outage", f"location {self.id} has no records but is not marked outage")
        if self.tx_pos is not None and self.rx_pos is not None:
            geometric = math.dist(self.tx_pos, self.rx_pos)
            if abs(geometric - self.tr_distance_m) > 0.01 * self.tr_distance_m:
                raise CampaignValidationError(
                    "tr_distance_m",
                    f"location {self.id}: {self.tr_distance_m} m disagrees with |tx_pos - rx_pos| = {geometric:.3f} m",
                )
        seen = set()
        for rec in self.records:
            if rec.angle_key in seen:
                raise CampaignValidationError("records", f"location {self.id}: duplicate pointing angle {rec.angle_key}")
            seen.add(rec.angle_key)


@dataclass(frozen=True)
class Campaign:
    carrier_freq_hz: float
    hpbw_az_deg: float
    hpbw_el_deg: float
    tx_power_dbm: float
    tx_gain_dbi: float
    rx_gain_dbi: float
    max_path_loss_db: float
    locations: tuple = ()
    noise_floor: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "locations", tuple(self.locations))
        for name in ("carrier_freq_hz", "hpbw_az_deg", "hpbw_el_deg", "tx_gain_dbi", "rx_gain_dbi"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise CampaignValidationError(name, f"must be > 0, got {value}")
        ids = [loc.id for loc in self.locations]
        if len(set(ids)) != len(ids):
            raise CampaignValidationError("locations", "location ids must be unique")

    @property
    def eirp_gain_db(self):
        return self.tx_power_dbm + self.tx_gain_dbi + self.rx_gain_dbi

    def by_class(self, los_class):
        los_class = LosClass.parse(los_class)
        return [loc for loc in self.sorted_locations() if loc.los_class == los_class]

    def sorted_locations(self):
        return sorted(self.locations, key=lambda loc: loc.id)

    def without(self, excluded: Iterable[str]):
        """Copy of the campaign with the given location ids dropped."""
        excluded = set(excluded)
        unknown = excluded - {loc.id for loc in self.locations}
        if unknown:
            raise KeyError(f"unknown location ids: {sorted(unknown)}")
        return replace(self, locations=tuple(loc for loc in self.locations if loc.id not in excluded))


# --- thresholding and power -------------------------------------------------


def threshold_cutoff(noise_floor, threshold_db=DEFAULT_THRESHOLD_DB):
    return noise_floor * 10.0 ** (threshold_db / 10.0)


def threshold_pdp(pdp: Pdp, threshold_db: float = DEFAULT_THRESHOLD_DB) -> Pdp:
    """Zero every bin below ``noise_floor * 10**(threshold_db/10)``.

    Bins are zeroed rather than removed so the delay axis is untouched.
    """
    if threshold_db < 0:
        raise ValueError(f"threshold_db must be >= 0, got {threshold_db}")
    cutoff = threshold_cutoff(pdp.noise_floor, threshold_db)
    return replace(pdp, powers=tuple(p if p >= cutoff else 0.0 for p in pdp.powers))


def total_power(pdp: Pdp) -> float:
    """Received power in mW: sum of densities times the bin width."""
    return math.fsum(pdp.powers) * pdp.bin_width_ns


def threshold_record(record: AngleRecord, threshold_db=DEFAULT_THRESHOLD_DB):
    return replace(record, pdp=threshold_pdp(record.pdp, threshold_db))


def valid_records(location: LocationMeasurement, threshold_db=DEFAULT_THRESHOLD_DB):
    """Thresholded records of a location that keep at least one nonzero bin,
    ordered by (azimuth, elevation)."""
    out = []
    for rec in sorted(location.records, key=lambda r: r.angle_key):
        rec = threshold_record(rec, threshold_db)
        if rec.pdp.is_valid():
            out.append(rec)
    return out


def has_signal(location: LocationMeasurement, threshold_db=DEFAULT_THRESHOLD_DB):
    return not location.outage and bool(valid_records(location, threshold_db))


def rank_records(records: Sequence[AngleRecord]):
    """Records sorted by descending total power; ties go to the lower
    (azimuth, elevation) pair."""
    return sorted(records, key=lambda r: (-total_power(r.pdp), r.azimuth_deg, r.elevation_deg))


# --- summaries ---------------------------------------------------------------

SUMMARY_GROUPS = (
    "measured_d_le_max",
    "measured_all_d",
    "signal_d_le_max",
    "outage_d_le_max",
    "signal_all_d",
    "outage_all_d",
)


@dataclass(frozen=True)
class SummaryRow:
    group: str
    los_class: LosClass
    count: int
    d_min_m: Optional[float]
    d_max_m: Optional[float]


def summarize_campaign(campaign: Campaign, d_max_m: float = 200.0, threshold_db=DEFAULT_THRESHOLD_DB):
    """Location counts per LOS class in the row layout of an outage table.

    A location counts as "signal" when at least one of its pointing angles
    survives thresholding; everything else measured is an outage.
    """
    if not d_max_m > 0:
        raise ValueError(f"d_max_m must be > 0, got {d_max_m}")
    rows = []
    buckets = {}
    for cls in LosClass:
        locs = campaign.by_class(cls)
        near = [loc for loc in locs if loc.tr_distance_m <= d_max_m]
        for suffix, group in (("d_le_max", near), ("all_d", locs)):
            signal = [loc for loc in group if has_signal(loc, threshold_db)]
            outage = [loc for loc in group if not has_signal(loc, threshold_db)]
            buckets[("measured_" + suffix, cls)] = group
            buckets[("signal_" + suffix, cls)] = signal
            buckets[("outage_" + suffix, cls)] = outage
    for group in SUMMARY_GROUPS:
        for cls in LosClass:
            locs = buckets[(group, cls)]
            dists = [loc.tr_distance_m for loc in locs]
            rows.append(SummaryRow(group, cls, len(locs), min(dists) if dists else None, max(dists) if dists else None))
    return rows


# --- file format -------------------------------------------------------------

_CAMPAIGN_FIELDS = (
    "carrier_freq_hz",
    "hpbw_az_deg",
    "hpbw_el_deg",
    "tx_power_dbm",
    "tx_gain_dbi",
    "rx_gain_dbi",
    "max_path_loss_db",
)


def normalize_azimuth(azimuth_deg):
    az = math.fmod(azimuth_deg, 360.0)
    if az < 0:
        az += 360.0
    # fmod of a tiny negative can round up to exactly 360
    return 0.0 if az >= 360.0 else az


def _number(obj, key, locus, default=None, required=True):
    if key not in obj:
        if required and default is None:
            raise CampaignParseError(f"missing field {key!r}", locus)
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CampaignParseError(f"field {key!r} must be a number, got {value!r}", locus)
    return float(value)


def _pdp_from_dict(obj, locus, default_noise):
    if not isinstance(obj, dict):
        raise CampaignParseError("pdp must be an object", locus)
    powers = obj.get("powers")
    if not isinstance(powers, list) or not all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in powers
    ):
        raise CampaignParseError("powers must be a list of numbers", locus + ".powers")
    noise = _number(obj, "noise_floor", locus, default=default_noise)
    return Pdp(
        powers=tuple(powers),
        noise_floor=noise,
        bin_width_ns=_number(obj, "bin_width_ns", locus, default=BIN_WIDTH_NS),
        start_delay_ns=_number(obj, "start_delay_ns", locus, default=0.0, required=False),
    )


def _record_from_dict(obj, locus, default_noise):
    if not isinstance(obj, dict):
        raise CampaignParseError("record must be an object", locus)
    az = _number(obj, "azimuth_deg", locus)
    if not 0.0 <= az < 360.0:
        norm = normalize_azimuth(az)
        warnings.warn(f"{locus}: azimuth {az} normalized to {norm}", stacklevel=4)
        az = norm
    el = _number(obj, "elevation_deg", locus)
    if "pdp" not in obj:
        raise CampaignParseError("missing field 'pdp'", locus)
    pdp = _pdp_from_dict(obj["pdp"], locus + ".pdp", default_noise)
    return AngleRecord(az, el, pdp, boresight=bool(obj.get("boresight", False)))


def _location_from_dict(obj, locus, default_noise):
    if not isinstance(obj, dict):
        raise CampaignParseError("location must be an object", locus)
    if "id" not in obj:
        raise CampaignParseError("missing field 'id'", locus)
    records_obj = obj.get("records", [])
    if not isinstance(records_obj, list):
        raise CampaignParseError("records must be a list", locus + ".records")
    records = []
    for j, rec in enumerate(records_obj):
        rec_locus = f"{locus}.records[{j}]"
        try:
            records.append(_record_from_dict(rec, rec_locus, default_noise))
        except CampaignValidationError as exc:
            raise CampaignValidationError(exc.field_name, f"{rec_locus}: {exc}") from None
    if "los_class" not in obj:
        raise CampaignParseError("missing field 'los_class'", locus)
    return LocationMeasurement(
        id=str(obj["id"]),
        tr_distance_m=_number(obj, "tr_distance_m", locus),
        los_class=obj["los_class"],
        records=tuple(records),
        outage=bool(obj.get("outage", False)),
        tx_pos=obj.get("tx_pos"),
        rx_pos=obj.get("rx_pos"),
    )


def campaign_from_dict(obj) -> Campaign:
    if not isinstance(obj, dict):
        raise CampaignParseError("top level must be an object")
    meta = {name: _number(obj, name, "campaign") for name in _CAMPAIGN_FIELDS}
    default_noise = _number(obj, "noise_floor", "campaign", required=False)
    locations_obj = obj.get("locations")
    if not isinstance(locations_obj, list):
        raise CampaignParseError("locations must be a list", "campaign.locations")
    locations = []
    for i, loc in enumerate(locations_obj):
        locus = f"locations[{i}]"
        try:
            locations.append(_location_from_dict(loc, locus, default_noise))
        except CampaignValidationError as exc:
            if locus in str(exc):
                raise
            raise CampaignValidationError(exc.field_name, f"{locus}: {exc}") from None
    return Campaign(locations=tuple(locations), noise_floor=default_noise, **meta)


def load_campaign(path) -> Campaign:
    """Read and validate a campaign file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CampaignParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return campaign_from_dict(obj)


def pdp_to_dict(pdp: Pdp):
    return {
        "bin_width_ns": pdp.bin_width_ns,
        "start_delay_ns": pdp.start_delay_ns,
        "noise_floor": pdp.noise_floor,
        "powers": list(pdp.powers),
    }


def campaign_to_dict(campaign: Campaign):
    out = {name: getattr(campaign, name) for name in _CAMPAIGN_FIELDS}
    if campaign.noise_floor is not None:
        out["noise_floor"] = campaign.noise_floor
    locs = []
    for loc in campaign.locations:
        entry = {"id": loc.id}
        if loc.tx_pos is not None:
            entry["tx_pos"] = list(loc.tx_pos)
        if loc.rx_pos is not None:
            entry["rx_pos"] = list(loc.rx_pos)
        entry["tr_distance_m"] = loc.tr_distance_m
        entry["los_class"] = loc.los_class.value
        entry["outage"] = loc.outage
        entry["records"] = [
            {
                "azimuth_deg": rec.azimuth_deg,
                "elevation_deg": rec.elevation_deg,
                "boresight": rec.boresight,
                "pdp": pdp_to_dict(rec.pdp),
            }
            for rec in loc.records
        ]
        locs.append(entry)
    out["locations"] = locs
    return out


def save_campaign(campaign: Campaign, path):
    Path(path).write_text(json.dumps(campaign_to_dict(campaign), indent=1) + "\n", encoding="utf-8")
