"""
Distance extension exponent (DEE) and distance extension factor (DEF).

With both single-beam and multibeam path loss anchored at the same 1 m
free-space value, equal path loss at d1 (PLE n1) and d2 (PLE n2) gives
d2 = d1 ** (n1 / n2).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .pathloss import CloseInModel


class DeePreconditionError(ValueError):
    """Multibeam PLE exceeds the single-beam PLE (requires n1 >= n2)."""


@dataclass(frozen=True)
class DeeResult:
    n1: float
    n2: float
    dee: float
    mode: Optional[str] = None
    k_beams: Optional[int] = None


def dee(n1, n2, mode=None, k_beams=None) -> DeeResult:
    if not n2 > 0:
        raise ValueError(f"n2 must be > 0, got {n2}")
    if n1 < n2:
        raise DeePreconditionError(f"n1 = {n1} < n2 = {n2}; the single-beam PLE must be at least the multibeam PLE")
    return DeeResult(n1, n2, n1 / n2, mode, k_beams)


def _check_domain(d1_m, dee_value):
    if not d1_m >= 1.0:
        raise ValueError(f"d1 must be >= 1 m (the model anchor), got {d1_m}")
    if not dee_value >= 1.0:
        raise ValueError(f"DEE must be >= 1, got {dee_value}")


def extended_distance(d1_m, dee_value):
    """Multibeam distance with the same path loss as `d1_m` for one beam."""
    _check_domain(d1_m, dee_value)
    return d1_m**dee_value


def distance_extension_factor(d1_m, dee_value):
    """DEF = d1 ** (DEE - 1), i.e. d2 / d1."""
    _check_domain(d1_m, dee_value)
    return d1_m ** (dee_value - 1.0)


def distance_extension_factor_from_distances(d1_m, d2_m):
    return (d2_m - d1_m) / d1_m + 1.0


def extension_curve(dee_value, d_min, d_max, step):
    """(d1, d2) pairs on [d_min, d_max]; both endpoints are included."""
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step}")
    if not (1.0 <= d_min < d_max):
        raise ValueError(f"need 1 <= d_min < d_max, got [{d_min}, {d_max}]")
    _check_domain(d_min, dee_value)
    n_steps = int(math.floor((d_max - d_min) / step))
    d1 = d_min + np.arange(n_steps + 1) * step
    d1 = d1[d1 < d_max]
    d1 = np.append(d1, d_max)
    return [(float(a), float(a**dee_value)) for a in d1]


@dataclass(frozen=True)
class DeeRow:
    freq_label: str
    mode: str
    k_beams: int
    ple: float
    dee: float
    d2_m: float


def build_dee_table(fits: Mapping, d1_m: float = 200.0, freq_label: str = "", ks=(1, 2, 3, 4)):
    """Rows of PLE, DEE against k=1 and d2 at `d1_m` for each (mode, k).

    `fits` maps (mode, k) to a :class:`CloseInModel` or a bare PLE. The k=1
    row carries DEE 1 and d2 = d1.
    """
    ples = {key: (v.ple if isinstance(v, CloseInModel) else float(v)) for key, v in fits.items()}
    modes = sorted({mode for mode, _ in ples}, key=lambda m: (m != "coherent", m))
    rows = []
    for mode in modes:
        if (mode, 1) not in ples:
            raise KeyError(f"missing k=1 baseline for mode {mode!r}")
        n1 = ples[(mode, 1)]
        for k in ks:
            if (mode, k) not in ples:
                continue
            res = dee(n1, ples[(mode, k)], mode, k)
            rows.append(DeeRow(freq_label, mode, k, res.n2, res.dee, extended_distance(d1_m, res.dee)))
    return rows


def load_ple_file(path=None):
    """Read a PLE table file. Without a path, the bundled published values
    are returned.

    The file is a list of blocks ``{"freq_label", "freq_hz", "all_angles",
    "coherent": {k: ple}, "noncoherent": {k: ple}}``.
    """
    if path is None:
        text = resources.files("mmwchan.data").joinpath("published_ples.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    blocks = json.loads(text)
    if isinstance(blocks, dict):
        blocks = [blocks]
    out = []
    for block in blocks:
        fits = {}
        for mode in ("coherent", "noncoherent"):
            for k, ple in block.get(mode, {}).items():
                fits[(mode, int(k))] = float(ple)
        out.append((block.get("freq_label", ""), block, fits))
    return out
