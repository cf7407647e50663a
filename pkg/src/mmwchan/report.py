"""Delimiter-separated table output with fixed numeric formatting."""

import io
import math
from pathlib import Path

SIG_DIGITS = 6


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.{SIG_DIGITS}g}"
    return str(getattr(value, "value", value))


def render(header, rows, sep=","):
    buf = io.StringIO()
    buf.write(sep.join(header) + "\n")
    for row in rows:
        buf.write(sep.join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_table(path, header, rows, sep=","):
    text = render(header, rows, sep)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return text


def summary_rows(rows):
    return [(r.group, r.los_class, r.count, r.d_min_m, r.d_max_m) for r in rows]


SUMMARY_HEADER = ("group", "los_class", "count", "d_min_m", "d_max_m")
STATS_HEADER = ("filter", "class", "n_samples", "mean_ns", "std_ns")
CDF_HEADER = ("value_ns", "cum_prob")
FIT_HEADER = ("tag", "mode", "k_beams", "n", "sigma_db", "n_samples")
TRACE_HEADER = ("order", "length_m", "delay_ns", "aoa_az", "aoa_el", "aod_az", "aod_el", "facets")
OMNI_STATS_HEADER = ("class", "n_synthesized", "n_measured", "mean_ns", "std_ns")
OMNI_PDP_HEADER = ("absolute_delay_ns", "power_mw_per_ns")


def dee_header(d1_m):
    return ("freq_label", "mode", "k", "ple", "dee", f"d2_at_{fmt(float(d1_m))}m")


def trace_rows(paths):
    return [
        (p.order, p.total_length_m, p.delay_ns, p.aoa[0], p.aoa[1], p.aod[0], p.aod[1], "|".join(p.facet_ids))
        for p in paths
    ]


def dee_rows(rows):
    return [(r.freq_label, r.mode, r.k_beams, r.ple, r.dee, r.d2_m) for r in rows]
