import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_campaign, make_location, make_pdp, make_record
from mmwchan.delay import (
    EmptyStatsError,
    UndefinedMomentError,
    directional_stats,
    empirical_cdf,
    mean_excess_delay,
    percentile,
    rms_delay_spread,
)

profiles = st.lists(st.floats(0.0, 1e3, allow_nan=False), min_size=1, max_size=16).filter(
    lambda p: any(x > 0 for x in p)
)


def _numpy_rms(pdp):
    # One-pass mean and mean-square moments. Delays are taken from the profile
    # start because the one-pass form cancels badly at large absolute delays.
    p = pdp.power_array
    tau = pdp.delays_ns - pdp.start_delay_ns
    m1 = np.sum(p * tau) / np.sum(p)
    m2 = np.sum(p * tau**2) / np.sum(p)
    return math.sqrt(max(m2 - m1 * m1, 0.0))


def test_impulse_has_zero_spread():
    pdp = make_pdp([0, 0, 7.0, 0], start=10.0)
    assert rms_delay_spread(pdp) == 0.0
    assert mean_excess_delay(pdp) == 15.0


def test_two_equal_impulses_give_half_spacing():
    assert rms_delay_spread(make_pdp([1.0, 0, 0, 1.0])) == 3.75


def test_unequal_impulses():
    # powers 3:1 at 0 and 10 ns: mean 2.5, variance 18.75
    pdp = make_pdp([3.0, 0, 0, 0, 1.0])
    assert mean_excess_delay(pdp) == pytest.approx(2.5)
    assert rms_delay_spread(pdp) == pytest.approx(math.sqrt(18.75), rel=1e-15)


def test_empty_profile_is_undefined():
    with pytest.raises(UndefinedMomentError):
        rms_delay_spread(make_pdp([0.0, 0.0]))


@given(profiles, st.floats(0.0, 2000.0))
def test_matches_moment_formula(powers, start):
    pdp = make_pdp(powers, start=start)
    assert rms_delay_spread(pdp) == pytest.approx(_numpy_rms(pdp), rel=1e-6, abs=1e-6)


@given(profiles, st.floats(1e-6, 1e6))
def test_scale_invariant(powers, c):
    pdp = make_pdp(powers)
    assert rms_delay_spread(pdp.scaled(c)) == pytest.approx(rms_delay_spread(pdp), rel=1e-9, abs=1e-9)


@given(profiles, st.floats(-500.0, 500.0))
def test_shift_invariant(powers, delta):
    pdp = make_pdp(powers, start=100.0)
    assert rms_delay_spread(pdp.shifted(delta)) == rms_delay_spread(pdp)
    assert mean_excess_delay(pdp.shifted(delta)) == pytest.approx(mean_excess_delay(pdp) + delta)


@given(profiles)
def test_bounded_by_half_span(powers):
    pdp = make_pdp(powers)
    nz = pdp.nonzero_indices()
    span = (nz[-1] - nz[0]) * pdp.bin_width_ns
    sigma = rms_delay_spread(pdp)
    assert 0.0 <= sigma <= span / 2 * (1 + 1e-12)


# --- statistics -------------------------------------------------------------------


def _campaign():
    # L1: two angles, sigma 0 and 3.75; L2: one angle, sigma 1.25; L3 LOS.
    l1 = make_location("L1", 50.0, records=[make_record(0, 0, [10.0]), make_record(20, 0, [6.0, 0, 0, 6.0])])
    l2 = make_location("L2", 80.0, records=[make_record(0, 0, [4.0, 4.0]), make_record(90, 0, [1.0])])
    l3 = make_location("L3", 40.0, "LOS", records=[make_record(0, 0, [20.0, 0, 20.0])])
    out = make_location("L4", 150.0)
    return make_campaign([l1, l2, l3, out])


def test_all_angle_stats_use_population_std():
    stats = directional_stats(_campaign(), "NLOS", "all-angles")
    assert stats.values == [0.0, 3.75, 1.25]
    mean = 5.0 / 3
    assert stats.mean_ns == pytest.approx(mean)
    expected_std = math.sqrt(((0 - mean) ** 2 + (3.75 - mean) ** 2 + (1.25 - mean) ** 2) / 3)
    assert stats.std_ns == pytest.approx(expected_std)


def test_strongest_beam_takes_one_sample_per_location():
    stats = directional_stats(_campaign(), "NLOS", "strongest-beam")
    # at L1 the two-tap angle carries 30 mW against 25 mW
    assert [(s.location_id, s.azimuth_deg) for s in stats.samples] == [("L1", 20), ("L2", 0)]
    assert stats.values == [3.75, 1.25]


def test_strongest_beam_tie_prefers_lower_azimuth():
    loc = make_location("A", 50.0, records=[make_record(40, 0, [8.0]), make_record(5, 0, [4.0, 4.0])])
    stats = directional_stats(make_campaign([loc]), "NLOS", "strongest-beam")
    assert stats.samples[0].azimuth_deg == 5


def test_single_sample_has_zero_std():
    stats = directional_stats(_campaign(), "LOS")
    assert stats.n_samples == 1 and stats.std_ns == 0.0 and stats.mean_ns == 2.5


def test_empty_class_raises():
    camp = make_campaign([make_location("A", 50.0)])
    with pytest.raises(EmptyStatsError):
        directional_stats(camp, "NLOS")


def test_unknown_filter_rejected():
    with pytest.raises(ValueError):
        directional_stats(_campaign(), "NLOS", "best")


# --- CDF and percentiles ----------------------------------------------------------


def test_cdf_steps():
    cdf = empirical_cdf([3.0, 1.0, 2.0])
    assert cdf.values.tolist() == [1.0, 2.0, 3.0]
    assert cdf(0.5) == 0.0
    assert cdf(2.0) == pytest.approx(2 / 3)
    assert cdf(10.0) == 1.0


def test_percentile_is_smallest_value_reaching_p():
    cdf = empirical_cdf([5.0, 1.0, 4.0, 2.0, 3.0])
    assert percentile(cdf, 0.5) == 3.0
    assert percentile(cdf, 0.9) == 5.0
    assert percentile(cdf, 0.2) == 1.0
    assert percentile(cdf, 1.0) == 5.0


def test_percentile_domain():
    cdf = empirical_cdf([1.0])
    with pytest.raises(ValueError):
        percentile(cdf, 0.0)
    with pytest.raises(ValueError):
        empirical_cdf([])


@given(st.lists(st.floats(0.0, 1e3, allow_nan=False), min_size=1, max_size=50), st.floats(0.01, 1.0))
def test_percentile_properties(samples, p):
    cdf = empirical_cdf(samples)
    v = percentile(cdf, p)
    assert v in samples
    assert cdf(v) >= p - 1e-12
    assert np.all(np.diff(cdf.probabilities) > 0)
