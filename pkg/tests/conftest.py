import pytest

from mmwchan.campaign import AngleRecord, Campaign, LocationMeasurement, Pdp
from mmwchan.constants import SOUNDER_28GHZ
from mmwchan.synth import GeneratorConfig, generate_campaign

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def make_pdp(powers, noise=1.0, start=0.0, bw=2.5):
    return Pdp(tuple(float(p) for p in powers), noise_floor=noise, bin_width_ns=bw, start_delay_ns=start)


def make_record(az, el, powers, noise=1.0, boresight=False):
    return AngleRecord(azimuth_deg=az, elevation_deg=el, pdp=make_pdp(powers, noise), boresight=boresight)


def make_location(loc_id, dist, los_class="NLOS", records=(), outage=None, tx=None, rx=None):
    if outage is None:
        outage = not records
    return LocationMeasurement(
        id=loc_id,
        tr_distance_m=dist,
        los_class=los_class,
        records=tuple(records),
        outage=outage,
        tx_pos=tx,
        rx_pos=rx,
    )


def make_campaign(locations, sounder=SOUNDER_28GHZ):
    return Campaign(locations=tuple(locations), **sounder)


@pytest.fixture(scope="session")
def generated():
    """Default synthetic campaign, its ground truth and scene."""
    return generate_campaign(GeneratorConfig(), seed=42)


@pytest.fixture(scope="session")
def generated_28():
    cfg = GeneratorConfig(sounder="28GHz", ple=4.556, n_locations=30)
    return generate_campaign(cfg, seed=7)
