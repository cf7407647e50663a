"""Physical constants and sounder presets for the 28 GHz and 73 GHz campaigns."""

SPEED_OF_LIGHT = 299_792_458.0  # m/s

BIN_WIDTH_NS = 2.5
DEFAULT_THRESHOLD_DB = 5.0
REFERENCE_DISTANCE_M = 1.0

# Sliding-correlator sounder settings for the two measurement campaigns.
SOUNDER_28GHZ = {
    "carrier_freq_hz": 28e9,
    "hpbw_az_deg": 10.9,
    "hpbw_el_deg": 8.6,
    "tx_power_dbm": 30.0,
    "tx_gain_dbi": 24.5,
    "rx_gain_dbi": 24.5,
    "max_path_loss_db": 178.0,
}

SOUNDER_73GHZ = {
    "carrier_freq_hz": 73e9,
    "hpbw_az_deg": 7.0,
    "hpbw_el_deg": 7.0,
    "tx_power_dbm": 14.6,
    "tx_gain_dbi": 27.0,
    "rx_gain_dbi": 27.0,
    "max_path_loss_db": 181.0,
}

SOUNDERS = {"28GHz": SOUNDER_28GHZ, "73GHz": SOUNDER_73GHZ}


def ns_from_m(length_m):
    """Free-space propagation time in ns for a path of `length_m` meters."""
    return length_m / SPEED_OF_LIGHT * 1e9
