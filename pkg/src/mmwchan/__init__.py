"""Directional mmWave PDP processing: delay spread, close-in path loss,
beam combining, distance extension and ray-traced omnidirectional synthesis."""

from .campaign import (
    AngleRecord,
    Campaign,
    LocationMeasurement,
    LosClass,
    Pdp,
    load_campaign,
    save_campaign,
    summarize_campaign,
    threshold_pdp,
    total_power,
)
from .combining import combine_coherent, combine_noncoherent, multibeam_samples
from .delay import directional_stats, empirical_cdf, mean_excess_delay, percentile, rms_delay_spread
from .extension import build_dee_table, dee, distance_extension_factor, extended_distance, extension_curve
from .omni import match_angles_to_paths, omni_stats, synthesize_omni_pdp
from .pathloss import CloseInModel, PathLossSample, fit_ple, fspl_at_ref, path_loss_from_record, predict_path_loss
from .raytrace import Facet, RayPath, predict_strongest_aoas, trace_paths
from .synth import GeneratorConfig, generate_campaign

__version__ = "0.1.0"
