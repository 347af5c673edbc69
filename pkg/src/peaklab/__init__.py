"""Fourier-domain peak removal and interpretable peak detection for images."""

from .bench import (
    EvalReport,
    InjectionSpec,
    comb_frequency_pairs,
    inject_periodic_peaks,
    relative_difference,
    run_experiment,
    tpr_at_threshold,
)
from .detector import (
    DetectorModel,
    LoGKernel,
    calibrate,
    calibrate_model,
    classify,
    grid_score,
    make_log_kernel,
    residual,
)
from .masking import GridSpec, apply_mask, build_grid_mask, grid_bins
from .removal import RemovalResult, remove_peaks, remove_peaks_batch
from .spectral import average_power_spectrum, dft_forward, dft_inverse, log_magnitude

__version__ = "0.1.0"

__all__ = [
    "DetectorModel",
    "EvalReport",
    "GridSpec",
    "InjectionSpec",
    "LoGKernel",
    "RemovalResult",
    "apply_mask",
    "average_power_spectrum",
    "build_grid_mask",
    "calibrate",
    "calibrate_model",
    "classify",
    "comb_frequency_pairs",
    "dft_forward",
    "dft_inverse",
    "grid_bins",
    "grid_score",
    "inject_periodic_peaks",
    "log_magnitude",
    "make_log_kernel",
    "relative_difference",
    "remove_peaks",
    "remove_peaks_batch",
    "residual",
    "run_experiment",
    "tpr_at_threshold",
    "__version__",
]
