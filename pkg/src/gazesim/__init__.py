"""gazesim: continuous visual-attention scanpath simulation and evaluation.

The pipeline turns an image into pre-attentive feature maps, treats them
as an attractor mass distribution, integrates a damped second-order gaze
trajectory over the resulting field (with inhibition of return driving
exploration), and extracts discrete fixations. A winner-take-all
baseline and the SED/TDE/STDE/NSS evaluation harness are included.
"""

from .config import RunConfig, build_run_config
from .dynamics import (
    Fixation,
    GazeState,
    Scanpath,
    SimConfig,
    Trajectory,
    extract_fixations,
    simulate,
    simulate_detailed,
)
from .features import FeatureStack, basic_stack, combine_equal_weights, itti_saliency, make_stack
from .gravity import FieldGrid, GravityParams, MassField, field_at_point, field_grid, field_interp, kernel_e
from .imaging import Frame, gaussian_blur, gaussian_pyramid, load_image, resize_bilinear, spatial_gradient
from .ior import InhibitionMap, IorParams, ior_step
from .metrics import EvalReport, build_report, nss, sed, stde, string_edit_distance, tde
from .wta import WtaConfig, wta_scanpath

__version__ = "0.1.0"

__all__ = [
    "EvalReport",
    "FeatureStack",
    "FieldGrid",
    "Fixation",
    "Frame",
    "GazeState",
    "GravityParams",
    "InhibitionMap",
    "IorParams",
    "MassField",
    "RunConfig",
    "Scanpath",
    "SimConfig",
    "Trajectory",
    "WtaConfig",
    "basic_stack",
    "build_report",
    "build_run_config",
    "combine_equal_weights",
    "extract_fixations",
    "field_at_point",
    "field_grid",
    "field_interp",
    "gaussian_blur",
    "gaussian_pyramid",
    "ior_step",
    "itti_saliency",
    "kernel_e",
    "load_image",
    "make_stack",
    "nss",
    "resize_bilinear",
    "sed",
    "simulate",
    "simulate_detailed",
    "spatial_gradient",
    "stde",
    "string_edit_distance",
    "tde",
    "wta_scanpath",
]
