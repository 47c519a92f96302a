"""Online change-point detection for heavy-tailed, multi-dimensional streams."""

from .bound import (
    Ball,
    Box,
    ConfigError,
    EstimatorConfig,
    Regime,
    SgdChain,
    bound_b,
    c_t,
    clip,
    gamma_of,
    step_size,
    subgaussian_radius,
    update_step,
)
from .detector import ClippedSgdDetector, Detection, DetectorConfig, DetectorState, run, threshold

__version__ = "0.1.0"
