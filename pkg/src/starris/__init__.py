"""STAR-RIS two-user downlink: channels, phase-shift configuration under the
correlated transmission/reflection constraint, outage and power analysis,
Monte Carlo estimation and radiation patterns."""

__version__ = "0.1.0"

from .channel import ChannelRealization, Moments, RicianParams, rician_moments  # noqa: E402
from .link import MaConfig, end_to_end, thresholds  # noqa: E402
from .psc import StrategySpec, configure  # noqa: E402
from .surface import SurfaceCoefficients, SurfaceGeometry, validate  # noqa: E402

__all__ = [
    "ChannelRealization",
    "MaConfig",
    "Moments",
    "RicianParams",
    "StrategySpec",
    "SurfaceCoefficients",
    "SurfaceGeometry",
    "configure",
    "end_to_end",
    "rician_moments",
    "thresholds",
    "validate",
]
