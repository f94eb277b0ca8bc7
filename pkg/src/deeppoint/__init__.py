"""DeepPoint: reconstruct dense car point clouds from fused coarse depth views."""

from .config import RunConfig, load_config
from .errors import DeepPointError

__all__ = ["DeepPointError", "RunConfig", "load_config"]

__version__ = "0.1.0"
