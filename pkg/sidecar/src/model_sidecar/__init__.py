"""Model-serving sidecar for the crisis-pulse classify wire contract."""

from .app import create_app, main
from .config import SidecarConfig
from .labels import LABEL_SETS

__all__ = ["create_app", "main", "SidecarConfig", "LABEL_SETS"]
__version__ = "0.1.0"
