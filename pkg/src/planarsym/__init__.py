"""Symmetry detection and local-to-global stability certificates for planar maps."""

from .groups import GroupSpec
from .kernels import BACKEND
from .maps import MapSpec, load_map_spec

__version__ = "0.1.0"

__all__ = ["BACKEND", "GroupSpec", "MapSpec", "load_map_spec", "__version__"]
