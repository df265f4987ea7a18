"""Procedural closed-mesh models of casting and coating surface defects."""

from .defects import DefectInstance, ElongatedDefectParams, add_branch, default_params, generate_elongated
from .delamination import DelamParams, generate_delamination
from .errors import DefectForgeError
from .mesh import SurfaceMesh, signed_volume, validate
from .rng import RandomStream
from .tessellation import Window, build_voronoi

__version__ = "0.1.0"

__all__ = [
    "DefectForgeError",
    "DefectInstance",
    "DelamParams",
    "ElongatedDefectParams",
    "RandomStream",
    "SurfaceMesh",
    "Window",
    "add_branch",
    "build_voronoi",
    "default_params",
    "generate_delamination",
    "generate_elongated",
    "signed_volume",
    "validate",
]
