"""Geodesic currents on cusped hyperbolic surfaces: exact geometry,
counting currents, intersection numbers and rational approximation."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0.1.0"

from .errors import CurrentsError, DegeneracyError, PreconditionError
from .fuchsian import SurfacePreset, get_preset, preset_gamma2
from .currents import DiscreteCurrent, default_box_suite, eta_closed, eta_cusp_pair, evaluate_box
from .intersect import intersection_number
from .approx import densify
from .limitset import hausdorff_to_pair, limit_set_approx, pingpong_intervals

__all__ = [
    "CurrentsError",
    "DegeneracyError",
    "PreconditionError",
    "SurfacePreset",
    "get_preset",
    "preset_gamma2",
    "DiscreteCurrent",
    "default_box_suite",
    "eta_closed",
    "eta_cusp_pair",
    "evaluate_box",
    "intersection_number",
    "densify",
    "hausdorff_to_pair",
    "limit_set_approx",
    "pingpong_intervals",
]
