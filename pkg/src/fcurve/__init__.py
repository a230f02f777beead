"""Discrete closed curves on model surfaces, the functional
F_c = Length - c * Area, its gradient flow, corner rounding and min-max width
estimates."""

from .surface import SurfaceMetric, flat_torus, plane, round_sphere
from .curve import DiscreteCurve, circle, polygon
from .functional import Region, eval_fc, first_variation

__version__ = "0.1.0"

__all__ = [
    "SurfaceMetric",
    "flat_torus",
    "plane",
    "round_sphere",
    "DiscreteCurve",
    "circle",
    "polygon",
    "Region",
    "eval_fc",
    "first_variation",
]
