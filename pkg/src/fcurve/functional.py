"""The length-minus-area functional F_c = Length - c * Area, its first
variation and the normal-speed field of its gradient flow."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import (
    DiscreteCurve,
    contains,
    curvature_profile,
    displace,
    enclosed_area,
    is_contractible,
    length,
    lift,
)
from .errors import LengthMismatchError, NonContractibleError, NotNestedError
from .surface import TORUS, SurfaceMetric, reduce_points

EMPTY = "empty"
FULL = "full"


@dataclass(frozen=True)
class FcValue:
    c: float
    length_term: float
    area_term: float
    value: float

    @classmethod
    def of(cls, c: float, length_term: float, area_term: float) -> "FcValue":
        return cls(c, length_term, area_term, length_term - c * area_term)


@dataclass(frozen=True, eq=False)
class Region:
    """A region of the surface: either a sentinel (``"empty"`` / ``"full"``) or
    the set lying on the region side of each boundary component.

    Several components are only needed on the torus, where a band between two
    homologous loops has no single bounding curve.
    """

    surface: SurfaceMetric
    boundaries: tuple[DiscreteCurve, ...] = ()
    witness: np.ndarray | None = None
    sentinel: str | None = None

    def __post_init__(self):
        if self.sentinel not in (None, EMPTY, FULL):
            raise ValueError(f"unknown sentinel {self.sentinel!r}")
        if self.sentinel is None and not self.boundaries:
            raise ValueError("a non-sentinel region needs a boundary")
        if self.witness is not None:
            w = reduce_points(self.surface, self.witness)
            object.__setattr__(self, "witness", w)
            if len(self.boundaries) == 1 and is_contractible(self.boundaries[0]):
                if not contains(self.boundaries[0], w)[0]:
                    raise NotNestedError("witness point is not inside the region")

    @classmethod
    def empty(cls, surface: SurfaceMetric) -> "Region":
        return cls(surface, sentinel=EMPTY)

    @classmethod
    def full(cls, surface: SurfaceMetric) -> "Region":
        return cls(surface, sentinel=FULL)

    @classmethod
    def bounded_by(cls, *curves: DiscreteCurve, witness=None) -> "Region":
        return cls(curves[0].surface, tuple(curves), witness)

    @property
    def boundary(self) -> DiscreteCurve:
        if len(self.boundaries) != 1:
            raise ValueError("region does not have a single boundary curve")
        return self.boundaries[0]

    @property
    def n_vertices(self) -> int:
        return sum(b.n for b in self.boundaries)


def _x_dy(curve: DiscreteCurve) -> float:
    lifted, closure = lift(curve)
    nxt = np.vstack([lifted[1:], lifted[:1] + closure])
    return float(np.sum(0.5 * (lifted[:, 0] + nxt[:, 0]) * (nxt[:, 1] - lifted[:, 1])))


def region_area(region: Region) -> float:
    S = region.surface
    if region.sentinel == EMPTY:
        return 0.0
    if region.sentinel == FULL:
        return S.total_area
    if len(region.boundaries) == 1 and is_contractible(region.boundaries[0]):
        return enclosed_area(region.boundaries[0])
    if S.kind != TORUS:
        raise NotImplementedError("multi-component regions are only supported on the torus")
    if len(region.boundaries) == 1:
        raise NonContractibleError("a single non-contractible loop bounds no region")
    return loop_area(region.boundaries)


def loop_area(curves) -> float:
    """Sum of side * (x dy) over lifted torus loops, modulo the torus area.

    For loops whose homology classes cancel this is the enclosed area; for a
    single loop it is the area swept relative to a fixed reference loop.
    """
    S = curves[0].surface
    total = sum(b.side * _x_dy(b) for b in curves)
    return float(np.mod(total, S.total_area))


def region_length(region: Region) -> float:
    return float(sum(length(b) for b in region.boundaries))


def eval_fc(region: Region, c: float) -> FcValue:
    if not c > 0:
        raise ValueError("c must be positive")
    if region.sentinel == EMPTY:
        return FcValue.of(c, 0.0, 0.0)
    if region.sentinel == FULL:
        return FcValue.of(c, 0.0, region.surface.total_area)
    return FcValue.of(c, region_length(region), region_area(region))


@dataclass(frozen=True)
class NormalSpeed:
    """Speed k - c along the inward normal at each vertex of every component."""

    speed: np.ndarray
    normal: np.ndarray
    weights: np.ndarray
    k: np.ndarray

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.speed**2 * self.weights)))


def fc_gradient(region: Region, c: float) -> NormalSpeed:
    profiles = [curvature_profile(b) for b in region.boundaries]
    k = np.concatenate([p.k for p in profiles])
    return NormalSpeed(
        speed=k - c,
        normal=np.concatenate([p.normal for p in profiles]),
        weights=np.concatenate([p.ds for p in profiles]),
        k=k,
    )


def first_variation(region: Region, c: float, phi) -> float:
    """Rate of change of F_c when the boundary moves by phi along the inward
    normal: -sum phi_i (k_i - c) ds_i."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (region.n_vertices,):
        raise LengthMismatchError(f"phi has {phi.size} values for {region.n_vertices} vertices")
    if not np.any(phi):
        return 0.0
    g = fc_gradient(region, c)
    return float(-np.sum(phi * g.speed * g.weights))


def perturb(region: Region, phi, h: float) -> Region:
    """Move every boundary vertex by h * phi_i along its inward normal."""
    phi = np.asarray(phi, dtype=float)
    out = []
    start = 0
    for b in region.boundaries:
        out.append(displace(b, h * phi[start:start + b.n]))
        start += b.n
    return Region(region.surface, tuple(out))
