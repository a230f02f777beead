"""Model surfaces: the Euclidean plane, rectangular flat tori and round spheres.

Points on the plane and torus are 2-vectors (torus points reduced to the
fundamental domain ``[0, L) x [0, H)``). Points on the sphere are unit
3-vectors in ambient coordinates; lengths are scaled by the radius.

The vectorized helpers ``log_map``, ``exp_map``, ``tangent_cross`` and
``rotate_left`` let the curve code treat the three surfaces uniformly:
tangent vectors live in the ambient space (2D or 3D) and are measured in the
true metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RadiusTooLargeError

PLANE = "plane"
TORUS = "torus"
SPHERE = "sphere"

# Relative safety margin on the sphere distortion bound.
ALPHA_MARGIN = 0.10


@dataclass(frozen=True)
class SurfaceMetric:
    kind: str
    side_L: float = 1.0
    side_H: float = 1.0
    radius: float = 1.0

    def __post_init__(self):
        if self.kind not in (PLANE, TORUS, SPHERE):
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if self.side_L <= 0 or self.side_H <= 0 or self.radius <= 0:
            raise ValueError("surface dimensions must be positive")

    @property
    def dim(self) -> int:
        return 3 if self.kind == SPHERE else 2

    @property
    def is_flat(self) -> bool:
        return self.kind != SPHERE

    @property
    def total_area(self) -> float:
        if self.kind == PLANE:
            return math.inf
        if self.kind == TORUS:
            return self.side_L * self.side_H
        return 4.0 * math.pi * self.radius**2

    @property
    def injectivity_radius(self) -> float:
        if self.kind == PLANE:
            return math.inf
        if self.kind == TORUS:
            return min(self.side_L, self.side_H) / 2.0
        return math.pi * self.radius

    def params(self) -> dict:
        if self.kind == TORUS:
            return {"side_L": self.side_L, "side_H": self.side_H}
        if self.kind == SPHERE:
            return {"radius": self.radius}
        return {}


def plane() -> SurfaceMetric:
    return SurfaceMetric(PLANE)


def flat_torus(side_L: float, side_H: float = 1.0) -> SurfaceMetric:
    return SurfaceMetric(TORUS, side_L=float(side_L), side_H=float(side_H))


def round_sphere(radius: float = 1.0) -> SurfaceMetric:
    return SurfaceMetric(SPHERE, radius=float(radius))


def _wrap(metric: SurfaceMetric, pts: np.ndarray) -> np.ndarray:
    box = np.array([metric.side_L, metric.side_H])
    out = np.mod(pts, box)
    # np.mod can return exactly the period for tiny negative inputs
    out = np.where(out >= box, out - box, out)
    return out


def _min_image(metric: SurfaceMetric, d: np.ndarray) -> np.ndarray:
    box = np.array([metric.side_L, metric.side_H])
    return d - box * np.round(d / box)


def reduce_points(metric: SurfaceMetric, pts) -> np.ndarray:
    """Canonical storage form: torus points wrapped, sphere points normalized."""
    pts = np.array(pts, dtype=float)
    if pts.shape[-1] != metric.dim:
        raise ValueError(f"expected points of dimension {metric.dim}, got {pts.shape}")
    if metric.kind == TORUS:
        return _wrap(metric, pts)
    if metric.kind == SPHERE:
        return pts / np.linalg.norm(pts, axis=-1, keepdims=True)
    return pts


def log_map(metric: SurfaceMetric, base, pts) -> np.ndarray:
    """Tangent vector at ``base`` pointing to ``pts`` with length equal to the
    geodesic distance (ambient coordinates, broadcasting over leading axes)."""
    base = np.asarray(base, dtype=float)
    pts = np.asarray(pts, dtype=float)
    if metric.kind == PLANE:
        return pts - base
    if metric.kind == TORUS:
        return _min_image(metric, pts - base)
    cos_rho = np.sum(base * pts, axis=-1, keepdims=True)
    w = pts - cos_rho * base
    sin_rho = np.linalg.norm(w, axis=-1, keepdims=True)
    rho = np.arctan2(sin_rho, cos_rho)
    scale = np.divide(rho, sin_rho, out=np.ones_like(rho), where=sin_rho > 0)
    return metric.radius * scale * w


def exp_map(metric: SurfaceMetric, base, v) -> np.ndarray:
    base = np.asarray(base, dtype=float)
    v = np.asarray(v, dtype=float)
    if metric.kind == PLANE:
        return base + v
    if metric.kind == TORUS:
        return _wrap(metric, base + v)
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    rho = norm / metric.radius
    direction = np.divide(v, norm, out=np.zeros_like(v), where=norm > 0)
    out = np.cos(rho) * base + np.sin(rho) * direction
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def distance(metric: SurfaceMetric, a, b) -> np.ndarray:
    return np.linalg.norm(log_map(metric, a, b), axis=-1)


def tangent_cross(metric: SurfaceMetric, base, u, v) -> np.ndarray:
    """Oriented 2D cross product of tangent vectors u, v at ``base``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if metric.kind != SPHERE:
        return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    return np.sum(np.asarray(base) * np.cross(u, v), axis=-1)


def rotate_left(metric: SurfaceMetric, base, v) -> np.ndarray:
    """Rotate tangent vectors by +90 degrees (counterclockwise seen from outside)."""
    v = np.asarray(v, dtype=float)
    if metric.kind != SPHERE:
        return np.stack([-v[..., 1], v[..., 0]], axis=-1)
    return np.cross(np.asarray(base, dtype=float), v)


def tangent_frame(metric: SurfaceMetric, p) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis (e1, e2) of the tangent plane at a single point."""
    if metric.kind != SPHERE:
        return np.array([1.0, 0.0]), np.array([0.0, 1.0])
    p = np.asarray(p, dtype=float)
    axis = np.zeros(3)
    axis[np.argmin(np.abs(p))] = 1.0
    e1 = axis - np.dot(axis, p) * p
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(p, e1)
    return e1, e2


def gaussian_curvature(metric: SurfaceMetric, p=None) -> float:
    if metric.kind == SPHERE:
        return 1.0 / metric.radius**2
    return 0.0


@dataclass(frozen=True)
class ChartFrame:
    """Normal-coordinate chart of the ball B_r(center), rescaled to the unit disk."""

    metric: SurfaceMetric
    center: np.ndarray
    r: float
    e1: np.ndarray = field(repr=False)
    e2: np.ndarray = field(repr=False)

    def forward(self, pts) -> np.ndarray:
        v = log_map(self.metric, self.center, pts)
        return np.stack([v @ self.e1, v @ self.e2], axis=-1) / self.r

    def backward(self, uv) -> np.ndarray:
        uv = np.asarray(uv, dtype=float) * self.r
        v = uv[..., :1] * self.e1 + uv[..., 1:2] * self.e2
        base = np.broadcast_to(self.center, v.shape)
        return exp_map(self.metric, base, v)

    def tangent_to_chart(self, v) -> np.ndarray:
        """Express a tangent vector at the center in (unscaled) chart axes."""
        v = np.asarray(v, dtype=float)
        return np.stack([v @ self.e1, v @ self.e2], axis=-1)

    def chart_to_tangent(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return w[..., :1] * self.e1 + w[..., 1:2] * self.e2

    @property
    def alpha(self) -> float:
        return chart_distortion_bound(self)


def exp_chart(metric: SurfaceMetric, center, r: float) -> ChartFrame:
    if not r > 0:
        raise ValueError("chart radius must be positive")
    if not r < metric.injectivity_radius:
        raise RadiusTooLargeError(
            f"chart radius {r} not below injectivity radius {metric.injectivity_radius}"
        )
    center = reduce_points(metric, center)
    e1, e2 = tangent_frame(metric, center)
    return ChartFrame(metric, center, float(r), e1, e2)


def chart_distortion_bound(chart: ChartFrame, c: float | None = None) -> float:
    """Certified distortion alpha(r) of the rescaled chart.

    In geodesic polar coordinates the sphere metric is d rho^2 + (R sin(rho/R))^2
    d phi^2, so lengths and areas are distorted by at most 1 - sin(x)/x <= x^2/6
    with x = r/R. Flat charts are exact.
    """
    if chart.metric.is_flat:
        return 0.0
    x = chart.r / chart.metric.radius
    return (1.0 + ALPHA_MARGIN) * x * x / 6.0


def surface_from_dict(d: dict) -> SurfaceMetric:
    kind = d["kind"]
    params = d.get("params", {}) or {}
    if kind == TORUS:
        return flat_torus(params["side_L"], params.get("side_H", 1.0))
    if kind == SPHERE:
        return round_sphere(params.get("radius", 1.0))
    if kind == PLANE:
        return plane()
    raise ValueError(f"unknown surface kind {kind!r}")


def surface_to_dict(metric: SurfaceMetric) -> dict:
    return {"kind": metric.kind, "params": metric.params()}

