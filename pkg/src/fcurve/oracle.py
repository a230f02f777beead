"""Closed-form reference data.

* the lens curve on a rectangular flat torus: two arcs of radius 1/c through
  the endpoints of the vertical closed geodesic x = L/2, with exact length,
  area and F_c;
* the doubled vertical geodesic;
* latitude circles on the round sphere and the height f(c) at which their
  geodesic curvature equals c;
* the radius ODE dr/dt = c - 1/r of a round circle under the plane c-flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .curve import DiscreteCurve, detect_corners
from .errors import InfeasibleCError
from .functional import Region, first_variation
from .surface import SPHERE, TORUS, SurfaceMetric


# --------------------------------------------------------------------------
# torus lens


def _check_torus(torus: SurfaceMetric) -> None:
    if torus.kind != TORUS:
        raise ValueError("lens constructions need a flat torus")


def lens_sagitta(c: float, chord: float) -> float:
    """Bulge of a circular arc of curvature c over a chord."""
    if c == 0:
        return 0.0
    rad = 1.0 / c
    return rad - math.sqrt(max(rad * rad - chord * chord / 4.0, 0.0))


def lens_feasible(torus: SurfaceMetric, c: float) -> bool:
    _check_torus(torus)
    H = torus.side_H
    return c > 0 and c * H <= 2.0 and 2.0 * lens_sagitta(c, H) < torus.side_L


def lens_exact(c: float, chord: float = 1.0) -> tuple[float, float, float]:
    """(length, area, F_c) of the lens bounded by two arcs of curvature c over
    a common chord; for chord 1 the length is (4/c) arcsin(c/2)."""
    half = c * chord / 2.0
    if not 0 < half <= 1:
        raise InfeasibleCError(f"no arc of curvature {c} spans a chord of {chord}")
    ang = math.asin(half)
    length = 4.0 * ang / c
    area = (2.0 / (c * c)) * (ang - half * math.sqrt(1.0 - half * half))
    return length, area, length - c * area


def lens_points(
    torus: SurfaceMetric,
    curvature: float,
    chord: float,
    center: tuple[float, float],
    n: int,
) -> np.ndarray:
    """Vertices of a lens traversed counterclockwise from its bottom tip.

    The right arc runs bottom -> top, the left arc top -> bottom; both tips
    are vertices and the two arcs get n/2 points each.
    """
    x0, y0 = center
    rad = 1.0 / curvature
    d = math.sqrt(max(rad * rad - chord * chord / 4.0, 0.0))
    half_ang = math.asin(min(1.0, chord / (2.0 * rad)))
    m = n // 2
    u = np.arange(m) / m
    # right arc: centre (x0 - d, y0), angle from -half_ang up to +half_ang
    a = -half_ang + 2.0 * half_ang * u
    right = np.column_stack([x0 - d + rad * np.cos(a), y0 + rad * np.sin(a)])
    # left arc: centre (x0 + d, y0), angle from pi - half_ang to pi + half_ang
    b = math.pi - half_ang + 2.0 * half_ang * u
    left = np.column_stack([x0 + d + rad * np.cos(b), y0 + rad * np.sin(b)])
    return np.vstack([right, left])


@dataclass(frozen=True, eq=False)
class LensCurve:
    torus: SurfaceMetric
    c: float
    radius: float
    centers: tuple[np.ndarray, np.ndarray]
    crossing: np.ndarray
    curve: DiscreteCurve
    exact_length: float
    exact_area: float
    exact_fc: float

    @property
    def region(self) -> Region:
        return Region.bounded_by(self.curve)


def lens_curve(torus: SurfaceMetric, c: float, n_points: int = 4096) -> LensCurve:
    _check_torus(torus)
    if not lens_feasible(torus, c):
        raise InfeasibleCError(f"c = {c} admits no lens on torus {torus.params()}")
    L, H = torus.side_L, torus.side_H
    x0, y0 = L / 2.0, H / 2.0
    pts = lens_points(torus, c, H, (x0, y0), n_points)
    d = math.sqrt(1.0 / c**2 - H * H / 4.0)
    length, area, fc = lens_exact(c, H)
    return LensCurve(
        torus=torus,
        c=c,
        radius=1.0 / c,
        centers=(np.array([x0 - d, y0]), np.array([x0 + d, y0])),
        crossing=np.array([x0, 0.0]),
        curve=DiscreteCurve(torus, pts),
        exact_length=length,
        exact_area=area,
        exact_fc=fc,
    )


@dataclass(frozen=True)
class LensSingularity:
    line_angle: float
    k_before: float
    k_after: float
    n_corners: int


def lens_singularity_check(lens: LensCurve, offset: int = 4) -> LensSingularity:
    """Tangent-line angle at the crossing point and curvature on either side of
    it along the C^{1,1} branch (right arc upward, then left arc upward)."""
    curve = lens.curve
    cc = detect_corners(curve)
    corner = cc.corners[0]
    from .curve import menger_curvature

    n = curve.n
    top = n // 2
    p = curve.points
    # approaching the crossing along the right arc, region orientation = branch orientation
    j = top - offset
    k_before = float(menger_curvature(curve.surface, p[j - 1], p[j], p[j + 1]))
    # leaving it along the left arc traversed upward, i.e. against the region orientation
    j = n - offset
    k_after = -float(menger_curvature(curve.surface, p[j - 1], p[j], p[(j + 1) % n]))
    return LensSingularity(corner.line_angle(), k_before, k_after, len(cc.corners))


@dataclass(frozen=True)
class DoubledGeodesic:
    """The vertical closed geodesic x = L/2 taken twice; it encloses no area,
    so its F_c value is twice its length for every c."""

    torus: SurfaceMetric
    x: float
    loop_length: float

    @property
    def length(self) -> float:
        return 2.0 * self.loop_length

    def fc(self, c: float | None = None) -> float:
        return self.length

    def loop_points(self, n: int) -> np.ndarray:
        y = self.torus.side_H * np.arange(n) / n
        return np.column_stack([np.full(n, self.x), y])


def doubled_geodesic(torus: SurfaceMetric) -> DoubledGeodesic:
    _check_torus(torus)
    return DoubledGeodesic(torus, torus.side_L / 2.0, torus.side_H)


# --------------------------------------------------------------------------
# sphere latitudes


def latitude_curve(sphere: SurfaceMetric, height: float, n: int, region: str = "below") -> DiscreteCurve:
    """Latitude circle at ambient height ``height`` in (-R, R), bounding the cap
    below or above it."""
    if sphere.kind != SPHERE:
        raise ValueError("latitudes live on the sphere")
    z = height / sphere.radius
    rho = math.sqrt(max(1.0 - z * z, 0.0))
    ang = 2.0 * math.pi * np.arange(n) / n
    # counterclockwise seen from above puts the northern cap on the left
    pts = np.column_stack([rho * np.cos(ang), rho * np.sin(ang), np.full(n, z)])
    side = 1 if region == "above" else -1
    curve = DiscreteCurve(sphere, pts, side)
    return curve.reversed() if side == -1 else curve


def latitude_curvature(sphere: SurfaceMetric, height: float) -> float:
    """Geodesic curvature of the latitude at ``height`` relative to the cap below."""
    R = sphere.radius
    return -height / (R * math.sqrt(R * R - height * height))


@dataclass(frozen=True)
class LatitudeData:
    f_c: float
    stationary_height: float
    first_variation_residual: float


def sphere_latitude_fraction(c: float, radius: float = 1.0) -> float:
    """f(c): height fraction z/R of the latitude whose curvature toward the
    northern cap equals c."""
    x = c * radius
    return x / math.sqrt(1.0 + x * x)


def sphere_latitude_data(radius: float, c: float, n_points: int = 8192) -> LatitudeData:
    if not c > 0:
        raise ValueError("c must be positive")
    from .surface import round_sphere

    sphere = round_sphere(radius)
    f = sphere_latitude_fraction(c, radius)
    z = -f * radius
    cap = Region.bounded_by(latitude_curve(sphere, z, n_points, "below"))
    residual = first_variation(cap, c, np.ones(n_points))
    return LatitudeData(f, z, abs(residual))


# --------------------------------------------------------------------------
# plane circles


@dataclass(frozen=True, eq=False)
class CircleODE:
    t: np.ndarray
    r: np.ndarray
    extinction_time: float | None
    _sol: object

    def radius(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        u = np.asarray(self._sol(t)).reshape(np.shape(t))
        r = np.sqrt(np.maximum(u, 0.0))
        if self.extinction_time is not None:
            r = np.where(t >= self.extinction_time, 0.0, r)
        return r


def plane_circle_ode(r0: float, c: float, t_end: float, rtol: float = 1e-12) -> CircleODE:
    """Radius of a plane circle under the c-flow, dr/dt = c - 1/r.

    Integrated in u = r^2 (u' = 2 c sqrt(u) - 2), which stays regular at
    extinction; the extinction time is located by an event on u = 0.
    """
    if not r0 > 0:
        raise ValueError("initial radius must be positive")

    def rhs(t, u):
        return [2.0 * c * math.sqrt(max(u[0], 0.0)) - 2.0]

    def hits_zero(t, u):
        return u[0]

    hits_zero.terminal = True
    hits_zero.direction = -1
    sol = solve_ivp(rhs, (0.0, t_end), [r0 * r0], method="DOP853", rtol=rtol, atol=1e-14,
                    dense_output=True, events=hits_zero)
    t_ext = float(sol.t_events[0][0]) if len(sol.t_events[0]) else None
    return CircleODE(sol.t, np.sqrt(np.maximum(sol.y[0], 0.0)), t_ext, sol.sol)


def circle_extinction_time(r0: float, c: float) -> float:
    """Closed form for r0 < 1/c: integral of r / (1 - c r) from 0 to r0."""
    if c == 0:
        return r0 * r0 / 2.0
    return -r0 / c - math.log(1.0 - c * r0) / (c * c)
