"""Sweepout families, their F_c profiles and width estimates.

A sweepout is a map t -> region with slice(0) empty and slice(1) the whole
surface. The width estimate of one family is the maximum of F_c over its
slices; it is an upper bound for the min-max width, not the width itself.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .corners import round_corner
from .curve import DiscreteCurve, circle, detect_corners, displace, resample
from .errors import InfeasibleCError
from .flow import FlowConfig, run
from .functional import Region, eval_fc, region_area, region_length
from .oracle import latitude_curve, lens_feasible, lens_points, lens_sagitta
from .surface import PLANE, SPHERE, SurfaceMetric

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
ARGMAX_BRACKET = 1e-4


@dataclass(frozen=True, eq=False)
class SweepoutFamily:
    surface: SurfaceMetric
    slice: Callable[[float], Region]
    label: str
    breakpoints: tuple[float, ...] = ()

    def __call__(self, t: float) -> Region:
        if t <= 0.0:
            return Region.empty(self.surface)
        if t >= 1.0:
            return Region.full(self.surface)
        return self.slice(t)


@dataclass(frozen=True)
class ProfilePoint:
    t: float
    F_c: float
    length: float
    area: float


@dataclass(frozen=True)
class ReflowReport:
    delta: float
    margin: float
    base_value: float
    start_values: tuple[float, float]   # inward, outward
    final_values: tuple[float, float]
    reasons: tuple[str, str]
    rounded: bool

    @property
    def descends(self) -> tuple[bool, bool]:
        thr = self.base_value - self.delta**2 * self.margin
        return tuple(bool(v < thr) for v in self.final_values)


@dataclass(frozen=True)
class WidthEstimate:
    c: float
    n_slices: int
    profile: tuple[ProfilePoint, ...]
    t_star: float
    value: float
    reflow: ReflowReport | None = None

    def values(self) -> np.ndarray:
        return np.array([p.F_c for p in self.profile])

    def lipschitz_modulus(self) -> float:
        """Largest |dF/dt| between adjacent profile samples."""
        t = np.array([p.t for p in self.profile])
        F = self.values()
        ok = np.isfinite(F)
        t, F = t[ok], F[ok]
        dt = np.diff(t)
        keep = dt > 0
        return float(np.max(np.abs(np.diff(F)[keep] / dt[keep]))) if np.any(keep) else 0.0


def _point(family: SweepoutFamily, c: float, t: float) -> ProfilePoint:
    region = family(t)
    if region.sentinel is not None:
        v = eval_fc(region, c)
        return ProfilePoint(t, v.value, v.length_term, v.area_term)
    L = region_length(region)
    A = region_area(region)
    return ProfilePoint(t, L - c * A, L, A)


def eval_family(family: SweepoutFamily, c: float, n_slices: int = 64,
                workers: int | None = None) -> WidthEstimate:
    """F_c on a uniform grid (plus the family's breakpoints), refined by golden
    section around the best sample until the argmax bracket is below 1e-4."""
    if n_slices < 16:
        raise ValueError("n_slices must be at least 16")
    grid = set(np.linspace(0.0, 1.0, n_slices).tolist()) | set(family.breakpoints)
    ts = sorted(grid)
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            pts = list(pool.map(lambda t: _point(family, c, t), ts))
    else:
        pts = [_point(family, c, t) for t in ts]
    samples = {p.t: p for p in pts}
    F = np.array([p.F_c for p in pts])
    k = int(np.nanargmax(F))
    lo = ts[max(k - 1, 0)]
    hi = ts[min(k + 1, len(ts) - 1)]

    def f(t):
        if t not in samples:
            samples[t] = _point(family, c, t)
        return samples[t].F_c

    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > ARGMAX_BRACKET:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    profile = tuple(samples[t] for t in sorted(samples))
    best = max(profile, key=lambda p: -math.inf if math.isnan(p.F_c) else p.F_c)
    return WidthEstimate(c, n_slices, profile, best.t, best.F_c)


# --------------------------------------------------------------------------
# families


def latitude_family(sphere: SurfaceMetric, n_points: int = 512) -> SweepoutFamily:
    """Caps below height z = (2t - 1) R."""
    if sphere.kind != SPHERE:
        raise ValueError("latitude family needs the sphere")
    R = sphere.radius

    def slice_(t: float) -> Region:
        return Region.bounded_by(latitude_curve(sphere, (2.0 * t - 1.0) * R, n_points, "below"))

    return SweepoutFamily(sphere, slice_, "latitude")


def disk_family(surface: SurfaceMetric, r_max: float, n_points: int = 256,
                center=(0.0, 0.0)) -> SweepoutFamily:
    """Disks of radius t * r_max in the plane (slice(1) is the whole plane)."""
    if surface.kind != PLANE:
        raise ValueError("disk family is defined in the plane")

    def slice_(t: float) -> Region:
        return Region.bounded_by(circle(surface, center, t * r_max, n_points))

    return SweepoutFamily(surface, slice_, "disk")


def _vertical_arc(torus: SurfaceMetric, x0: float, kappa: float, bulge: float, n: int,
                  upward: bool) -> np.ndarray:
    """Closed vertical loop: arc of curvature kappa from (x0, 0) to (x0, H)
    bulging toward ``bulge`` (+1 right, -1 left); n points, endpoint omitted."""
    H = torus.side_H
    u = np.arange(n) / n
    if kappa <= 1e-12:
        pts = np.column_stack([np.full(n, x0), H * u])
    else:
        rad = 1.0 / kappa
        d = math.sqrt(rad * rad - H * H / 4.0)
        half = math.asin(min(1.0, H / (2.0 * rad)))
        a = -half + 2.0 * half * u
        xc = x0 - bulge * d
        pts = np.column_stack([xc + bulge * rad * np.cos(a), H / 2.0 + rad * np.sin(a)])
    if not upward:
        pts = np.vstack([pts[:1], pts[:0:-1]])
    return pts


def _band(torus: SurfaceMetric, xc: float, half_width: float, kappa: float, n: int,
          complement: bool) -> Region:
    """Region between two vertical loops at xc -/+ half_width, each bulging
    away from xc with curvature kappa (toward the band); the complement of
    that band when ``complement`` is set."""
    right = DiscreteCurve(torus, _vertical_arc(torus, xc + half_width, kappa, +1, n, True))
    left = DiscreteCurve(torus, _vertical_arc(torus, xc - half_width, kappa, -1, n, False))
    if complement:
        right, left = right.flipped(), left.flipped()
    return Region(torus, (right, left))


def _lens_region(torus: SurfaceMetric, xc: float, scale: float, c: float, n: int,
                 complement: bool) -> Region:
    H = torus.side_H
    pts = lens_points(torus, c / scale, scale * H, (xc, H / 2.0), n)
    curve = DiscreteCurve(torus, pts)
    return Region.bounded_by(curve.flipped() if complement else curve)


def lens_family(torus: SurfaceMetric, c: float, n_points: int = 1024) -> SweepoutFamily:
    """Sweepout through the lens G_c at t = 1/3.

    * (0, 1/3]: the lens scaled by 3t about the centre of the vertical
      geodesic x = L/2 (chord 3tH, curvature c/(3t));
    * [1/3, 1/2]: the two arcs slide apart by up to u1 while their curvature
      drops from c to 0 (a band bounded by two vertical loops);
    * [1/2, 2/3]: a straight band widening until its complement is a band of
      half width u1 about x = 0;
    * [2/3, 5/6]: the complementary band bends back into a lens about x = 0;
    * [5/6, 1): the complementary lens shrinks to a point.
    """
    if not lens_feasible(torus, c):
        raise InfeasibleCError(f"c = {c} admits no lens on torus {torus.params()}")
    L, H = torus.side_L, torus.side_H
    u1 = 0.5 * (L / 2.0 - lens_sagitta(c, H))
    xm = L / 2.0
    half_n = max(n_points // 2, 8)

    def slice_(t: float) -> Region:
        if t <= 1.0 / 3.0:
            return _lens_region(torus, xm, 3.0 * t, c, n_points, False)
        if t <= 0.5:
            s = 6.0 * (t - 1.0 / 3.0)
            return _band(torus, xm, s * u1, c * (1.0 - s), half_n, False)
        if t <= 2.0 / 3.0:
            s = 6.0 * (t - 0.5)
            return _band(torus, xm, u1 + s * (L / 2.0 - 2.0 * u1), 0.0, half_n, False)
        if t <= 5.0 / 6.0:
            s = 1.0 - 6.0 * (t - 2.0 / 3.0)
            return _band(torus, 0.0, s * u1, c * (1.0 - s), half_n, True)
        s = 1.0 - 6.0 * (t - 5.0 / 6.0)
        return _lens_region(torus, 0.0, s, c, n_points, True)

    return SweepoutFamily(torus, slice_, "lens", (1.0 / 3.0, 0.5, 2.0 / 3.0, 5.0 / 6.0))


# --------------------------------------------------------------------------
# saddle probe


def _prepare(curve: DiscreteCurve, c: float, eps: float, n_target: int) -> tuple[DiscreteCurve, bool]:
    """Round every corner visit inward, then resample to about n_target points."""
    rounded = False
    while True:
        cc = detect_corners(curve)
        if not cc.corners:
            break
        curve, _ = round_corner(cc, 0, eps, c, visit=0)
        rounded = True
    L = float(np.sum(curve.segment_lengths()))
    spacing = L / n_target
    method = "linear" if rounded else "spline"
    return resample(curve, spacing, method=method), rounded


def perturb_and_reflow(family: SweepoutFamily, c: float, t_star: float, config: FlowConfig,
                       delta: float = 1e-2, margin: float = 1.0, eps: float = 0.05,
                       n_points: int = 256, estimate: WidthEstimate | None = None) -> WidthEstimate:
    """Check that the top slice is a saddle: push its boundary by +/- delta
    along the normal, run the c-flow from both sides and compare with the top
    value. Corners are rounded first (the flow cannot start from a corner).

    The reference value is the larger of F_c on the slice and on the prepared
    curve, so a coarser resampling cannot make the descent look easier."""
    if not 0.0 < t_star < 1.0:
        raise ValueError("t_star must be interior")
    region = family(t_star)
    curve, rounded = _prepare(region.boundary, c, eps, n_points)
    base = max(eval_fc(region, c).value, eval_fc(Region.bounded_by(curve), c).value)
    cfg = replace(config, c=c)
    starts, finals, reasons = [], [], []
    for sign in (+1.0, -1.0):
        moved = displace(curve, np.full(curve.n, sign * delta))
        res = run(moved, cfg)
        starts.append(res.records[0].F_c)
        F = res.F_values
        F = F[np.isfinite(F)]
        finals.append(float(F[-1]) if F.size else math.nan)
        reasons.append(res.reason)
    report = ReflowReport(delta, margin, base, tuple(starts), tuple(finals), tuple(reasons), rounded)
    if estimate is None:
        estimate = WidthEstimate(c, 0, (), t_star, base)
    return replace(estimate, reflow=report)
