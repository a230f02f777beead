"""Closed polygonal curves on a model surface.

A :class:`DiscreteCurve` is a cyclic list of surface points plus a ``side``
flag: ``side=+1`` means the bounded region lies to the left of travel,
``side=-1`` that it lies to the right. Flipping the flag keeps the points and
swaps the region for its complement.

Curvature uses the Menger (circumscribed circle) curvature of each vertex and
its two neighbours, measured in the normal-coordinate chart at the vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .errors import (
    DegenerateSpacingError,
    NonContractibleError,
    NoTouchError,
    NotNestedError,
    SelfIntersectionError,
    SpacingTooCoarseError,
    UnboundedRegionError,
)
from .surface import (
    PLANE,
    SPHERE,
    TORUS,
    SurfaceMetric,
    _min_image,
    _wrap,
    exp_map,
    log_map,
    reduce_points,
    rotate_left,
    tangent_cross,
    tangent_frame,
)

MIN_POINTS = 8
MAX_SPACING_RATIO = 4.0
MIN_SPACING = 1e-10
DEFAULT_CORNER_THRESHOLD = 0.3


@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    surface: SurfaceMetric
    points: np.ndarray
    side: int = 1

    def __post_init__(self):
        pts = reduce_points(self.surface, self.points)
        if pts.ndim != 2 or len(pts) < MIN_POINTS:
            raise ValueError(f"a closed curve needs at least {MIN_POINTS} points")
        if self.side not in (1, -1):
            raise ValueError("side must be +1 (region on the left) or -1")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def orientation(self) -> str:
        return "left" if self.side == 1 else "right"

    def forward_vectors(self) -> np.ndarray:
        """Tangent vector at p_i pointing to p_{i+1}."""
        p = self.points
        return log_map(self.surface, p, np.roll(p, -1, axis=0))

    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.forward_vectors(), axis=-1)

    def spacing_ratio(self) -> float:
        seg = self.segment_lengths()
        return float(seg.max() / seg.min())

    def check_invariants(self) -> None:
        seg = self.segment_lengths()
        if seg.min() < MIN_SPACING:
            raise DegenerateSpacingError("consecutive points coincide")
        if seg.max() / seg.min() > MAX_SPACING_RATIO:
            raise ValueError(f"spacing ratio {seg.max() / seg.min():.3g} exceeds {MAX_SPACING_RATIO}")

    def flipped(self) -> "DiscreteCurve":
        return DiscreteCurve(self.surface, self.points, -self.side)

    def reversed(self) -> "DiscreteCurve":
        """Same region, opposite direction of travel."""
        return DiscreteCurve(self.surface, self.points[::-1], -self.side)

    def with_points(self, points) -> "DiscreteCurve":
        return DiscreteCurve(self.surface, points, self.side)


@dataclass(frozen=True)
class CurvatureProfile:
    s: np.ndarray          # arclength coordinate of each vertex
    ds: np.ndarray         # vertex-centred trapezoid weights
    seg: np.ndarray        # length of segment i -> i+1
    k: np.ndarray          # signed geodesic curvature, positive toward the region
    normal: np.ndarray     # unit normal pointing into the region
    tangent: np.ndarray    # unit tangent in the direction of travel

    @property
    def length(self) -> float:
        return float(self.seg.sum())


def menger_curvature(surface: SurfaceMetric, prev, mid, nxt) -> np.ndarray:
    """Signed curvature (left turns positive) of the circle through three points,
    measured in the chart centred at ``mid``."""
    back = log_map(surface, mid, prev)
    fwd = log_map(surface, mid, nxt)
    a = np.linalg.norm(back, axis=-1)
    b = np.linalg.norm(fwd, axis=-1)
    chord = np.linalg.norm(fwd - back, axis=-1)
    cross = tangent_cross(surface, mid, -back, fwd)
    return 2.0 * cross / (a * b * chord)


def curvature_profile(curve: DiscreteCurve) -> CurvatureProfile:
    S = curve.surface
    p = curve.points
    back = log_map(S, p, np.roll(p, 1, axis=0))
    fwd = log_map(S, p, np.roll(p, -1, axis=0))
    a = np.linalg.norm(back, axis=-1)
    b = np.linalg.norm(fwd, axis=-1)
    if min(a.min(), b.min()) < MIN_SPACING:
        raise DegenerateSpacingError("consecutive points closer than 1e-10")
    diff = fwd - back
    chord = np.linalg.norm(diff, axis=-1)
    if chord.min() < MIN_SPACING:
        raise DegenerateSpacingError("curve folds back on itself")
    k_left = 2.0 * tangent_cross(S, p, -back, fwd) / (a * b * chord)
    tangent = diff / chord[:, None]
    n_left = rotate_left(S, p, tangent)
    s = np.concatenate([[0.0], np.cumsum(b[:-1])])
    ds = 0.5 * (a + b)
    return CurvatureProfile(
        s=s, ds=ds, seg=b, k=curve.side * k_left, normal=curve.side * n_left, tangent=tangent
    )


def length(curve: DiscreteCurve) -> float:
    return float(curve.segment_lengths().sum())


def lift(curve: DiscreteCurve) -> tuple[np.ndarray, np.ndarray]:
    """Continuous planar lift (shortest representative per segment) and the
    closure vector, which is zero exactly when the lift closes up."""
    p = curve.points
    if curve.surface.kind == SPHERE:
        raise ValueError("sphere curves have no planar lift")
    fwd = curve.forward_vectors()
    lifted = p[0] + np.concatenate([np.zeros((1, 2)), np.cumsum(fwd[:-1], axis=0)])
    closure = fwd.sum(axis=0)
    return lifted, closure


def is_contractible(curve: DiscreteCurve) -> bool:
    if curve.surface.kind != TORUS:
        return True
    _, closure = lift(curve)
    return bool(np.linalg.norm(closure) < 1e-9 * max(curve.surface.side_L, curve.surface.side_H))


def _shoelace(xy: np.ndarray) -> float:
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def turning_angles(curve: DiscreteCurve) -> np.ndarray:
    """Exterior angle at each vertex, left turns positive (direction of travel)."""
    S = curve.surface
    p = curve.points
    e0 = -log_map(S, p, np.roll(p, 1, axis=0))
    e1 = log_map(S, p, np.roll(p, -1, axis=0))
    return np.arctan2(tangent_cross(S, p, e0, e1), np.sum(e0 * e1, axis=-1))


def enclosed_area(curve: DiscreteCurve, check_embedded: bool = True) -> float:
    """Area of the region bounded by the curve (on the side given by ``side``)."""
    S = curve.surface
    if S.kind == TORUS and not is_contractible(curve):
        raise NonContractibleError("curve does not bound a disk in the torus")
    if check_embedded and crossing_count(curve) > 0:
        raise SelfIntersectionError("curve segments cross")
    if S.kind == PLANE:
        area = curve.side * _shoelace(curve.points)
        if area <= 0:
            raise UnboundedRegionError("region on that side of a plane curve is unbounded")
        return area
    if S.kind == TORUS:
        lifted, _ = lift(curve)
        signed = _shoelace(lifted)
        left = signed if signed > 0 else S.total_area + signed
        return left if curve.side == 1 else S.total_area - left
    left = S.radius**2 * (2.0 * math.pi - float(turning_angles(curve).sum()))
    return left if curve.side == 1 else S.total_area - left


def _segment_endpoints(curve: DiscreteCurve):
    S = curve.surface
    p = curve.points
    if S.kind == SPHERE:
        a = p
        b = np.roll(p, -1, axis=0)
        mid = a + b
        mid /= np.linalg.norm(mid, axis=-1, keepdims=True)
        return a, b, mid, np.linalg.norm(b - a, axis=-1)
    fwd = curve.forward_vectors()
    mid = p + 0.5 * fwd
    if S.kind == TORUS:
        mid = _wrap(S, mid)
    return fwd, None, mid, np.linalg.norm(fwd, axis=-1)


def crossing_count(curve: DiscreteCurve) -> int:
    """Number of pairs of non-adjacent segments that cross transversally.

    Segments that merely touch (for example at a shared vertex where two
    visits of the same surface point meet) are not counted.
    """
    S = curve.surface
    n = curve.n
    first, second, mid, seg = _segment_endpoints(curve)
    radius = float(seg.max()) * 1.0001
    if S.kind == TORUS:
        tree = cKDTree(mid, boxsize=[S.side_L, S.side_H])
    else:
        tree = cKDTree(mid)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    if len(pairs) == 0:
        return 0
    i, j = pairs[:, 0], pairs[:, 1]
    gap = (j - i) % n
    keep = (gap > 1) & (gap < n - 1)
    i, j = i[keep], j[keep]
    if len(i) == 0:
        return 0
    if S.kind == SPHERE:
        A, B, C, D = first[i], second[i], first[j], second[j]

        def orient(x, y, z):
            return np.einsum("ij,ij->i", x, np.cross(y, z))
    else:
        fwd = first
        offset = mid[j] - mid[i]
        if S.kind == TORUS:
            offset = _min_image(S, offset)
        A = mid[i] - 0.5 * fwd[i]
        B = A + fwd[i]
        C = mid[i] + offset - 0.5 * fwd[j]
        D = C + fwd[j]

        def orient(x, y, z):
            u, v = y - x, z - x
            return u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    tol = 1e-12 * radius**2
    o = [orient(A, B, C), orient(A, B, D), orient(C, D, A), orient(C, D, B)]
    o = [np.where(np.abs(x) < tol, 0.0, x) for x in o]
    crossing = (o[0] * o[1] < 0) & (o[2] * o[3] < 0)
    return int(crossing.sum()) + _vertex_crossings(curve, 1e-9 * radius)


def _vertex_crossings(curve: DiscreteCurve, tol: float) -> int:
    """Count revisited vertices where the two local branches interleave
    (a transversal crossing) rather than touch."""
    S = curve.surface
    p = curve.points
    n = curve.n
    tree = cKDTree(p, boxsize=[S.side_L, S.side_H]) if S.kind == TORUS else cKDTree(p)
    pairs = tree.query_pairs(max(tol, 1e-14), output_type="ndarray")
    count = 0
    for i, j in pairs:
        if (j - i) % n in (1, n - 1):
            continue
        base = p[i]
        rays = log_map(S, base, p[[(i - 1) % n, (i + 1) % n, (j - 1) % n, (j + 1) % n]])
        ref = rays[0]
        ang = np.arctan2(tangent_cross(S, base, ref, rays), rays @ ref) % (2 * math.pi)
        lo, hi = 0.0, ang[1]
        inside = [(lo < a < hi) for a in ang[2:]]
        if inside[0] != inside[1]:
            count += 1
    return count


def is_embedded(curve: DiscreteCurve) -> bool:
    return crossing_count(curve) == 0


def _winding(vecs: np.ndarray, cross_fn) -> tuple[np.ndarray, np.ndarray]:
    """Winding number and signed chart area for rows of vectors (M, N, d)."""
    nxt = np.roll(vecs, -1, axis=1)
    cr = cross_fn(vecs, nxt)
    dt = np.sum(vecs * nxt, axis=-1)
    w = np.arctan2(cr, dt).sum(axis=1) / (2.0 * math.pi)
    return np.rint(w).astype(int), 0.5 * cr.sum(axis=1)


def contains(curve: DiscreteCurve, q, chunk: int = 256) -> np.ndarray:
    """Point-in-region test for the region bounded by the curve."""
    S = curve.surface
    q = reduce_points(S, np.atleast_2d(np.asarray(q, dtype=float)))
    p = curve.points
    out = np.empty(len(q), dtype=bool)

    def cross2(u, v):
        return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]

    if S.kind == TORUS:
        lifted, closure = lift(curve)
        if np.linalg.norm(closure) > 1e-9:
            raise NonContractibleError("point location needs a contractible curve")
        ccw = _shoelace(lifted) > 0
        shifts = np.array([(a * S.side_L, b * S.side_H) for a in range(-2, 3) for b in range(-2, 3)])
    elif S.kind == PLANE:
        ccw = _shoelace(p) > 0
    for start in range(0, len(q), chunk):
        qs = q[start:start + chunk]
        if S.kind == PLANE:
            w, _ = _winding(p[None, :, :] - qs[:, None, :], cross2)
            inside = (w == 1) | ((w == 0) & (not ccw))
        elif S.kind == TORUS:
            total = np.zeros(len(qs), dtype=int)
            for shift in shifts:
                w, _ = _winding(lifted[None, :, :] - (qs + shift)[:, None, :], cross2)
                total += w
            inside = (total == 1) | ((total == 0) & (not ccw))
        else:
            vecs = log_map(S, qs[:, None, :], p[None, :, :])
            base = qs[:, None, :]
            w, chart_area = _winding(vecs, lambda u, v: np.sum(base * np.cross(u, v), axis=-1))
            inside = (w == 1) | ((w == 0) & (chart_area < 0))
        out[start:start + chunk] = inside if curve.side == 1 else ~inside
    return out


def displace(curve: DiscreteCurve, amounts, profile: CurvatureProfile | None = None) -> DiscreteCurve:
    """Move each vertex by ``amounts[i]`` along the inward normal."""
    if profile is None:
        profile = curvature_profile(curve)
    amounts = np.asarray(amounts, dtype=float)
    return curve.with_points(exp_map(curve.surface, curve.points, amounts[:, None] * profile.normal))


def resample(curve: DiscreteCurve, target_spacing: float, method: str = "spline") -> DiscreteCurve:
    """Redistribute vertices at (nearly) uniform arclength spacing.

    ``method="spline"`` interpolates with a periodic cubic spline in the
    chord-length parameter; ``"linear"`` keeps the polygon (use for curves with
    corners).
    """
    S = curve.surface
    total = length(curve)
    if not 0 < target_spacing <= total / MIN_POINTS:
        raise SpacingTooCoarseError(
            f"target spacing {target_spacing} not in (0, length/{MIN_POINTS}]"
        )
    n_new = max(MIN_POINTS, int(round(total / target_spacing)))
    fwd = curve.forward_vectors()
    seg = np.linalg.norm(fwd, axis=-1)
    u = np.concatenate([[0.0], np.cumsum(seg)])
    u[-1] = total
    if S.kind == SPHERE:
        coords = np.vstack([curve.points, curve.points[:1]])
        drift = np.zeros(3)
    else:
        lifted, closure = lift(curve)
        coords = np.vstack([lifted, lifted[:1] + closure])
        drift = closure
    periodic = coords - np.outer(u / total, drift)
    periodic[-1] = periodic[0]
    s_new = np.arange(n_new) * (total / n_new)
    if method == "spline":
        new = CubicSpline(u, periodic, bc_type="periodic")(s_new)
    elif method == "linear":
        new = np.column_stack([np.interp(s_new, u, periodic[:, d]) for d in range(periodic.shape[1])])
    else:
        raise ValueError(f"unknown resampling method {method!r}")
    new = new + np.outer(s_new / total, drift)
    return curve.with_points(new)


# --------------------------------------------------------------------------
# corners and one-sided data


def _line_sine(a: np.ndarray, b: np.ndarray) -> float:
    cos = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return math.sqrt(max(0.0, 1.0 - cos * cos))


@dataclass(frozen=True)
class CornerVisit:
    index: int
    incoming: np.ndarray
    outgoing: np.ndarray
    theta: float
    k_minus: float
    k_plus: float


@dataclass(frozen=True)
class Corner:
    """A surface point where the curve turns sharply; a point visited twice
    (a crossing or touching point) carries two visits."""

    point: np.ndarray
    visits: tuple[CornerVisit, ...]

    @property
    def index(self) -> int:
        return self.visits[0].index

    @property
    def theta(self) -> float:
        return self.visits[0].theta

    @property
    def k_minus(self) -> float:
        return self.visits[0].k_minus

    @property
    def k_plus(self) -> float:
        return self.visits[0].k_plus

    def tangent_lines(self, tol: float = 0.05) -> list[np.ndarray]:
        lines: list[np.ndarray] = []
        for v in self.visits:
            for d in (v.incoming, v.outgoing):
                if not any(_line_sine(d, ell) < tol for ell in lines):
                    lines.append(d)
        return lines

    def line_angle(self) -> float:
        """Angle in [0, pi/2] between the first two distinct tangent lines."""
        lines = self.tangent_lines()
        if len(lines) < 2:
            return 0.0
        cosang = abs(float(np.dot(lines[0], lines[1])))
        return math.acos(min(1.0, cosang))


@dataclass(frozen=True)
class CorneredCurve:
    curve: DiscreteCurve
    corners: list[Corner]
    arcs: list[np.ndarray] = field(repr=False)

    def visit_indices(self) -> list[int]:
        return sorted(v.index for c in self.corners for v in c.visits)


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def one_sided_data(curve: DiscreteCurve, i: int) -> CornerVisit:
    """Incoming/outgoing tangents, interior angle and one-sided curvatures at
    vertex ``i`` from second-order one-sided stencils."""
    S = curve.surface
    p = curve.points
    n = curve.n
    pi = p[i]
    b1 = log_map(S, pi, p[(i - 1) % n])
    b2 = log_map(S, pi, p[(i - 2) % n])
    f1 = log_map(S, pi, p[(i + 1) % n])
    f2 = log_map(S, pi, p[(i + 2) % n])
    t_in = _unit(-4.0 * b1 + b2)
    t_out = _unit(4.0 * f1 - f2)
    turn = math.atan2(float(tangent_cross(S, pi, t_in, t_out)), float(np.dot(t_in, t_out)))
    theta = math.pi - curve.side * turn
    k_minus = curve.side * float(menger_curvature(S, p[(i - 2) % n], p[(i - 1) % n], pi))
    k_plus = curve.side * float(menger_curvature(S, pi, p[(i + 1) % n], p[(i + 2) % n]))
    return CornerVisit(i, t_in, t_out, theta, k_minus, k_plus)


def detect_corners(curve: DiscreteCurve, angle_threshold: float = DEFAULT_CORNER_THRESHOLD) -> CorneredCurve:
    S = curve.surface
    turn = turning_angles(curve)
    idx = np.flatnonzero(np.abs(turn) > angle_threshold)
    scale = float(curve.segment_lengths().min())
    groups: list[list[CornerVisit]] = []
    for i in idx:
        visit = one_sided_data(curve, int(i))
        for g in groups:
            if float(np.linalg.norm(log_map(S, curve.points[g[0].index], curve.points[i]))) < 1e-6 * scale:
                g.append(visit)
                break
        else:
            groups.append([visit])
    corners = [Corner(curve.points[g[0].index].copy(), tuple(g)) for g in groups]
    cuts = sorted(int(i) for i in idx)
    arcs: list[np.ndarray] = []
    if cuts:
        for a, b in zip(cuts, cuts[1:] + [cuts[0] + curve.n]):
            arcs.append(np.arange(a, b + 1) % curve.n)
    else:
        arcs.append(np.arange(curve.n + 1) % curve.n)
    return CorneredCurve(curve, corners, arcs)


@dataclass(frozen=True)
class TouchReport:
    theta_inner: float
    theta_outer: float
    k_minus_inner: float
    k_plus_inner: float
    k_minus_outer: float
    k_plus_outer: float
    violation: bool


def _nearest_vertex(curve: DiscreteCurve, q) -> tuple[int, float]:
    d = np.linalg.norm(log_map(curve.surface, q, curve.points), axis=-1)
    i = int(np.argmin(d))
    return i, float(d[i])


def touch_comparison(
    inner: DiscreteCurve,
    outer: DiscreteCurve,
    p,
    tol: float | None = None,
    angle_tol: float = 0.05,
    curvature_tol: float = 0.05,
) -> TouchReport:
    """Compare interior angles and one-sided curvatures of nested curves at a
    common boundary point; ``violation`` flags a breach of the comparison
    principle beyond the given tolerances."""
    S = inner.surface
    p = reduce_points(S, p)
    if tol is None:
        tol = 2.0 * max(inner.segment_lengths().max(), outer.segment_lengths().max())
    i, di = _nearest_vertex(inner, p)
    j, dj = _nearest_vertex(outer, p)
    if di > tol or dj > tol:
        raise NoTouchError(f"curves do not pass within {tol:g} of the point")
    near_outer = np.array([
        np.linalg.norm(log_map(S, q, outer.points), axis=-1).min() < tol for q in inner.points
    ])
    inside = contains(outer, inner.points)
    if not np.all(inside | near_outer):
        raise NotNestedError("inner region is not contained in the outer region")
    vi = one_sided_data(inner, i)
    vo = one_sided_data(outer, j)
    ktol_minus = curvature_tol * max(1.0, abs(vo.k_minus))
    ktol_plus = curvature_tol * max(1.0, abs(vo.k_plus))
    violation = vi.theta > vo.theta + angle_tol
    if abs(vi.theta - vo.theta) <= angle_tol:
        violation = violation or vi.k_minus < vo.k_minus - ktol_minus or vi.k_plus < vo.k_plus - ktol_plus
    return TouchReport(vi.theta, vo.theta, vi.k_minus, vi.k_plus, vo.k_minus, vo.k_plus, bool(violation))


# --------------------------------------------------------------------------
# simple constructors


def circle(surface: SurfaceMetric, center, radius: float, n: int, phase: float = 0.0,
           side: int = 1) -> DiscreteCurve:
    """Geodesic circle traversed counterclockwise (region = disk on the left)."""
    ang = phase + 2.0 * math.pi * np.arange(n) / n
    if surface.kind == SPHERE:
        c = reduce_points(surface, center)
        e1, e2 = tangent_frame(surface, c)
        v = radius * (np.cos(ang)[:, None] * e1 + np.sin(ang)[:, None] * e2)
        pts = exp_map(surface, np.broadcast_to(c, v.shape), v)
    else:
        pts = np.asarray(center, dtype=float) + radius * np.column_stack([np.cos(ang), np.sin(ang)])
    return DiscreteCurve(surface, pts, side)


def polygon(surface: SurfaceMetric, vertices, n: int, side: int = 1) -> DiscreteCurve:
    """Planar polygon through ``vertices`` sampled at uniform arclength with
    every vertex kept as a sample (needs ``n`` divisible into equal edges)."""
    v = np.asarray(vertices, dtype=float)
    edges = np.roll(v, -1, axis=0) - v
    lens = np.linalg.norm(edges, axis=1)
    per = np.maximum(1, np.round(n * lens / lens.sum()).astype(int))
    pts = [v[i] + np.outer(np.arange(per[i]) / per[i], edges[i]) for i in range(len(v))]
    return DiscreteCurve(surface, np.vstack(pts), side)
