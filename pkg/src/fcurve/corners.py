"""Rounding off corners: replace the two sides of a wedge near its vertex p by
an arc of the circle of radius eps tangent to both sides.

The wedge geometry is computed in normal coordinates at p. On the sphere the
chart distorts lengths and areas by a factor within 1 +/- alpha(r), so the
plane decrease of F_c certifies a decrease on the surface only when it beats
2 alpha times the size of the modified piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curve import (
    CorneredCurve,
    DiscreteCurve,
    detect_corners,
    menger_curvature,
    one_sided_data,
)
from .errors import AngleTooLargeError, CertificationError, EpsilonTooLargeError
from .surface import SPHERE, ChartFrame, SurfaceMetric, chart_distortion_bound, exp_chart, log_map

MAX_WEDGE_ANGLE = math.pi - 0.05
INWARD = "inward"
OUTWARD = "outward"


def _left(v: np.ndarray) -> np.ndarray:
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _polyline_tangents(V: np.ndarray) -> np.ndarray:
    T = np.empty_like(V)
    T[1:-1] = V[2:] - V[:-2]
    T[0] = V[1] - V[0]
    T[-1] = V[-1] - V[-2]
    return _unit(T)


def _start_direction(V: np.ndarray) -> np.ndarray:
    """Second-order one-sided tangent at V[0] (near-uniform spacing)."""
    if len(V) < 3:
        return _unit(V[1] - V[0])
    return _unit(4.0 * (V[1] - V[0]) - (V[2] - V[0]))


def _segment_intersections(A: np.ndarray, B: np.ndarray):
    """All proper intersections between segments of polylines A and B.

    Returns arrays (i, a, j, b) meaning A[i] + a (A[i+1] - A[i]) equals
    B[j] + b (B[j+1] - B[j]).
    """
    p = A[:-1][:, None, :]
    r = (A[1:] - A[:-1])[:, None, :]
    q = B[:-1][None, :, :]
    s = (B[1:] - B[:-1])[None, :, :]
    denom = _cross(r, s)
    qp = q - p
    with np.errstate(divide="ignore", invalid="ignore"):
        a = _cross(qp, s) / denom
        b = _cross(qp, r) / denom
    ok = (np.abs(denom) > 1e-300) & (a >= 0) & (a <= 1) & (b >= 0) & (b <= 1)
    i, j = np.nonzero(ok)
    return i, a[i, j], j, b[i, j]


@dataclass(frozen=True, eq=False)
class TangentCircle:
    center: np.ndarray          # p_eps on the surface
    x: np.ndarray               # tangency point on the first arc
    y: np.ndarray               # tangency point on the second arc
    center_uv: np.ndarray       # the same points in (unscaled) chart coordinates
    x_uv: np.ndarray
    y_uv: np.ndarray
    x_param: tuple[int, float]  # segment index and fraction along the first arc, counted from p
    y_param: tuple[int, float]
    theta: float


def _chart_coords(chart: ChartFrame, pts) -> np.ndarray:
    return chart.forward(pts) * chart.r


def tangent_circle(arc1, arc2, eps: float, chart: ChartFrame) -> TangentCircle:
    """Centre and tangency points of the eps-circle inscribed in the wedge
    between two arcs that end at the chart centre p.

    ``arc1`` and ``arc2`` are arrays of surface points ordered toward p (the
    last point of each is p). The wedge is the sector of opening angle below pi.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    V1 = _chart_coords(chart, np.asarray(arc1))[::-1]
    V2 = _chart_coords(chart, np.asarray(arc2))[::-1]
    V1[0] = 0.0
    V2[0] = 0.0
    u1, u2 = _start_direction(V1), _start_direction(V2)
    theta = float(np.arccos(np.clip(np.dot(u1, u2), -1.0, 1.0)))
    if theta >= MAX_WEDGE_ANGLE:
        raise AngleTooLargeError(f"wedge angle {theta:.4f} is too close to pi")
    s = 1.0 if _cross(u1, u2) > 0 else -1.0
    n1 = s * _left(_polyline_tangents(V1))
    n2 = -s * _left(_polyline_tangents(V2))
    O1 = V1 + eps * n1
    O2 = V2 + eps * n2
    i, a, j, b = _segment_intersections(O1, O2)
    if i.size == 0:
        raise EpsilonTooLargeError(f"offset curves at eps = {eps} do not meet within the arcs")
    pts = O1[i] + a[:, None] * (O1[i + 1] - O1[i])
    # the singular point of the offsets closest to p, inside the wedge
    inside = (_cross(u1, pts) * s >= 0) & (_cross(pts, u2) * s >= 0)
    if not np.any(inside):
        raise EpsilonTooLargeError("offset curves do not meet inside the wedge")
    cand = np.flatnonzero(inside)
    m = cand[np.argmin(np.linalg.norm(pts[cand], axis=1))]
    i, a, j, b = int(i[m]), float(a[m]), int(j[m]), float(b[m])
    # tangency points must be interior to the given arcs
    if i >= len(V1) - 2 or j >= len(V2) - 2:
        raise EpsilonTooLargeError(f"eps = {eps} puts a tangency point at the end of an arc")
    pe = pts[m]
    x_uv = V1[i] + a * (V1[i + 1] - V1[i])
    y_uv = V2[j] + b * (V2[j + 1] - V2[j])
    to_surface = lambda uv: chart.backward(np.asarray(uv) / chart.r)
    return TangentCircle(
        center=to_surface(pe),
        x=to_surface(x_uv),
        y=to_surface(y_uv),
        center_uv=pe,
        x_uv=x_uv,
        y_uv=y_uv,
        x_param=(i, a),
        y_param=(j, b),
        theta=theta,
    )


def _circle_arc(center, start, end, toward, n: int) -> np.ndarray:
    """Points of the circle through ``start`` and ``end`` about ``center``
    along the arc that passes on the side of ``toward`` (excluding endpoints)."""
    a0 = math.atan2(*(start - center)[::-1])
    a1 = math.atan2(*(end - center)[::-1])
    aw = math.atan2(*(toward - center)[::-1])
    sweep = (a1 - a0) % (2 * math.pi)
    if not (0 < (aw - a0) % (2 * math.pi) < sweep):
        sweep -= 2 * math.pi
    rad = 0.5 * (np.linalg.norm(start - center) + np.linalg.norm(end - center))
    ang = a0 + sweep * np.arange(1, n) / n
    return center + rad * np.column_stack([np.cos(ang), np.sin(ang)])


def _poly_length_uv(P: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.diff(P, axis=0), axis=1)))


def _shoelace_uv(P: np.ndarray) -> float:
    x, y = P[:, 0], P[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_area_signed(surface: SurfaceMetric, pts: np.ndarray) -> float:
    """Signed area of a small geodesic polygon (counterclockwise positive)."""
    pts = np.asarray(pts, dtype=float)
    if surface.kind != SPHERE:
        rel = log_map(surface, pts[0], pts)
        return _shoelace_uv(rel)
    a = pts[0]
    b, c = pts[1:-1], pts[2:]
    num = np.sum(a * np.cross(b, c), axis=1)
    den = 1.0 + b @ a + np.sum(b * c, axis=1) + c @ a
    return float(2.0 * np.sum(np.arctan2(num, den))) * surface.radius**2


def _surface_length(surface: SurfaceMetric, pts: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(log_map(surface, pts[:-1], pts[1:]), axis=1)))


@dataclass(frozen=True, eq=False)
class WedgeRounding:
    eps: float
    center: np.ndarray
    x_eps: np.ndarray
    y_eps: np.ndarray
    arc: np.ndarray             # inserted arc from x_eps to y_eps, endpoints included
    delta_F: float              # F_c after minus before, on the surface
    delta_F_chart: float        # the same change measured in the flat chart
    delta_length: float
    delta_area: float           # change of the area of the region being rounded
    alpha: float
    chart_radius: float
    theta: float
    k_arc_min: float            # inserted arc curvature, toward the rounded region
    k_arc_max: float
    direction: str = INWARD
    certified: bool = True
    cut: np.ndarray | None = None  # replaced piece x_eps -> p -> y_eps


def _round_pieces(surface: SurfaceMetric, arc1: np.ndarray, arc2: np.ndarray, eps: float,
                  c: float, spacing: float | None, chart_radius: float | None):
    """Shared core: returns the tangent circle, the old piece x -> p -> y, the
    new arc x -> y and the measured changes (rounded side loses area)."""
    p = arc1[-1]
    if chart_radius is None:
        chart_radius = 0.9 * min(surface.injectivity_radius, 1e6)
    chart = exp_chart(surface, p, chart_radius)
    tc = tangent_circle(arc1, arc2, eps, chart)
    V1 = _chart_coords(chart, arc1)[::-1]
    V2 = _chart_coords(chart, arc2)[::-1]
    V1[0] = V2[0] = 0.0
    (i, _), (j, _) = tc.x_param, tc.y_param
    old_uv = np.vstack([[tc.x_uv], V1[i:0:-1], [[0.0, 0.0]], V2[1:j + 1], [tc.y_uv]])
    if spacing is None:
        spacing = float(np.mean(np.linalg.norm(np.diff(V1[: i + 2], axis=0), axis=1)))
    toward = np.zeros(2)
    arc_len = (math.pi - tc.theta) * eps
    n_arc = max(16, int(math.ceil(arc_len / spacing)))
    inner = _circle_arc(tc.center_uv, tc.x_uv, tc.y_uv, toward, n_arc)
    new_uv = np.vstack([[tc.x_uv], inner, [tc.y_uv]])
    # plane measurements in the chart
    dL_chart = _poly_length_uv(new_uv) - _poly_length_uv(old_uv)
    loop_uv = np.vstack([old_uv, new_uv[-2:0:-1]])
    A_chart = abs(_shoelace_uv(loop_uv))
    # surface measurements
    to_surface = lambda uv: chart.backward(np.asarray(uv) / chart.r)
    old = to_surface(old_uv)
    new = to_surface(new_uv)
    dL = _surface_length(surface, new) - _surface_length(surface, old)
    A = abs(polygon_area_signed(surface, np.vstack([old, new[-2:0:-1]])))
    support = float(np.max(np.linalg.norm(np.vstack([old_uv, new_uv]), axis=1)))
    cert_chart = exp_chart(surface, p, max(support, 1e-300) * (1 + 1e-9))
    alpha = chart_distortion_bound(cert_chart, c)
    scale = _poly_length_uv(old_uv)
    k = menger_curvature(surface, new[:-2], new[1:-1], new[2:])
    return dict(
        tc=tc, chart=chart, old=old, new=new, dL=dL, A=A, dL_chart=dL_chart, A_chart=A_chart,
        alpha=alpha, scale=scale, support=support, k=np.abs(k), i=i, j=j,
    )


def _certify(parts: dict, eps: float, dF: float, dF_chart: float) -> None:
    if not dF < 0:
        raise CertificationError(f"rounding with eps = {eps} does not decrease F_c (change {dF:.3e})")
    if not dF_chart < -2.0 * parts["alpha"] * parts["scale"]:
        raise CertificationError(
            f"chart decrease {dF_chart:.3e} does not beat the distortion bound "
            f"{2.0 * parts['alpha'] * parts['scale']:.3e}"
        )
    k = parts["k"]
    if k.size and (k.min() < 0.5 / eps or k.max() > 2.0 / eps):
        raise CertificationError(
            f"inserted arc curvature [{k.min():.4g}, {k.max():.4g}] outside [1/(2 eps), 2/eps]"
        )


def round_wedge(surface: SurfaceMetric, arc1, arc2, eps: float, c: float,
                spacing: float | None = None, certify: bool = True) -> WedgeRounding:
    """Round the wedge bounded by two open arcs ending at a common point p.

    The rounded region is the wedge itself, so the inserted arc curves toward
    it and the wedge loses the small curved triangle near p.
    """
    arc1 = np.asarray(arc1, dtype=float)
    arc2 = np.asarray(arc2, dtype=float)
    parts = _round_pieces(surface, arc1, arc2, eps, c, spacing, None)
    dF = parts["dL"] + c * parts["A"]
    dF_chart = parts["dL_chart"] + c * parts["A_chart"]
    if certify:
        _certify(parts, eps, dF, dF_chart)
    tc = parts["tc"]
    return WedgeRounding(
        eps=eps, center=tc.center, x_eps=tc.x, y_eps=tc.y, arc=parts["new"],
        delta_F=dF, delta_F_chart=dF_chart, delta_length=parts["dL"],
        delta_area=-parts["A"], alpha=parts["alpha"], chart_radius=parts["support"],
        theta=tc.theta, k_arc_min=float(parts["k"].min()), k_arc_max=float(parts["k"].max()),
        cut=parts["old"],
    )


def _local_extent(curve: DiscreteCurve, i: int, step: int, stop: set[int], max_len: float) -> int:
    """Number of vertices to walk from i in direction ``step`` before running
    into another corner visit or exceeding ``max_len``."""
    seg = curve.segment_lengths()
    n = curve.n
    total = 0.0
    m = 0
    j = i
    while m < n // 2 - 2:
        nxt = (j + step) % n
        total += seg[j] if step > 0 else seg[nxt]
        if total > max_len or nxt in stop:
            break
        m += 1
        j = nxt
    return m


def round_corner(curve, corner_id: int, eps: float, c: float, direction: str = INWARD,
                 visit: int = 0, certify: bool = True) -> tuple[DiscreteCurve, WedgeRounding]:
    """Round one visit of a corner of a closed curve.

    ``direction="inward"`` rounds the wedge on the region side (the region
    shrinks); ``"outward"`` rounds the complementary wedge (the region grows).
    Either way the inserted arc has curvature of order 1/eps and F_c drops.
    """
    if isinstance(curve, CorneredCurve):
        cc = curve
    else:
        cc = detect_corners(curve)
    base = cc.curve
    corner = cc.corners[corner_id]
    v = corner.visits[visit]
    work = base if direction == INWARD else base.flipped()
    if direction not in (INWARD, OUTWARD):
        raise ValueError(f"unknown direction {direction!r}")
    i = v.index
    theta_side = one_sided_data(work, i).theta
    if theta_side >= MAX_WEDGE_ANGLE:
        raise AngleTooLargeError(
            f"corner angle {theta_side:.4f} toward the rounded side is not below pi"
        )
    S = base.surface
    n = base.n
    stop = set(cc.visit_indices()) - {i}
    seg = base.segment_lengths()
    max_len = min(0.45 * S.injectivity_radius, float(np.sum(seg)) / 4.0)
    m1 = _local_extent(base, i, -1, stop, max_len)
    m2 = _local_extent(base, i, +1, stop, max_len)
    if min(m1, m2) < 3:
        raise EpsilonTooLargeError("corner sides are too short to round")
    idx1 = [(i - m1 + k) % n for k in range(m1 + 1)]       # toward p
    idx2 = [(i + m2 - k) % n for k in range(m2 + 1)]       # toward p
    P = base.points
    parts = _round_pieces(S, P[idx1], P[idx2], eps, c, float(np.mean(seg)), None)
    A = parts["A"]
    dL = parts["dL"]
    sign = 1.0 if direction == INWARD else -1.0
    # the rounded side loses the area A; the region gains it when rounding outward
    dF, dA = dL + sign * c * A, -sign * A
    dF_chart = parts["dL_chart"] + sign * c * parts["A_chart"]
    if certify:
        _certify(parts, eps, dF, dF_chart)
    ii, jj = parts["i"], parts["j"]
    # vertices strictly between x_eps and y_eps are replaced by the arc
    keep_before = idx1[: m1 - ii]                      # arc1 vertices before x_eps
    keep_after = idx2[: m2 - jj][::-1]                 # arc2 vertices after y_eps
    h = float(np.mean(seg))
    new_arc = parts["new"]
    tail = []
    j = (i + m2 + 1) % n
    while j != idx1[0]:
        tail.append(j)
        j = (j + 1) % n
    order = keep_before
    pts = [P[order]]
    # drop kept vertices that crowd the tangency points
    def crowd(a, b):
        return np.linalg.norm(log_map(S, a, b)) < 0.5 * h

    if len(order) and crowd(P[order[-1]], new_arc[0]):
        pts[0] = pts[0][:-1]
    after = P[keep_after]
    if len(after) and crowd(after[0], new_arc[-1]):
        after = after[1:]
    pts += [new_arc, after, P[tail]]
    rounded = DiscreteCurve(S, np.vstack([q for q in pts if len(q)]), base.side)
    tc = parts["tc"]
    k = np.sort(sign * parts["k"])
    report = WedgeRounding(
        eps=eps, center=tc.center, x_eps=tc.x, y_eps=tc.y, arc=new_arc,
        delta_F=dF, delta_F_chart=dF_chart,
        delta_length=dL, delta_area=dA, alpha=parts["alpha"], chart_radius=parts["support"],
        theta=tc.theta, k_arc_min=float(k[0]), k_arc_max=float(k[-1]),
        direction=direction, cut=parts["old"],
    )
    return rounded, report
