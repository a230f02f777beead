"""Explicit integration of the c-flow dγ/dt = (k - c) n, with the inward unit
normal n, plus an obstacle-constrained variant.

Each step moves every vertex by dt (k_i - c) along n_i through the exponential
map, with dt = beta * h_min^2. The curve is resampled at the initial mean
spacing whenever the spacing ratio exceeds 2 or the mean spacing has drifted
by more than a factor 2 (the curve has grown or shrunk a lot).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .curve import (
    MIN_POINTS,
    DiscreteCurve,
    contains,
    crossing_count,
    curvature_profile,
    displace,
    is_contractible,
    one_sided_data,
    resample,
)
from .errors import BlowUpError, InsufficientHistoryError, NotNestedError
from .functional import Region, loop_area
from .surface import (
    exp_map,
    gaussian_curvature,
    log_map,
)

STATIONARY = "stationary"
EXTINCT = "extinct"
MAX_TIME = "max_time"
MAX_STEPS = "max_steps"
BLOW_UP = "blow_up"
OBSTACLE = "obstacle"

RESAMPLE_RATIO = 2.0


@dataclass(frozen=True)
class FlowConfig:
    c: float
    beta: float = 0.25
    resample_spacing: float | None = None  # default: initial mean spacing
    max_time: float = 1.0
    max_steps: int = 1_000_000
    stop_gradient_norm: float = 1e-6
    extinction_length: float | None = None  # default: 16 resample spacings
    snapshot_every: int | None = None  # keep every k-th curve; None keeps first and last
    check_crossings_every: int = 1

    def __post_init__(self):
        if not 0 < self.beta <= 0.5:
            raise ValueError("beta must lie in (0, 0.5]")
        for name in ("max_time", "stop_gradient_norm"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("resample_spacing", "extinction_length"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class StepRecord:
    step: int
    t: float
    F_c: float
    length: float
    area: float
    k_min: float
    k_max: float
    grad_norm: float
    self_intersecting: bool
    dt: float = 0.0
    resampled: bool = False
    resample_dF: float = 0.0


@dataclass(frozen=True, eq=False)
class FlowState:
    curve: DiscreteCurve
    t: float = 0.0
    step_count: int = 0
    record: StepRecord | None = None
    target_spacing: float | None = None
    intersected: bool = False
    profile: object = field(default=None, repr=False)


@dataclass(eq=False)
class FlowResult:
    records: list[StepRecord]
    snapshots: list[FlowState]
    reason: str
    final: FlowState
    error: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def F_values(self) -> np.ndarray:
        return np.array([r.F_c for r in self.records])


def _area(curve: DiscreteCurve) -> float:
    if curve.surface.kind == "plane" or is_contractible(curve):
        from .curve import enclosed_area

        return enclosed_area(curve, check_embedded=False)
    return loop_area((curve,))


def _measure(curve: DiscreteCurve, c: float, intersected: bool, profile=None):
    prof = profile if profile is not None else curvature_profile(curve)
    L = prof.length
    if intersected:
        # area and F_c are no longer meaningful once the curve has crossed itself
        A = F = math.nan
    else:
        A = _area(curve)
        F = L - c * A
    return prof, L, A, F


def _record(state: FlowState, c: float, prof, L, A, F, dt=0.0, resampled=False, dF=0.0) -> StepRecord:
    return StepRecord(
        step=state.step_count,
        t=state.t,
        F_c=F,
        length=L,
        area=A,
        k_min=float(np.min(prof.k)),
        k_max=float(np.max(prof.k)),
        grad_norm=float(np.sqrt(np.sum((prof.k - c) ** 2 * prof.ds))),
        self_intersecting=state.intersected,
        dt=dt,
        resampled=resampled,
        resample_dF=dF,
    )


def initial_state(curve: DiscreteCurve, config: FlowConfig) -> FlowState:
    target = config.resample_spacing
    if target is None:
        target = float(np.mean(curve.segment_lengths()))
    state = FlowState(curve, 0.0, 0, None, target, crossing_count(curve) > 0)
    prof, L, A, F = _measure(curve, config.c, state.intersected)
    return replace(state, record=_record(state, config.c, prof, L, A, F), profile=prof)


def _needs_resample(curve: DiscreteCurve, target: float) -> bool:
    seg = curve.segment_lengths()
    mean = float(np.mean(seg))
    if seg.min() <= 0 or seg.max() / seg.min() > RESAMPLE_RATIO:
        return True
    if mean > 2.0 * target:
        return True
    return mean < 0.5 * target and curve.n > MIN_POINTS


def _resample_to(curve: DiscreteCurve, target: float) -> DiscreteCurve:
    L = float(np.sum(curve.segment_lengths()))
    return resample(curve, min(target, L / MIN_POINTS))


def step(state: FlowState, config: FlowConfig, max_dt: float | None = None) -> FlowState:
    """Advance one explicit Euler step."""
    curve = state.curve
    c = config.c
    prof = state.profile if state.profile is not None else curvature_profile(curve)
    h_min = float(np.min(prof.seg))
    if float(np.max(np.abs(prof.k))) * h_min > 1.0 or not np.all(np.isfinite(prof.k)):
        raise BlowUpError(f"max|k| * h_min exceeds 1 at t = {state.t:.6g}")
    dt = config.beta * h_min * h_min
    if max_dt is not None:
        dt = min(dt, max_dt)
    moved = displace(curve, dt * (prof.k - c), prof)
    return _finish_step(state, config, moved, dt)


def _finish_step(state: FlowState, config: FlowConfig, moved: DiscreteCurve, dt: float) -> FlowState:
    c = config.c
    target = state.target_spacing
    n_step = state.step_count + 1
    intersected = state.intersected
    if not intersected and n_step % config.check_crossings_every == 0:
        intersected = crossing_count(moved) > 0
    resampled = False
    dF = 0.0
    if _needs_resample(moved, target):
        new = _resample_to(moved, target)
        resampled = True
        if not intersected:
            _, _, _, F_before = _measure(moved, c, False)
            prof, L, A, F = _measure(new, c, False)
            dF = F - F_before
        moved = new
    out = FlowState(moved, state.t + dt, n_step, None, target, intersected)
    prof, L, A, F = _measure(moved, c, intersected)
    return replace(out, record=_record(out, c, prof, L, A, F, dt, resampled, dF), profile=prof)


def _extinction_length(config: FlowConfig, state: FlowState) -> float:
    if config.extinction_length is not None:
        return config.extinction_length
    return 16.0 * state.target_spacing


def run(initial: DiscreteCurve, config: FlowConfig) -> FlowResult:
    state = initial_state(initial, config)
    records = [state.record]
    snapshots = [state]
    ext_len = _extinction_length(config, state)
    reason = MAX_STEPS
    error = None
    while True:
        rec = state.record
        if rec.grad_norm < config.stop_gradient_norm:
            reason = STATIONARY
            break
        if rec.length < ext_len:
            reason = EXTINCT
            break
        if state.t >= config.max_time * (1 - 1e-12):
            reason = MAX_TIME
            break
        if state.step_count >= config.max_steps:
            reason = MAX_STEPS
            break
        try:
            state = step(state, config, max_dt=config.max_time - state.t)
        except BlowUpError as exc:
            reason, error = BLOW_UP, str(exc)
            break
        records.append(state.record)
        if config.snapshot_every and state.step_count % config.snapshot_every == 0:
            snapshots.append(state)
    if snapshots[-1] is not state:
        snapshots.append(state)
    return FlowResult(records, snapshots, reason, state, error, {"c": config.c})


def dissipation_slack(before: StepRecord, after: StepRecord) -> float:
    """Allowed increase of F_c over one accepted step: round-off plus ten times
    the change caused by resampling, if any."""
    slack = 1e-8 * (1.0 + abs(before.F_c))
    if after.resampled:
        slack += 10.0 * abs(after.resample_dF)
    return slack


def dissipation_violations(result: FlowResult) -> list[int]:
    """Steps at which F_c rose by more than the allowed slack (steps after the
    first self-intersection are skipped)."""
    bad = []
    for a, b in zip(result.records[:-1], result.records[1:]):
        if b.self_intersecting or math.isnan(a.F_c) or math.isnan(b.F_c):
            continue
        if b.F_c > a.F_c + dissipation_slack(a, b):
            bad.append(b.step)
    return bad


# --------------------------------------------------------------------------
# curvature evolution check


def _k_at_fraction(state: FlowState, fractions: np.ndarray) -> tuple[np.ndarray, object]:
    prof = curvature_profile(state.curve)
    L = prof.length
    s = np.concatenate([prof.s, [L]]) / L
    k = np.concatenate([prof.k, prof.k[:1]])
    return np.interp(np.mod(fractions, 1.0), s, k), prof


def evolution_residual(result: FlowResult, vertex_index: int, step_index: int) -> float:
    """|k_t - (k_ss + k^2 (k - c) + G (k - c))| at one vertex of a stored snapshot.

    ``step_index`` indexes ``result.snapshots``; its neighbours supply the
    time derivative. The vertex is followed by its arclength fraction.
    """
    snaps = result.snapshots
    if step_index < 1 or step_index + 1 >= len(snaps):
        raise InsufficientHistoryError("need a stored snapshot on each side of step_index")
    c = result.extra.get("c")
    if c is None:
        raise ValueError("result does not carry the flow parameter c")
    mid = snaps[step_index]
    prof = curvature_profile(mid.curve)
    n = mid.curve.n
    i = vertex_index % n
    frac = prof.s[i] / prof.length
    k_prev, _ = _k_at_fraction(snaps[step_index - 1], np.array([frac]))
    k_next, _ = _k_at_fraction(snaps[step_index + 1], np.array([frac]))
    t0, t1, t2 = snaps[step_index - 1].t, mid.t, snaps[step_index + 1].t
    h1, h2 = t1 - t0, t2 - t1
    k = prof.k
    # three-point derivative on a non-uniform grid
    k_t = (
        -h2 / (h1 * (h1 + h2)) * k_prev[0]
        + (h2 - h1) / (h1 * h2) * k[i]
        + h1 / (h2 * (h1 + h2)) * k_next[0]
    )
    seg = prof.seg
    ip, im = (i + 1) % n, (i - 1) % n
    k_ss = ((k[ip] - k[i]) / seg[i] - (k[i] - k[im]) / seg[im]) / prof.ds[i]
    G = gaussian_curvature(mid.curve.surface)
    rhs = k_ss + k[i] ** 2 * (k[i] - c) + G * (k[i] - c)
    return float(abs(k_t - rhs))


def run_with_history(initial: DiscreteCurve, config: FlowConfig) -> FlowResult:
    """``run`` with every step stored, for the evolution-equation check."""
    cfg = replace(config, snapshot_every=config.snapshot_every or 1)
    return run(initial, cfg)


# --------------------------------------------------------------------------
# obstacle-constrained flow


@dataclass(frozen=True)
class ContactReport:
    indices: np.ndarray
    fraction: float
    theta: list[float]
    k_plus: list[float]
    obstacle_k: float


def _closest_on_boundary(obstacle: DiscreteCurve, q: np.ndarray) -> np.ndarray:
    """Closest point of the obstacle polygon to each query point, computed in
    the tangent plane at the query."""
    S = obstacle.surface
    P = obstacle.points
    fwd = obstacle.forward_vectors()
    out = np.empty_like(q)
    for j, x in enumerate(q):
        a = log_map(S, x, P)
        b = a + fwd
        d = b - a
        tt = np.clip(-np.sum(a * d, axis=1) / np.maximum(np.sum(d * d, axis=1), 1e-300), 0.0, 1.0)
        foot = a + tt[:, None] * d
        m = int(np.argmin(np.sum(foot * foot, axis=1)))
        out[j] = exp_map(S, x, foot[m])
    return out


def _contact_report(curve: DiscreteCurve, on: np.ndarray, obstacle: DiscreteCurve, c: float) -> ContactReport:
    idx = np.flatnonzero(on)
    theta, k_plus = [], []
    n = curve.n
    if 0 < idx.size < n:
        starts = [i for i in idx if not on[(i - 1) % n]]
        ends = [i for i in idx if not on[(i + 1) % n]]
        for i in list(starts) + list(ends):
            d = one_sided_data(curve, int(i))
            theta.append(d.theta)
            k_plus.append(d.k_plus)
    ob_k = float(np.mean(curvature_profile(obstacle).k))
    return ContactReport(idx, idx.size / n, theta, k_plus, ob_k)


def constrained_flow(initial: Region, obstacle: Region, config: FlowConfig,
                     contact_tol: float = 1e-12) -> FlowResult:
    """c-flow of ``initial`` kept inside ``obstacle``: after each step every
    vertex that left the obstacle is moved to the closest boundary point."""
    curve = initial.boundary
    wall = obstacle.boundary
    inside = contains(wall, curve.points)
    if not np.all(inside):
        raise NotNestedError("initial region is not contained in the obstacle")
    state = initial_state(curve, config)
    records = [state.record]
    snapshots = [state]
    ext_len = _extinction_length(config, state)
    reason = MAX_STEPS
    error = None
    on = np.zeros(curve.n, dtype=bool)
    c = config.c
    while True:
        rec = state.record
        prof = state.profile
        free = ~on if on.size == state.curve.n else np.ones(state.curve.n, dtype=bool)
        free_norm = float(np.sqrt(np.sum(((prof.k - c) ** 2 * prof.ds)[free])))
        if free_norm < config.stop_gradient_norm:
            reason = OBSTACLE if np.any(on) else STATIONARY
            break
        if rec.length < ext_len:
            reason = EXTINCT
            break
        if state.t >= config.max_time * (1 - 1e-12):
            reason = MAX_TIME
            break
        if state.step_count >= config.max_steps:
            reason = MAX_STEPS
            break
        h_min = float(np.min(prof.seg))
        if float(np.max(np.abs(prof.k))) * h_min > 1.0:
            reason, error = BLOW_UP, "max|k| * h_min exceeds 1"
            break
        dt = min(config.beta * h_min * h_min, config.max_time - state.t)
        moved = displace(state.curve, dt * (prof.k - c), prof)
        out = ~contains(wall, moved.points)
        pts = moved.points.copy()
        if np.any(out):
            pts[out] = _closest_on_boundary(wall, pts[out])
            moved = moved.with_points(pts)
        state = _finish_step(state, config, moved, dt)
        if state.curve.n != out.size:
            # resampled: recompute contact from distances to the wall
            new_pts = state.curve.points
            proj = _closest_on_boundary(wall, new_pts)
            gap = np.linalg.norm(log_map(wall.surface, new_pts, proj), axis=1)
            out = gap < max(contact_tol, 1e-9 * state.target_spacing)
        on = out
        records.append(state.record)
        if config.snapshot_every and state.step_count % config.snapshot_every == 0:
            snapshots.append(state)
    if snapshots[-1] is not state:
        snapshots.append(state)
    result = FlowResult(records, snapshots, reason, state, error)
    result.extra["c"] = c
    if on.size == state.curve.n:
        result.extra["contact"] = _contact_report(state.curve, on, wall, c)
    return result
