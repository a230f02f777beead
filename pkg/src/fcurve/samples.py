"""Random smooth test curves on each model surface."""

from __future__ import annotations

import numpy as np

from .curve import DiscreteCurve
from .surface import PLANE, SPHERE, TORUS, SurfaceMetric, exp_map, tangent_frame


def star_radii(rng: np.random.Generator, n: int, base: float, modes: int = 4,
               amplitude: float = 0.08) -> np.ndarray:
    """base * (1 + sum_j a_j cos(j phi + phase_j)) with |a_j| <= amplitude / j^2."""
    phi = 2.0 * np.pi * np.arange(n) / n
    r = np.ones(n)
    for j in range(2, modes + 2):
        a = rng.uniform(-amplitude, amplitude) / (j - 1) ** 2
        r += a * np.cos(j * phi + rng.uniform(0, 2 * np.pi))
    return base * r


def random_smooth_curve(surface: SurfaceMetric, rng: np.random.Generator, n: int = 128,
                        modes: int = 4, amplitude: float = 0.08,
                        base: float | None = None) -> DiscreteCurve:
    """Star-shaped smooth closed curve around a random centre (counterclockwise,
    region on the left)."""
    phi = 2.0 * np.pi * np.arange(n) / n
    if surface.kind == PLANE:
        base = base or rng.uniform(0.5, 2.0)
        center = rng.uniform(-1.0, 1.0, 2)
    elif surface.kind == TORUS:
        base = base or rng.uniform(0.15, 0.3) * min(surface.side_L, surface.side_H)
        center = rng.uniform(0.0, 1.0, 2) * np.array([surface.side_L, surface.side_H])
    elif surface.kind == SPHERE:
        base = base or rng.uniform(0.3, 1.2) * surface.radius
        center = rng.normal(size=3)
        center /= np.linalg.norm(center)
    else:  # pragma: no cover
        raise ValueError(surface.kind)
    r = star_radii(rng, n, base, modes, amplitude)
    e1, e2 = tangent_frame(surface, center)
    v = r[:, None] * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
    pts = exp_map(surface, np.broadcast_to(center, v.shape), v)
    return DiscreteCurve(surface, pts)


def circular_arc_from(p, direction, curvature: float, length: float, n: int,
                      turn: int = -1) -> np.ndarray:
    """n + 1 points of a circular arc in the plane starting at p with the given
    unit direction; ``turn`` = -1 bends clockwise, +1 counterclockwise."""
    s = length * np.arange(n + 1) / n
    a0 = np.arctan2(direction[1], direction[0])
    if curvature == 0:
        return np.asarray(p) + s[:, None] * np.array([np.cos(a0), np.sin(a0)])
    ang = a0 + turn * curvature * s
    rad = 1.0 / curvature
    # integral of (cos, sin)(a0 + turn c s) ds
    x = turn * rad * (np.sin(ang) - np.sin(a0))
    y = -turn * rad * (np.cos(ang) - np.cos(a0))
    return np.asarray(p) + np.column_stack([x, y])


def random_wedge(rng: np.random.Generator, surface: SurfaceMetric | None = None,
                 n: int = 400, theta_range=(0.2, 2.9), c_range=(0.0, 2.0)):
    """Two circular arcs of curvature c meeting at p with opening angle theta,
    each bending toward the wedge between them.

    Returns (arc1, arc2, c, theta, min_arc_length); the arcs are ordered
    toward p, the common last point. Off the plane the arcs are drawn in
    normal coordinates at a random point.
    """
    theta = rng.uniform(*theta_range)
    c = rng.uniform(*c_range)
    phi = rng.uniform(0, 2 * np.pi)
    lmax = 1.0 if c == 0 else min(1.0, 0.5 * theta / c)
    l1, l2 = rng.uniform(0.6, 1.0, 2) * lmax
    d1 = np.array([np.cos(phi + theta / 2), np.sin(phi + theta / 2)])
    d2 = np.array([np.cos(phi - theta / 2), np.sin(phi - theta / 2)])
    zero = np.zeros(2)
    a1 = circular_arc_from(zero, d1, c, l1, n, turn=-1)[::-1]
    a2 = circular_arc_from(zero, d2, c, l2, n, turn=+1)[::-1]
    if surface is None or surface.kind == PLANE:
        return a1, a2, c, theta, min(l1, l2)
    scale = 0.2 * min(surface.injectivity_radius, 1.0) / lmax
    p = rng.normal(size=surface.dim) if surface.kind == SPHERE else rng.uniform(0, 1, 2)
    from .surface import exp_chart, reduce_points

    p = reduce_points(surface, p)
    chart = exp_chart(surface, p, 0.9 * surface.injectivity_radius)
    to_s = lambda uv: chart.backward(uv * scale / chart.r)
    return to_s(a1), to_s(a2), c / scale, theta, min(l1, l2) * scale
