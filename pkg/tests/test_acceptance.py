"""Acceptance criteria, one test each. Every test prints a single
``criterion N: PASS|FAIL ...`` line to the terminal before asserting."""

import time

import numpy as np
import pytest

from fcurve.corners import round_corner, round_wedge
from fcurve.curve import (
    DiscreteCurve,
    circle,
    contains,
    curvature_profile,
    detect_corners,
    enclosed_area,
    length,
    polygon,
)
from fcurve.flow import EXTINCT, STATIONARY, FlowConfig, dissipation_violations, evolution_residual, run
from fcurve.functional import Region, eval_fc, first_variation, perturb
from fcurve.minmax import eval_family, lens_family
from fcurve.oracle import (
    doubled_geodesic,
    latitude_curve,
    lens_curve,
    lens_exact,
    lens_singularity_check,
    plane_circle_ode,
    sphere_latitude_data,
    sphere_latitude_fraction,
)
from fcurve.samples import random_smooth_curve, random_wedge
from fcurve.surface import flat_torus, plane, round_sphere

P = plane()
T = flat_torus(3.0, 1.0)
S = round_sphere(1.0)

# quad() of the lens width over the chord at c = 1 (see test_oracle)
LENS_AREA_BRUTE = 0.18117214741215926


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return emit


def perturbed_latitude(z0, amp, n=128, mode=3):
    phi = 2 * np.pi * np.arange(n) / n
    z = z0 + amp * np.cos(mode * phi)
    rho = np.sqrt(1 - z * z)
    return DiscreteCurve(S, np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z]))


def test_criterion_01_lens_closed_forms(report):
    start = time.perf_counter()
    lens = lens_curve(T, 1.0, 4096)
    L = length(lens.curve)
    A = enclosed_area(lens.curve)
    elapsed = time.perf_counter() - start
    err_l = abs(L - 2 * np.pi / 3) / (2 * np.pi / 3)
    err_a = abs(A - lens.exact_area) / lens.exact_area
    ok = (err_l < 1e-4 and err_a < 1e-4 and abs(lens.exact_area - LENS_AREA_BRUTE) < 1e-12
          and elapsed < 1.0)
    report(1, ok, f"rel length err {err_l:.2e}, rel area err {err_a:.2e}, {elapsed:.3f} s")


def test_criterion_02_taylor_expansion(report):
    cs = [0.05, 0.02, 0.01]
    ratios = [(2 - lens_exact(c)[2]) / c**2 for c in cs]
    gaps = np.abs(np.array(ratios) - 1 / 12)
    ok = bool(np.all(np.diff(gaps) < 0) and gaps[-1] < 0.01 / 12)
    report(2, ok, "ratios " + ", ".join(f"{r:.8f}" for r in ratios))


def test_criterion_03_lens_width(report):
    fam = lens_family(T, 1.0, n_points=1024)
    est = eval_family(fam, 1.0, 64)
    exact = lens_exact(1.0)[2]
    others = [eval_fc(fam(t), 1.0).value for t in (0.1, 0.2, 0.5, 0.8)]
    ok = (abs(est.value - exact) < 1e-4 and abs(est.t_star - 1 / 3) < 1e-4
          and all(v < exact for v in others) and exact < doubled_geodesic(T).fc(1.0))
    report(3, ok, f"max {est.value:.7f} at t = {est.t_star:.5f}, exact {exact:.7f}, "
                  f"others max {max(others):.5f}")


def _circle_flow_error(r0, c, t_end, stationary=False):
    cfg = FlowConfig(c=c, max_time=t_end, snapshot_every=200,
                     stop_gradient_norm=1e-300 if stationary else 1e-6)
    res = run(circle(P, (0, 0), r0, 512), cfg)
    ode = plane_circle_ode(r0, c, t_end)
    err = 0.0
    for s in res.snapshots:
        if ode.extinction_time is not None and s.t >= ode.extinction_time:
            break
        r = float(np.mean(np.linalg.norm(s.curve.points, axis=1)))
        err = max(err, abs(r - float(ode.radius(s.t))))
    return err, res


def test_criterion_04_circle_flow_vs_ode(report):
    e1, r1 = _circle_flow_error(0.5, 1.0, 3.0)
    e2, r2 = _circle_flow_error(2.0, 1.0, 3.0)
    e3, r3 = _circle_flow_error(1.0, 1.0, 1.0, stationary=True)
    ok = (r1.reason == EXTINCT and r3.final.t >= 1.0 - 1e-12
          and max(e1, e2) < 1e-3 and e3 < 1e-3)
    report(4, ok, f"max |r - r_ode|: r0=0.5 {e1:.2e} ({r1.reason}), r0=2 {e2:.2e}, "
                  f"r0=1 drift {e3:.2e}")


def test_criterion_05_dissipation(report):
    bad = {}
    for surface in (P, T, S):
        count = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            curve = random_smooth_curve(surface, rng, n=96)
            res = run(curve, FlowConfig(c=rng.uniform(0.3, 2.0), max_steps=300))
            count += len(dissipation_violations(res))
        bad[surface.kind] = count
    ok = sum(bad.values()) == 0
    report(5, ok, "violations " + ", ".join(f"{k} {v}" for k, v in bad.items()))


def test_criterion_06_sphere_convexity(report):
    low = perturbed_latitude(0.6, 0.008)
    high = perturbed_latitude(0.9, 0.005)
    k_low, k_high = curvature_profile(low).k, curvature_profile(high).k
    h_low = float(np.mean(low.segment_lengths()))
    h_high = float(np.mean(high.segment_lengths()))
    r_low = run(low, FlowConfig(c=1.0, max_time=5.0))
    r_high = run(high, FlowConfig(c=1.0, max_time=5.0))
    top = max(r.k_max for r in r_low.records)
    bottom = min(r.k_min for r in r_high.records)
    ok = (k_low.max() <= 0.9 and k_high.min() >= 1.1
          and top <= 1 + 5 * h_low and bottom >= 1 - 5 * h_high)
    report(6, ok, f"k<=0.9 start: max k over run {top:.4f}; k>=1.1 start: min k over run {bottom:.4f}")


def test_criterion_07_corner_rounding(report):
    rng = np.random.default_rng(0)
    good = 0
    for _ in range(100):
        a1, a2, c, theta, min_len = random_wedge(rng)
        eps = 0.05 * min_len
        rep = round_wedge(P, a1, a2, eps, c)
        good += rep.delta_F < 0 and 0.5 / eps <= rep.k_arc_min <= rep.k_arc_max <= 2 / eps
    cc = detect_corners(polygon(P, [(0, 0), (2, 0), (2, 2), (0, 2)], 800))
    k = next(i for i, cn in enumerate(cc.corners) if np.allclose(cn.point, [2.0, 2.0]))
    pts = np.array([2.0, 2.0]) - np.random.default_rng(1).uniform(0, 0.3, (4000, 2))
    inside = [contains(round_corner(cc, k, eps, 0.1)[0], pts) for eps in (0.025, 0.05, 0.1)]
    nested = bool(np.all(inside[1] <= inside[0]) and np.all(inside[2] <= inside[1]))
    ok = good == 100 and nested
    report(7, ok, f"{good}/100 wedges certified, nesting {'holds' if nested else 'fails'}")


def test_criterion_08_first_variation(report):
    h = 1e-5
    worst = 0.0
    surfaces = (P, T, S)
    for seed in range(20):
        rng = np.random.default_rng(seed)
        surface = surfaces[seed % 3]
        region = Region.bounded_by(random_smooth_curve(surface, rng, n=4096))
        c = rng.uniform(0.2, 2.0)
        F = eval_fc(region, c).value
        s = 2 * np.pi * np.arange(4096) / 4096
        for _ in range(5):
            phi = rng.normal() + sum(rng.normal() / m * np.cos(m * s + rng.uniform(0, 2 * np.pi))
                                     for m in range(1, 5))
            fd = (eval_fc(perturb(region, phi, h), c).value
                  - eval_fc(perturb(region, phi, -h), c).value) / (2 * h)
            worst = max(worst, abs(first_variation(region, c, phi) - fd) / (1 + abs(F)))
    report(8, worst <= 1e-5, f"worst relative mismatch {worst:.2e}")


def test_criterion_09_sphere_stationarity(report):
    residuals = [sphere_latitude_data(1.0, c).first_variation_residual for c in (0.5, 1.0, 2.0)]
    f = sphere_latitude_fraction(1.0)
    below = run(latitude_curve(S, -f - 0.05, 128), FlowConfig(c=1.0, max_time=5.0))
    z_below = float(np.mean(below.final.curve.points[:, 2]))
    above = run(latitude_curve(S, -f + 0.05, 128), FlowConfig(c=1.0, max_time=3.0))
    z_above = float(np.mean(above.final.curve.points[:, 2]))
    parts = [
        max(residuals) < 1e-6,
        below.reason == STATIONARY and abs(z_below + f) < 1e-2,
        z_above > 0,
    ]
    report(9, all(parts),
           f"first variation {max(residuals):.1e} ({'ok' if parts[0] else 'fail'}); "
           f"from -f-0.05: {below.reason} at z = {z_below:.4f} vs -f = {-f:.4f} "
           f"({'ok' if parts[1] else 'fail'}); from -f+0.05: z = {z_above:.4f} "
           f"({'ok' if parts[2] else 'fail'})")


def _residual(curve, c=1.0, t_mid=0.01):
    res = run(curve, FlowConfig(c=c, max_time=2 * t_mid, snapshot_every=1))
    idx = int(np.argmin([abs(s.t - t_mid) for s in res.snapshots]))
    return evolution_residual(res, 0, idx)


def test_criterion_10_evolution_equation(report):
    orders = {}
    for name, make in (("plane circle", lambda n: circle(P, (0, 0), 0.5, n)),
                       ("sphere latitude", lambda n: latitude_curve(S, -0.5, n))):
        errs = np.array([_residual(make(n)) for n in (64, 128, 256)])
        orders[name] = np.log2(errs[:-1] / errs[1:])
    ok = all(np.all(o >= 1.0) for o in orders.values())
    report(10, ok, "; ".join(f"{k} orders {', '.join(f'{x:.2f}' for x in v)}"
                             for k, v in orders.items()))


def test_criterion_11_lens_singularity(report):
    lens = lens_curve(T, 1.0, 4096)
    rep = lens_singularity_check(lens)
    ok = (rep.n_corners == 1 and abs(rep.line_angle - np.pi / 3) < 1e-2
          and rep.k_before * rep.k_after < 0
          and abs(abs(rep.k_before) - 1) < 0.05 and abs(abs(rep.k_after) - 1) < 0.05)
    report(11, ok, f"{rep.n_corners} corner, angle {rep.line_angle:.6f}, "
                   f"k {rep.k_before:+.4f} / {rep.k_after:+.4f}")
