import numpy as np
import pytest

from fcurve.curve import curvature_profile, length
from fcurve.errors import InfeasibleCError
from fcurve.flow import FlowConfig
from fcurve.functional import eval_fc
from fcurve.minmax import (
    disk_family,
    eval_family,
    latitude_family,
    lens_family,
    perturb_and_reflow,
)
from fcurve.oracle import lens_curve, lens_exact, sphere_latitude_fraction
from fcurve.surface import flat_torus, plane, round_sphere

P = plane()
T = flat_torus(3.0, 1.0)
S = round_sphere(1.0)
LENS_FC = lens_exact(1.0)[2]


@pytest.fixture(scope="module")
def lens_estimate():
    return eval_family(lens_family(T, 1.0, n_points=1024), 1.0, 64)


def hausdorff_torus(a, b, surface):
    from fcurve.surface import log_map
    d = np.array([np.min(np.linalg.norm(log_map(surface, q, b), axis=1)) for q in a])
    e = np.array([np.min(np.linalg.norm(log_map(surface, q, a), axis=1)) for q in b])
    return max(d.max(), e.max())


# ---- latitude family --------------------------------------------------------


def test_latitude_equator_slice():
    fam = latitude_family(S)
    assert abs(length(fam(0.5).boundary) - 2 * np.pi) < 1e-3


def test_latitude_small_cap():
    fam = latitude_family(S)
    values = [eval_fc(fam(t), 1.0).value for t in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert np.all(np.diff(values) < 0) and 0 < values[-1] < 2e-3


def test_latitude_curvature_at_f():
    f = sphere_latitude_fraction(0.7)
    fam = latitude_family(S, n_points=1024)
    curve = fam((f + 1) / 2).boundary
    k_upper = curvature_profile(curve.flipped()).k
    assert np.max(np.abs(k_upper - 0.7)) < 1e-3


def test_latitude_width_small_c():
    est = eval_family(latitude_family(S), 1e-6, 32)
    assert abs(est.value - 2 * np.pi) < 1e-3
    assert abs(est.t_star - 0.5) < 1e-3


def test_latitude_width_c1():
    # the maximum sits at the stationary latitude z = -f(c)
    est = eval_family(latitude_family(S, n_points=1024), 1.0, 32)
    f = sphere_latitude_fraction(1.0)
    assert abs((2 * est.t_star - 1) + f) < 1e-3
    exact = 2 * np.pi * np.sqrt(1 - f * f) - 2 * np.pi * (1 - f)
    assert abs(est.value - exact) < 1e-3


# ---- lens family -----------------------------------------------------------


def test_lens_slice_matches_oracle():
    fam = lens_family(T, 1.0, n_points=1024)
    region = fam(1 / 3)
    oracle = lens_curve(T, 1.0, 1024)
    assert hausdorff_torus(region.boundary.points, oracle.curve.points, T) < 1e-6


def test_lens_width(lens_estimate):
    assert abs(lens_estimate.value - LENS_FC) < 1e-4
    assert abs(lens_estimate.t_star - 1 / 3) < 1e-4


def test_lens_strictly_below_peak():
    fam = lens_family(T, 1.0, n_points=1024)
    for t in (0.1, 0.2, 0.5, 0.8):
        assert eval_fc(fam(t), 1.0).value < LENS_FC


def test_lens_argmax_unique(lens_estimate):
    F = lens_estimate.values()
    t = np.array([p.t for p in lens_estimate.profile])
    far = np.abs(t - lens_estimate.t_star) > 0.02
    assert np.all(F[far] < lens_estimate.value - 1e-3)


def test_lens_endpoints():
    fam = lens_family(T, 1.0, n_points=512)
    assert eval_fc(fam(0.0), 1.0).value == 0.0
    assert eval_fc(fam(1.0), 1.0).value == -3.0
    assert abs(eval_fc(fam(1 - 1e-6), 1.0).value + 3.0) < 1e-4
    assert abs(eval_fc(fam(1e-6), 1.0).value) < 1e-4


def test_lens_profile_continuity(lens_estimate):
    # every slice area and length changes at a bounded rate in t
    modulus = lens_estimate.lipschitz_modulus()
    assert 0 < modulus < 25
    print(f"lens profile Lipschitz modulus: {modulus:.4f}")


def test_lens_family_infeasible():
    with pytest.raises(InfeasibleCError):
        lens_family(T, 2.5)


@pytest.mark.parametrize("c", [0.5, 1.0, 1.5])
def test_width_positive(c):
    est = eval_family(lens_family(T, c, n_points=512), c, 32)
    assert est.value > 0
    assert est.value == max(p.F_c for p in est.profile)


def test_n_slices_minimum():
    with pytest.raises(ValueError):
        eval_family(latitude_family(S), 1.0, 15)


def test_workers_deterministic():
    fam = lens_family(T, 1.0, n_points=256)
    a = eval_family(fam, 1.0, 32)
    b = eval_family(fam, 1.0, 32, workers=4)
    assert [p.t for p in a.profile] == [p.t for p in b.profile]
    assert [p.F_c for p in a.profile] == [p.F_c for p in b.profile]
    assert a.value == b.value and a.t_star == b.t_star


# ---- saddle probe -----------------------------------------------------------


def test_reflow_lens():
    fam = lens_family(T, 1.0, n_points=512)
    est = perturb_and_reflow(fam, 1.0, 1 / 3, FlowConfig(c=1.0, max_time=0.3), n_points=256)
    rep = est.reflow
    assert rep.rounded
    assert all(rep.descends)


def test_reflow_latitude():
    c = 0.3
    f = sphere_latitude_fraction(c)
    fam = latitude_family(S, n_points=256)
    est = perturb_and_reflow(fam, c, (1 - f) / 2, FlowConfig(c=c, max_time=0.3), n_points=128)
    assert not est.reflow.rounded
    assert all(est.reflow.descends)


def test_reflow_disk():
    fam = disk_family(P, 2.0)
    est = eval_family(fam, 1.0, 32)
    assert abs(est.t_star - 0.5) < 1e-3 and abs(est.value - np.pi) < 1e-3
    out = perturb_and_reflow(fam, 1.0, est.t_star, FlowConfig(c=1.0, max_time=0.3),
                             n_points=128, estimate=est)
    assert out.value == est.value and out.profile == est.profile
    assert all(out.reflow.descends)


def test_reflow_needs_interior_t():
    with pytest.raises(ValueError):
        perturb_and_reflow(disk_family(P, 2.0), 1.0, 1.0, FlowConfig(c=1.0))
