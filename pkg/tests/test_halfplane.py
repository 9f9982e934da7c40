from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mskflow import halfplane as hp, mfs, shapes
from mskflow.errors import ConfigError, GeometryError, TangentialContactError
from mskflow.geometry import shoelace


def _semicircle(n=41, R=1.0):
    return hp.HalfPlaneCurve(shapes.semicircle(n, R))


def test_curve_validation():
    with pytest.raises(GeometryError):
        hp.HalfPlaneCurve(np.array([[1.0, 0.1], [0.0, 1.0], [-1.0, 0.0]]))
    with pytest.raises(GeometryError):
        hp.HalfPlaneCurve(np.array([[1.0, 0.0], [0.0, -1.0], [-1.0, 0.0]]))
    with pytest.raises(GeometryError):   # clockwise
        hp.HalfPlaneCurve(np.array([[-1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]))


# [DERIVED] half of a regular polygon
@pytest.mark.parametrize("mode", hp.END_CURVATURE)
def test_semicircle_curvature(mode):
    n, R = 41, 2.0
    k = hp.hp_curvature(_semicircle(n, R), mode=mode)
    assert len(k) == n - 1
    np.testing.assert_allclose(k, 1.0 / (R * np.cos(np.pi / (2 * (n - 1)))), rtol=1e-12)
    assert np.max(np.abs(k - 1.0 / R)) <= 2.0 / (n - 1) ** 2


# [TRIVIAL] formula
def test_lshape_corner_and_straight_edges():
    X = np.array([[1, 0], [1, 1], [1, 2], [1, 3], [0, 3], [0, 2], [0, 1], [0, 0]], float)
    c = hp.HalfPlaneCurve(X)
    k = hp.hp_curvature(c, mode="doubled")
    # edge X[1] -> X[2] is flanked by straight vertices
    assert k[1] == 0.0
    # edge X[2] -> X[3]: straight at X[2], right angle at X[3]
    assert k[2] == pytest.approx(np.tan(np.pi / 4) / 1.0)
    # end edges use twice their single interior half angle
    assert k[0] == 0.0 and k[-1] == 0.0
    # at a 90 degree contact the mirror rule agrees with the doubled one
    np.testing.assert_allclose(hp.hp_curvature(c, mode="mirror"), k, atol=1e-15)
    with pytest.raises(ConfigError):
        hp.hp_curvature(c, mode="other")


def test_mirror_rule_sees_contact_angle():
    X = np.array([[2.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]])   # 45 degrees at X[0]
    k = hp.hp_curvature(hp.HalfPlaneCurve(X), mode="mirror")
    kd = hp.hp_curvature(hp.HalfPlaneCurve(X), mode="doubled")
    r0 = np.sqrt(2.0)
    t = np.tan(np.pi / 8)
    assert kd[0] == pytest.approx(2 * t / r0)
    assert k[0] == pytest.approx((1.0 / np.tan(np.pi / 4) + t) / r0)


# [TRIVIAL] kernel even in y
@pytest.mark.parametrize("shape", ["semicircle", "lshape"])
def test_neumann_condition_and_fit(shape):
    c = hp.HalfPlaneCurve(shapes.generate_open(shape, 41))
    f = hp.hp_frames(c)
    k = hp.hp_curvature(c, f)
    xs = np.linspace(-4, 5, 10)
    for side in ("interior", "exterior"):
        sol, pl = hp.hp_solve(c, side, frames=f, kappa=k)
        assert hp.neumann_residual(sol, pl, xs) <= 1e-10
        np.testing.assert_allclose(mfs.potential(sol, pl, f.midpoint), k, atol=1e-8)


# [DERIVED] the semicircle is stationary
def test_semicircle_has_no_flux():
    c = _semicircle(41, 1.5)
    fl = hp.hp_fields(hp.HalfPlaneState(c))
    assert np.max(np.abs(fl.w)) <= 1e-8
    assert abs(fl.s_first) <= 1e-8 and abs(fl.s_last) <= 1e-8


def test_semicircle_stays_put():
    c = _semicircle(31)
    res = hp.hp_run(hp.HalfPlaneState(c), t_end=0.05, record_every=0)
    assert res.ok
    drift = np.max(np.abs(res.state.curve.vertices - c.vertices))
    assert drift <= 1e-6 * 0.05


# [TRIVIAL] 1/sin(theta)
def test_endpoint_speed():
    def frames(theta0, theta1):
        t = np.array([[-np.cos(theta0), np.sin(theta0)], [np.cos(theta1), -np.sin(theta1)]])
        return hp.HalfPlaneFrames(np.ones(2), t, t, t, np.ones(1), np.ones(1), t[:1], t[:1], np.ones(1))
    s0, s1 = hp.hp_endpoint_velocity(0.7, 0.7, frames(np.pi / 2, np.pi / 2))
    assert abs(s0) == pytest.approx(0.7) and abs(s1) == pytest.approx(0.7)
    s0, _ = hp.hp_endpoint_velocity(1.0, 1.0, frames(np.pi / 6, np.pi / 2))
    assert abs(s0) == pytest.approx(2.0)
    with pytest.raises(TangentialContactError):
        hp.hp_endpoint_velocity(1.0, 1.0, frames(1e-5, np.pi / 2))


# [TRIVIAL] zero right-hand side
def test_udm_equispaced_static():
    c = _semicircle(21)
    f = hp.hp_frames(c)
    m = len(f.r)
    u = hp.hp_udm(f, np.zeros(m), np.zeros(m), np.zeros(m - 1), 0.0, 0.0, 100.0)
    np.testing.assert_allclose(u.W, 0.0, atol=1e-12)
    assert u.W[0] == 0.0 and u.W[-1] == 0.0


# [TRIVIAL] a single edge has nothing to redistribute
def test_udm_single_edge():
    t = np.array([[-1.0, 0.0]])
    f = hp.HalfPlaneFrames(np.ones(1), t, t, t, np.ones(0), np.ones(0), np.zeros((0, 2)),
                           np.zeros((0, 2)), np.ones(0))
    u = hp.hp_udm(f, np.zeros(1), np.zeros(1), np.zeros(0), 0.0, 0.0, 10.0)
    assert u.W.tolist() == [0.0, 0.0]


@given(st.integers(8, 40), st.floats(0.05, 0.45), st.integers(0, 2**31))
def test_udm_equalizes_spacing(n, jitter, seed):
    rng = np.random.default_rng(seed)
    th = np.linspace(0, np.pi, n)
    th[1:-1] += jitter * (np.pi / (n - 1)) * rng.uniform(-1, 1, n - 2)
    X = np.column_stack([np.cos(th), np.sin(th)])
    X[0, 1] = X[-1, 1] = 0.0
    c = hp.HalfPlaneCurve(X)
    f = hp.hp_frames(c)
    m = len(f.r)
    u = hp.hp_udm(f, np.zeros(m), np.zeros(m), np.zeros(m - 1), 0.0, 0.0, 10.0 * n)
    assert abs(u.closure) <= 1e-10 * (1 + np.max(np.abs(u.W)))
    Y = X.copy()
    Y[1:-1] += (1e-4 / n) * u.W[1:-1, None] * f.T
    r1 = hp.hp_frames(hp.HalfPlaneCurve(Y)).r
    assert np.var(r1) <= np.var(f.r) + 1e-15


def test_lshape_short_run_bookkeeping():
    c = hp.HalfPlaneCurve(shapes.lshape(58))
    res = hp.hp_run(hp.HalfPlaneState(c), steps=200)
    assert res.ok
    assert res.neumann_max <= 1e-10
    assert res.closure_max <= 1e-9
    m = res.metrics[-1]
    assert m.curve_id == 0 and np.isnan(m.errA)
    assert shoelace(res.state.curve.vertices) == pytest.approx(5.0, rel=1e-3)
    # area is nearly conserved while the length drops fast
    assert abs(m.Adot) <= 1e-4 * abs(m.Ldot)


def test_run_requires_horizon():
    with pytest.raises(ConfigError):
        hp.hp_run(hp.HalfPlaneState(_semicircle()))
