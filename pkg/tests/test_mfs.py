from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import regular_polygon, star_polygon
from mskflow import _kernels, mfs, oracle, shapes
from mskflow.errors import PlacementError, SingularEvaluationError
from mskflow.geometry import PolygonalCurve, discrete_curvature, edge_frames


def _solve_both(curve, d=None, dummy="auto"):
    k = discrete_curvature(curve)
    out = {}
    for side in ("interior", "exterior"):
        pl = mfs.place_charges(curve, side, d, dummy=dummy)
        out[side] = (mfs.solve_charges(curve, pl, k), pl)
    return out, k


# [TRIVIAL] direct formula
def test_fundamental_solution_values():
    assert mfs.fundamental_solution([1.0, 0.0]) == 0.0
    assert mfs.fundamental_solution([2.0, 0.0]) == pytest.approx(np.log(2) / (2 * np.pi), rel=1e-15)
    assert mfs.fundamental_solution([2.0, 0.0]) == pytest.approx(0.1103178, abs=1e-7)
    np.testing.assert_allclose(mfs.fundamental_gradient([0.0, 3.0]), [0.0, 1 / (6 * np.pi)])
    with pytest.raises(SingularEvaluationError):
        mfs.fundamental_solution([0.0, 0.0])


# [TRIVIAL] definition
def test_square_interior_placement(unit_square):
    pl = mfs.place_charges(unit_square, "interior", 0.1)
    f = edge_frames(unit_square)
    np.testing.assert_allclose(pl.y[0], f.midpoint[0] + 0.1 * f.n[0])
    np.testing.assert_allclose(pl.z[0], f.midpoint[0] + 0.05 * f.n[0])
    ext = mfs.place_charges(unit_square, "exterior", 0.1)
    np.testing.assert_allclose(ext.y[0], f.midpoint[0] - 0.1 * f.n[0])


# [PAPER] d = 1/sqrt(N)
def test_default_offset():
    c = PolygonalCurve(regular_polygon(100))
    assert mfs.place_charges(c, "interior").d[0] == pytest.approx(0.1)


# [DERIVED] a C-shape whose inner slot is narrower than d
def test_concave_large_offset_rejected():
    X = np.array([[0, 0], [3, 0], [3, 1], [1, 1], [1, 1.1], [3, 1.1], [3, 2], [0, 2]], float)
    c = PolygonalCurve(X)
    with pytest.raises(PlacementError):
        mfs.place_charges(c, "interior", 0.3)
    mfs.place_charges(c, "interior", 0.04)


# [TRIVIAL] collinear charge, dummy and collocation point
def test_assembled_structure():
    c = PolygonalCurve(regular_polygon(16))
    pl = mfs.place_charges(c, "interior", 0.1, dummy="near")
    A, rhs = mfs.assemble(c, pl, discrete_curvature(c))
    np.testing.assert_allclose(np.diag(A[1:, 1:]), np.log(2) / (2 * np.pi), rtol=1e-12)
    np.testing.assert_array_equal(A[1:, 0], 1.0)
    assert A[0, 0] == 0.0 and rhs[0] == 0.0
    # [DERIVED] symmetry: every H_j equal
    np.testing.assert_allclose(A[0, 1:], A[0, 1], rtol=1e-12)
    assert abs(A[0, 1]) > 0


# [DERIVED] symmetric constant-curvature data needs no charges
@pytest.mark.parametrize("dummy", ["near", "none"])
def test_regular_polygon_solution(dummy):
    c = PolygonalCurve(regular_polygon(16))
    sols, k = _solve_both(c, dummy=dummy)
    for sol, pl in sols.values():
        assert np.max(np.abs(sol.q)) <= 1e-10
        assert sol.q0 == pytest.approx(k[0], rel=1e-12)
        assert sol.residual <= 1e-10
    vp, vm = mfs.edge_velocities(sols["interior"][0], sols["exterior"][0], c)
    assert np.max(np.abs(vp)) <= 1e-10 and np.max(np.abs(vm)) <= 1e-10
    g = mfs.gradient(sols["interior"][0], sols["interior"][1], np.array([[0.1, 0.2], [0.0, -0.3]]))
    assert np.max(np.abs(g)) <= 1e-9


# [TRIVIAL] kernel depends on relative positions only
def test_translation_invariance():
    X = star_polygon(40, 0.2, 5)
    a, _ = _solve_both(PolygonalCurve(X))
    b, _ = _solve_both(PolygonalCurve(X + np.array([10.0, -4.0])))
    for side in a:
        assert b[side][0].q0 == pytest.approx(a[side][0].q0, rel=1e-9, abs=1e-12)
        np.testing.assert_allclose(b[side][0].q, a[side][0].q, rtol=1e-7, atol=1e-10)


# [DERIVED] rerun on scaled input
def test_scaled_curve_keeps_constraint():
    sols, _ = _solve_both(PolygonalCurve(2.0 * star_polygon(40, 0.2, 5)))
    for sol, _ in sols.values():
        assert sol.ap_residual <= 1e-8


# [TRIVIAL] solver contract
def test_collocation_fit_and_far_field():
    c = PolygonalCurve(star_polygon(50, 0.2, 5))
    sols, k = _solve_both(c)
    f = edge_frames(c)
    for sol, pl in sols.values():
        np.testing.assert_allclose(mfs.potential(sol, pl, f.midpoint), k, atol=1e-8)
    sol, pl = sols["exterior"]
    far = np.array([[4.0e6, 0.0]])   # diameter ~2.4, so well beyond 1e6 diameters
    assert abs(mfs.potential(sol, pl, far)[0] - sol.q0) <= 1e-4
    # gradient decays like 1/|x|^2 along a ray
    rho = np.array([10.0, 100.0, 1000.0])
    g = mfs.gradient(sol, pl, np.column_stack([rho, 0.5 * rho]))
    scaled = np.hypot(g[:, 0], g[:, 1]) * (1.25 * rho * rho)
    assert np.all(scaled < 10 * scaled[0] + 1e-12)


# [DERIVED] exact radial solution; coupled monopole system
def test_annulus_inner_speed():
    curves = shapes.annulus(512)
    k = np.concatenate([discrete_curvature(c) for c in curves])
    sols = {s: mfs.solve_charges(curves, mfs.place_charges(curves, s), k)
            for s in ("interior", "exterior")}
    vp, vm = mfs.edge_velocities(sols["interior"], sols["exterior"], curves)
    w = (vp + vm)[256:]
    expected = (4.0 / 3.0) / np.log(3.0)
    assert expected == pytest.approx(1.2137, abs=1e-4)
    np.testing.assert_allclose(w, expected, rtol=0.02)


# [DERIVED] reflection symmetry about the x-axis
def test_mirror_symmetric_velocities():
    X = star_polygon(40, 0.25, 3)   # symmetric under y -> -y
    c = PolygonalCurve(X)
    sols, _ = _solve_both(c)
    vp, vm = mfs.edge_velocities(sols["interior"][0], sols["exterior"][0])
    w = vp + vm
    # edge k runs X[k-1] -> X[k]; its mirror image runs X[-k] -> X[-k+1], i.e. edge (1 - k) mod N
    mirror = (1 - np.arange(40)) % 40
    np.testing.assert_allclose(w, w[mirror], atol=1e-9)


def test_kernel_backends_agree():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(30, 2)); n = rng.normal(size=(30, 2)); p = rng.normal(size=(25, 2)) + 5
    G1 = np.zeros((30, 25)); H1 = np.zeros((30, 25))
    G2 = np.zeros((30, 25)); H2 = np.zeros((30, 25))
    assert _kernels.accumulate(x, n, p, -1.0, G1, H1)
    assert _kernels._accumulate_py(x, n, p, -1.0, G2, H2)
    np.testing.assert_allclose(G1, G2, rtol=1e-13)
    np.testing.assert_allclose(H1, H2, rtol=1e-13)
    assert not _kernels._accumulate_py(x, n, x[:3], 1.0, G2[:, :3], H2[:, :3])


@given(st.integers(24, 70), st.floats(0.0, 0.3), st.integers(2, 5), st.floats(0, 1))
def test_interior_potential_is_harmonic(n, amp, arms, phase):
    c = PolygonalCurve(star_polygon(n, amp, arms, phase))
    sols, _ = _solve_both(c)
    sol, pl = sols["interior"]
    h = 1e-3
    for x in ([0.0, 0.0], [0.2, -0.1]):
        u = lambda p: mfs.potential(sol, pl, p)
        res = oracle.harmonic_residual(u, x, h, singular_points=pl.points)
        scale = 1.0 + np.linalg.norm(mfs.gradient(sol, pl, np.array(x)))
        assert abs(res) * h * h <= 1e-5 * scale
