from __future__ import annotations

import logging

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from mskflow import linsolve
from mskflow.errors import SingularMatrixError


# [TRIVIAL]
def test_identity():
    b = np.array([3.0, -1.0, 2.5])
    np.testing.assert_array_equal(linsolve.solve(np.eye(3), b), b)


# [TRIVIAL] needs a row swap
def test_permutation_needs_pivoting():
    np.testing.assert_allclose(linsolve.solve(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([1.0, 2.0])), [2.0, 1.0])


# [DERIVED] b built from a known x
def test_hilbert():
    H = scipy.linalg.hilbert(4)
    x = linsolve.solve(H, H.sum(axis=1))
    np.testing.assert_allclose(x, 1.0, atol=1e-8)


def test_singular_detected():
    with pytest.raises(SingularMatrixError) as exc:
        linsolve.solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 1.0]))
    assert exc.value.pivot_index == 1
    with pytest.raises(SingularMatrixError):
        linsolve.solve(np.zeros((3, 3)), np.ones(3))


def test_shape_and_finite_checks():
    with pytest.raises(ValueError):
        linsolve.solve(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        linsolve.solve(np.eye(2), np.ones(3))
    with pytest.raises(ValueError):
        linsolve.solve(np.array([[1.0, np.inf], [0.0, 1.0]]), np.ones(2))


def test_ill_conditioned_warns(caplog):
    H = scipy.linalg.hilbert(10)
    with caplog.at_level(logging.WARNING, logger="mskflow.linsolve"):
        x, cond = linsolve.solve(H, H @ np.ones(10), return_cond=True)
    assert cond > linsolve.COND_WARN
    assert any("ill-conditioned" in r.message for r in caplog.records)
    assert np.all(np.isfinite(x))


def test_refinement_does_not_hurt():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(40, 40))
    b = rng.normal(size=40)
    r0 = linsolve.relative_residual(A, linsolve.solve(A, b), b)
    r1 = linsolve.relative_residual(A, linsolve.solve(A, b, refine=True), b)
    assert r1 <= max(r0, 1e-14) * 10


@given(hnp.arrays(np.float64, (6, 6), elements=st.floats(-1, 1)),
       hnp.arrays(np.float64, 6, elements=st.floats(-1, 1)))
def test_backward_stable_on_diagonally_dominant(M, x):
    A = M + 7.0 * np.eye(6)
    b = A @ x
    sol = linsolve.solve(A, b)
    # n * cond * eps bound on the forward error
    cond = np.linalg.cond(A, 1)
    assert np.max(np.abs(sol - x)) <= 6 * cond * np.finfo(float).eps * max(1.0, np.max(np.abs(x))) * 10
