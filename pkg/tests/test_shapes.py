from __future__ import annotations

import numpy as np
import pytest

from mskflow import shapes
from mskflow.errors import ConfigError
from mskflow.geometry import area, edge_frames, is_simple, length


# [DERIVED] shoelace closed form
def test_circle_area():
    (c,) = shapes.generate_shape("circle", 16)
    assert area(c) == pytest.approx(8 * np.sin(np.pi / 8), rel=1e-13)
    assert area(c) == pytest.approx(3.0615, abs=1e-4)


# [PAPER] dimensions 8 x 1 ; [DERIVED] stadium area
def test_tube_area():
    (c,) = shapes.generate_shape("tube", 50)
    assert area(c) == pytest.approx(8.0 + np.pi * 0.25, rel=0.02)
    assert c.orientation == 1


# [PAPER] r = 30, l = 5, b = 0.25
def test_dumbbell_is_simple():
    (c,) = shapes.generate_shape("dumbbell", 2000)
    assert is_simple(c.vertices) and c.orientation == 1


@pytest.mark.parametrize("name,n", [("star", 50), ("tube", 64), ("two_ovals", 84), ("four_circles", 80)])
def test_equispaced(name, n):
    for c in shapes.generate_shape(name, n):
        r = edge_frames(c).r
        assert r.max() / r.min() < 1.05
        assert c.orientation == 1


def test_annulus_orientation():
    outer, inner = shapes.generate_shape("annulus", 64)
    assert outer.orientation == 1 and inner.orientation == -1
    assert outer.n == inner.n == 32


def test_lshape_keeps_corners():
    X = shapes.lshape(58)
    assert len(X) == 58
    for corner in shapes.LSHAPE:
        assert np.any(np.all(np.isclose(X, corner), axis=1))
    r = np.hypot(*np.diff(X, axis=0).T)
    assert r.max() / r.min() < 1.3


def test_invalid_requests():
    with pytest.raises(ConfigError):
        shapes.generate_shape("hexagram", 10)
    with pytest.raises(ConfigError):
        shapes.generate_shape("four_circles", 81)
    with pytest.raises(ConfigError):
        shapes.generate_shape("circle", 2)
    with pytest.raises(ConfigError):
        shapes.generate_shape("lshape", 58)
    with pytest.raises(ConfigError):
        shapes.generate_shape("star", 20, amplitude=1.5)
    with pytest.raises(ConfigError):
        shapes.generate_shape("star", 20, wobble=1)
    with pytest.raises(ConfigError):
        shapes.generate_shape("file:/nonexistent.csv", 0)
    with pytest.raises(ConfigError):
        shapes.generate_open("circle", 10)


def test_file_loader(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("curve_id,vertex_index,x,y\n0,1,1,0\n0,0,0,0\n0,2,0,1\n")
    (c,) = shapes.generate_shape(f"file:{p}", 0)
    np.testing.assert_array_equal(c.vertices, [[0, 0], [1, 0], [0, 1]])
    assert length(c) == pytest.approx(2 + np.sqrt(2))
    bad = tmp_path / "bad.csv"
    bad.write_text("0,0,0,0\n0,1,x,1\n")
    with pytest.raises(ConfigError):
        shapes.generate_shape(f"file:{bad}", 0)


# [TRIVIAL] alternating sum of a hand-made zigzag
def test_alternating_turn():
    X = np.array([[0, 0], [1, 0], [2, 1], [3, 1], [4, 0]], float)   # turns +45, -45, -45
    assert np.degrees(shapes.alternating_turn(X)) == pytest.approx(45 + 45 - 45)
    assert shapes.alternating_turn(shapes.semicircle(22)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("n", [30, 41, 58, 81])
def test_balanced_lshape_has_no_odd_even_turning(n):
    X = shapes.lshape(n)
    assert len(X) == n
    assert shapes.alternating_turn(X) == pytest.approx(0.0, abs=1e-9)
    r = np.hypot(*np.diff(X, axis=0).T)
    # moving a few edges between sides keeps the spacing close to uniform
    assert r.max() / r.min() <= 1.5
    for c in shapes.LSHAPE:
        assert np.min(np.hypot(*(X - np.array(c)).T)) == 0.0


def test_counts_override_validated():
    with pytest.raises(ConfigError):
        shapes.resample_with_corners(np.array(shapes.LSHAPE), 12, closed=False, counts=[2, 2, 2, 2, 2])
    X = shapes.resample_with_corners(np.array(shapes.LSHAPE), 12, closed=False, counts=[1, 3, 3, 1, 3])
    assert len(X) == 12
