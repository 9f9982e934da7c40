"""Initial curves for the bundled scenarios.

Every generator returns CCW closed curves sampled at (near) equal arc length,
except ``annulus`` whose inner circle is a hole and runs clockwise, and
``lshape`` which is an open half-plane curve.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .geometry import PolygonalCurve

DENSE = 20000


def resample(outline: np.ndarray, n: int, closed: bool = True) -> np.ndarray:
    """n points equispaced in arc length along a polyline."""
    P = np.asarray(outline, float)
    if closed:
        P = np.vstack([P, P[:1]])
    seg = np.hypot(*np.diff(P, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if closed:
        targets = np.arange(n) * s[-1] / n
    else:
        targets = np.linspace(0.0, s[-1], n)
    return np.column_stack([np.interp(targets, s, P[:, 0]), np.interp(targets, s, P[:, 1])])


def _side_counts(lengths: np.ndarray, n_edges: int) -> np.ndarray:
    share = lengths / lengths.sum() * n_edges
    counts = np.maximum(1, np.floor(share).astype(int))
    while counts.sum() < n_edges:
        counts[np.argmax(share - counts)] += 1
    while counts.sum() > n_edges:
        k = np.argmax(np.where(counts > 1, counts - share, -np.inf))
        counts[k] -= 1
    return counts


def _outline(C: np.ndarray, closed: bool):
    ends = np.vstack([C[1:], C[:1]]) if closed else C[1:]
    starts = C if closed else C[:-1]
    return starts, ends


def _place(C: np.ndarray, counts, closed: bool) -> np.ndarray:
    starts, ends = _outline(C, closed)
    pts = [a + (b - a) * (np.arange(m)[:, None] / m) for a, b, m in zip(starts, ends, counts)]
    if not closed:
        pts.append(C[-1:])
    return np.vstack(pts)


def resample_with_corners(corners: np.ndarray, n: int, closed: bool = True,
                          counts=None) -> np.ndarray:
    """n points on a polygonal outline that keep every corner as a vertex.

    Edges are distributed over the sides in proportion to their lengths
    unless ``counts`` (edges per side) is given.
    """
    C = np.asarray(corners, float)
    starts, ends = _outline(C, closed)
    lengths = np.hypot(*(ends - starts).T)
    n_edges = n if closed else n - 1
    if n_edges < len(lengths):
        raise ConfigError(f"N = {n} is too small to keep all {len(C)} corners")
    if counts is None:
        counts = _side_counts(lengths, n_edges)
    elif len(counts) != len(lengths) or sum(counts) != n_edges or min(counts) < 1:
        raise ConfigError("counts must give at least one edge per side and sum to the edge count")
    return _place(C, counts, closed)


def alternating_turn(X: np.ndarray) -> float:
    """Sum of (-1)^k times the turning angle at interior vertex k of an open polyline.

    Curvature built from pairs of adjacent half angles cannot see this
    odd-even component, so a shape that carries it keeps it.
    """
    d = np.diff(np.asarray(X, float), axis=0)
    phi = np.diff(np.unwrap(np.arctan2(d[:, 1], d[:, 0])))
    return float(np.sum(phi * (-1.0) ** np.arange(len(phi))))


def balanced_counts(corners: np.ndarray, n: int) -> np.ndarray:
    """Edges per side of an open outline with the odd-even turning component removed.

    Starts from the length-proportional split and tries moving single edges
    between sides; among splits with the smallest alternating turn it keeps
    the one with the most uniform spacing.
    """
    C = np.asarray(corners, float)
    starts, ends = _outline(C, False)
    lengths = np.hypot(*(ends - starts).T)
    base = _side_counts(lengths, n - 1)
    cands = [base]
    for _ in range(2):
        nxt = []
        for c in cands:
            for i in range(len(c)):
                for j in range(len(c)):
                    if i != j and c[j] > 1:
                        e = c.copy()
                        e[i] += 1
                        e[j] -= 1
                        nxt.append(e)
        cands = cands + nxt

    def score(c):
        h = lengths / c
        return round(abs(alternating_turn(_place(C, c, False))), 9), h.max() / h.min()

    return min(cands, key=score)


def _circle_pts(n, R=1.0, center=(0.0, 0.0), phase=0.0):
    th = phase + 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + R * np.cos(th), center[1] + R * np.sin(th)])


def circle(n: int, radius: float = 1.0, center=(0.0, 0.0)) -> list[PolygonalCurve]:
    if radius <= 0:
        raise ConfigError("radius must be positive")
    return [PolygonalCurve(_circle_pts(n, radius, center))]


def star(n: int, amplitude: float = 0.2, arms: int = 5, radius: float = 1.0) -> list[PolygonalCurve]:
    """r(theta) = radius (1 + amplitude cos(arms theta)), equispaced in arc length."""
    if not 0 <= amplitude < 1:
        raise ConfigError("star amplitude must lie in [0, 1)")
    th = 2.0 * np.pi * np.arange(DENSE) / DENSE
    rr = radius * (1.0 + amplitude * np.cos(arms * th))
    return [PolygonalCurve(resample(np.column_stack([rr * np.cos(th), rr * np.sin(th)]), n))]


def tube(n: int, length: float = 8.0, thickness: float = 1.0) -> list[PolygonalCurve]:
    """Straight part ``length`` with semicircular caps of diameter ``thickness``."""
    if length <= 0 or thickness <= 0:
        raise ConfigError("tube length and thickness must be positive")
    a, h = length / 2.0, thickness / 2.0
    m = DENSE // 4
    th = np.linspace(-np.pi / 2, np.pi / 2, m, endpoint=False)
    right = np.column_stack([a + h * np.cos(th), h * np.sin(th)])
    left = np.column_stack([-a - h * np.cos(th), -h * np.sin(th)])
    top = np.column_stack([np.linspace(a, -a, m, endpoint=False), np.full(m, h)])
    bottom = np.column_stack([np.linspace(-a, a, m, endpoint=False), np.full(m, -h)])
    outline = np.vstack([right, top, left, bottom])
    X = resample(outline, n)
    return [PolygonalCurve(X)]


def annulus(n: int, r_inner: float = 1.0, r_outer: float = 3.0) -> list[PolygonalCurve]:
    """Outer circle CCW and inner circle CW; ``n`` counts both (n/2 each)."""
    if not 0 < r_inner < r_outer:
        raise ConfigError("annulus needs 0 < r_inner < r_outer")
    if n % 2:
        raise ConfigError("annulus needs an even total vertex count")
    m = n // 2
    outer = PolygonalCurve(_circle_pts(m, r_outer))
    inner = PolygonalCurve(_circle_pts(m, r_inner)[::-1])
    return [outer, inner]


FOUR_CIRCLES = (((-1.6, 1.6), 1.0), ((1.6, 1.6), 0.85), ((1.6, -1.6), 0.7), ((-1.6, -1.6), 0.5))


def four_circles(n: int, layout=FOUR_CIRCLES) -> list[PolygonalCurve]:
    """Four disjoint regular polygons of different size, n/4 vertices each."""
    k = len(layout)
    if n % k:
        raise ConfigError(f"N = {n} is not a multiple of the particle count {k}")
    return [PolygonalCurve(_circle_pts(n // k, R, c)) for c, R in layout]


def ellipse_pts(n, a, b, center=(0.0, 0.0)):
    th = 2.0 * np.pi * np.arange(DENSE) / DENSE
    pts = np.column_stack([center[0] + a * np.cos(th), center[1] + b * np.sin(th)])
    return resample(pts, n)


def two_ovals(n: int, a: float = 1.0, b: float = 0.6, gap: float = 0.3) -> list[PolygonalCurve]:
    """Two ellipses stacked vertically with their flat sides ``gap`` apart."""
    if n % 2:
        raise ConfigError("two_ovals needs an even total vertex count")
    off = b + gap / 2.0
    return [PolygonalCurve(ellipse_pts(n // 2, a, b, (0.0, -off))),
            PolygonalCurve(ellipse_pts(n // 2, a, b, (0.0, off)))]


def dumbbell_outline(r: float, l: float, b: float, dense: int = DENSE) -> np.ndarray:
    """Two disks of radius r joined by a bar of length l and thickness b."""
    if not (r > 0 and l > 0 and 0 < b < 2 * r):
        raise ConfigError("dumbbell needs r > 0, l > 0 and 0 < b < 2r")
    beta = np.arcsin(b / (2.0 * r))
    cx = l / 2.0 + r * np.cos(beta)
    m = dense // 2
    th = np.linspace(-np.pi + beta, np.pi - beta, m, endpoint=False)
    right = np.column_stack([cx + r * np.cos(th), r * np.sin(th)])
    left = np.column_stack([-cx - r * np.cos(th), -r * np.sin(th)])
    top = np.array([[l / 2.0, b / 2.0]])
    bottom = np.array([[-l / 2.0, -b / 2.0]])
    return np.vstack([right, top, left, bottom])


def dumbbell(n: int, r: float = 30.0, l: float = 5.0, b: float = 0.25) -> list[PolygonalCurve]:
    return [PolygonalCurve(resample(dumbbell_outline(r, l, b), n))]


LSHAPE = ((3.0, 0.0), (3.0, 1.0), (1.0, 1.0), (1.0, 3.0), (0.0, 3.0), (0.0, 0.0))


def lshape(n: int, corners=LSHAPE, balanced: bool = True) -> np.ndarray:
    """Vertices of the open L-shaped curve; both ends on the x-axis, corners kept.

    ``balanced`` places the corners so their odd-even turning cancels
    (see :func:`balanced_counts`).
    """
    C = np.array(corners, float)
    counts = balanced_counts(C, n) if balanced else None
    return resample_with_corners(C, n, closed=False, counts=counts)


def semicircle(n: int, radius: float = 1.0, center: float = 0.0) -> np.ndarray:
    """Vertices of an open semicircular arc standing on the x-axis."""
    if radius <= 0:
        raise ConfigError("radius must be positive")
    th = np.linspace(0.0, np.pi, n)
    X = np.column_stack([center + radius * np.cos(th), radius * np.sin(th)])
    X[0, 1] = X[-1, 1] = 0.0
    return X


OPEN_GENERATORS = {"lshape": lshape, "semicircle": semicircle}


def generate_open(name: str, n: int, **params) -> np.ndarray:
    """Vertices of an open half-plane curve by name, or ``file:<path>``."""
    if name.startswith("file:"):
        curves = load_csv(name[5:], closed=False)
        if len(curves) != 1:
            raise ConfigError("half-plane mode takes exactly one curve")
        return curves[0]
    try:
        gen = OPEN_GENERATORS[name]
    except KeyError:
        raise ConfigError(f"unknown half-plane shape {name!r}; choose from "
                          f"{', '.join(sorted(OPEN_GENERATORS))} or file:<path>") from None
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise ConfigError(f"N must be an integer >= 3, got {n!r}")
    try:
        return gen(int(n), **params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for shape {name!r}: {exc}") from None


def load_csv(path: str | Path, closed: bool = True) -> list:
    """Read ``curve_id,vertex_index,x,y`` rows (header optional).

    Closed curves come back as PolygonalCurve objects, open ones as arrays.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"no such vertex file: {path}")
    rows: dict[int, list] = {}
    with path.open(newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().startswith("#"):
                continue
            try:
                cid, idx, x, y = int(rec[0]), int(rec[1]), float(rec[2]), float(rec[3])
            except (ValueError, IndexError):
                if rows:
                    raise ConfigError(f"malformed row in {path}: {rec}")
                continue  # header
            rows.setdefault(cid, []).append((idx, x, y))
    if not rows:
        raise ConfigError(f"{path} holds no vertices")
    curves = []
    for cid in sorted(rows):
        X = np.array([(x, y) for _, x, y in sorted(rows[cid])])
        curves.append(PolygonalCurve(X) if closed else X)
    return curves


GENERATORS = {
    "circle": circle,
    "star": star,
    "tube": tube,
    "annulus": annulus,
    "four_circles": four_circles,
    "two_ovals": two_ovals,
    "dumbbell": dumbbell,
}


def generate_shape(name: str, n: int, **params) -> list[PolygonalCurve]:
    """Closed-curve scenario by name, or ``file:<path>`` for a vertex CSV."""
    if name.startswith("file:"):
        return load_csv(name[5:])
    if name in OPEN_GENERATORS:
        raise ConfigError(f"{name} is an open curve; use halfplane mode")
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ConfigError(f"unknown shape {name!r}; choose from "
                          f"{', '.join(sorted([*GENERATORS, 'lshape']))} or file:<path>") from None
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise ConfigError(f"N must be an integer >= 3, got {n!r}")
    try:
        return gen(int(n), **params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for shape {name!r}: {exc}") from None
