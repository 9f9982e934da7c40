"""Polygonal curves and their discrete differential geometry.

Vertices are stored 0-based: ``vertices[k]`` is the (k+1)-th vertex. For a
closed curve, edge ``k`` runs from ``vertices[k-1]`` to ``vertices[k]`` (so
edge 0 is the closing edge from the last vertex to the first), and the outer
angle at vertex ``k`` sits between edge ``k`` and edge ``k+1``. With this
layout the discrete curvature of edge ``k`` combines the half-angle tangents
of its two end vertices, ``k-1`` and ``k``.

All quantities are returned as struct-of-arrays dataclasses rather than lists
of per-edge objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    DegenerateEdgeError,
    GeometryError,
    SelfIntersectionError,
    SharpAngleError,
    UnsupportedOperationError,
)

EPS_ANGLE = 1e-6


def cyc_prev(a: np.ndarray) -> np.ndarray:
    """a[k-1] at position k, periodically (cyc_prev(a) without its overhead)."""
    return np.concatenate((a[-1:], a[:-1]))


def cyc_next(a: np.ndarray) -> np.ndarray:
    """a[k+1] at position k, periodically."""
    return np.concatenate((a[1:], a[:1]))


def perp(a: np.ndarray) -> np.ndarray:
    """(a, b) -> (b, -a), applied along the last axis."""
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    out[..., 0] = a[..., 1]
    out[..., 1] = -a[..., 0]
    return out


@dataclass(frozen=True, eq=False)
class PolygonalCurve:
    """An ordered vertex list, closed (periodic) or open.

    Closed curves need at least 3 vertices, open ones at least 2. Consecutive
    vertices may not coincide. ``check_simple`` runs the O(N^2) self-intersection
    test on closed curves; the time stepper skips it between topology events.
    """

    vertices: np.ndarray
    closed: bool = True
    check_simple: bool = field(default=True, repr=False)

    def __post_init__(self):
        X = np.array(self.vertices, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2:
            raise GeometryError(f"vertices must have shape (N, 2), got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise GeometryError("vertices contain NaN or Inf")
        n_min = 3 if self.closed else 2
        if len(X) < n_min:
            raise GeometryError(f"{'closed' if self.closed else 'open'} curve needs "
                                f">= {n_min} vertices, got {len(X)}")
        X.setflags(write=False)
        object.__setattr__(self, "vertices", X)
        r = _edge_lengths(X, self.closed)
        bad = np.flatnonzero(r == 0.0)
        if bad.size:
            raise DegenerateEdgeError(int(bad[0]))
        if self.closed and self.check_simple and not is_simple(X):
            raise SelfIntersectionError("closed curve is not simple")

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def with_vertices(self, vertices: np.ndarray, check_simple: bool = False) -> PolygonalCurve:
        return PolygonalCurve(vertices, closed=self.closed, check_simple=check_simple)

    def reversed(self) -> PolygonalCurve:
        return PolygonalCurve(self.vertices[::-1].copy(), closed=self.closed,
                              check_simple=False)

    @property
    def orientation(self) -> int:
        """+1 for counterclockwise, -1 for clockwise (closed curves only)."""
        return 1 if area(self) > 0 else -1


@dataclass(frozen=True)
class EdgeFrames:
    r: np.ndarray         # (E,) edge lengths
    t: np.ndarray         # (E, 2) unit tangents
    n: np.ndarray         # (E, 2) unit normals, n = t^perp
    midpoint: np.ndarray  # (E, 2)

    def __len__(self) -> int:
        return len(self.r)


@dataclass(frozen=True)
class VertexFrames:
    phi: np.ndarray
    cos_half: np.ndarray
    sin_half: np.ndarray
    tan_half: np.ndarray
    N: np.ndarray
    T: np.ndarray

    def __len__(self) -> int:
        return len(self.phi)


def _edge_lengths(X: np.ndarray, closed: bool) -> np.ndarray:
    d = X - cyc_prev(X) if closed else np.diff(X, axis=0)
    return np.hypot(d[:, 0], d[:, 1])


def edge_frames(curve: PolygonalCurve) -> EdgeFrames:
    """Edge lengths, tangents, normals and midpoints.

    Closed curves have one edge per vertex (edge k: X[k-1] -> X[k]); open
    curves have N-1 edges (edge k: X[k] -> X[k+1]).
    """
    X = curve.vertices
    prev = cyc_prev(X) if curve.closed else X[:-1]
    nxt = X if curve.closed else X[1:]
    d = nxt - prev
    r = np.hypot(d[:, 0], d[:, 1])
    bad = np.flatnonzero(r == 0.0)
    if bad.size:
        raise DegenerateEdgeError(int(bad[0]))
    t = d / r[:, None]
    return EdgeFrames(r=r, t=t, n=perp(t), midpoint=0.5 * (prev + nxt))


def _signed_turn(t_a: np.ndarray, t_b: np.ndarray) -> np.ndarray:
    dot = np.clip(np.einsum("ij,ij->i", t_a, t_b), -1.0, 1.0)
    s = np.sign(np.einsum("ij,ij->i", t_a, perp(t_b)))
    return s * np.arccos(dot)


def outer_angles(curve: PolygonalCurve, frames: EdgeFrames | None = None) -> np.ndarray:
    """Signed turning angle at each vertex, positive where a CCW curve is convex.

    Closed curves: one angle per vertex, between edges k and k+1. Open curves:
    the N-2 interior vertices only.
    """
    f = frames if frames is not None else edge_frames(curve)
    if curve.closed:
        return _signed_turn(f.t, cyc_next(f.t))
    return _signed_turn(f.t[:-1], f.t[1:])


def _check_sharp(phi: np.ndarray, eps: float) -> None:
    bad = np.flatnonzero(np.abs(phi) >= np.pi - eps)
    if bad.size:
        k = int(bad[0])
        raise SharpAngleError(k, float(phi[k]))


def half_angles(phi: np.ndarray, eps_angle: float = EPS_ANGLE):
    _check_sharp(phi, eps_angle)
    c = np.cos(0.5 * phi)
    s = np.sin(0.5 * phi)
    return c, s, s / c


def discrete_curvature(curve: PolygonalCurve, frames: EdgeFrames | None = None,
                       eps_angle: float = EPS_ANGLE) -> np.ndarray:
    """Edge curvature (tan_{k-1} + tan_k) / r_k, attached to edge midpoints."""
    if not curve.closed:
        raise UnsupportedOperationError("discrete_curvature requires a closed curve")
    f = frames if frames is not None else edge_frames(curve)
    _, _, tan = half_angles(outer_angles(curve, f), eps_angle)
    return (tan + cyc_prev(tan)) / f.r


def vertex_frames(curve: PolygonalCurve, frames: EdgeFrames | None = None,
                  eps_angle: float = EPS_ANGLE) -> VertexFrames:
    """Vertex normals/tangents N = (n_k + n_{k+1}) / (2 cos_k), likewise T."""
    if not curve.closed:
        raise UnsupportedOperationError("vertex_frames requires a closed curve")
    f = frames if frames is not None else edge_frames(curve)
    phi = outer_angles(curve, f)
    c, s, tan = half_angles(phi, eps_angle)
    n_next = cyc_next(f.n)
    t_next = cyc_next(f.t)
    return VertexFrames(phi=phi, cos_half=c, sin_half=s, tan_half=tan,
                        N=(f.n + n_next) / (2 * c)[:, None],
                        T=(f.t + t_next) / (2 * c)[:, None])


def length(curve: PolygonalCurve) -> float:
    return float(_edge_lengths(curve.vertices, curve.closed).sum())


def area(curve: PolygonalCurve) -> float:
    """Signed shoelace area, positive for counterclockwise curves."""
    if not curve.closed:
        raise UnsupportedOperationError("area is only defined for closed curves")
    return shoelace(curve.vertices)


def shoelace(X: np.ndarray) -> float:
    Xp = cyc_prev(X)
    return 0.5 * float(np.sum(Xp[:, 0] * X[:, 1] - Xp[:, 1] * X[:, 0]))


def centroid(curve: PolygonalCurve) -> np.ndarray:
    X = curve.vertices
    Xp = cyc_prev(X)
    cross = Xp[:, 0] * X[:, 1] - Xp[:, 1] * X[:, 0]
    a = 0.5 * cross.sum()
    return np.array([np.sum((Xp[:, 0] + X[:, 0]) * cross),
                     np.sum((Xp[:, 1] + X[:, 1]) * cross)]) / (6.0 * a)


def winding_numbers(points: np.ndarray, polygons) -> np.ndarray:
    """Total winding number of each point with respect to a set of closed polygons.

    Signed upward/downward crossing count of a horizontal ray; points exactly
    on an edge get an arbitrary but deterministic answer.
    """
    P = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    total = np.zeros(len(P), dtype=np.int64)
    for poly in polygons:
        X = poly.vertices if isinstance(poly, PolygonalCurve) else np.asarray(poly, float)
        X = np.ascontiguousarray(X)
        _kernels.crossings(P, cyc_prev(X), X, total)
    return total.astype(float)


def segment_distances(P0: np.ndarray, P1: np.ndarray, Q0: np.ndarray, Q1: np.ndarray) -> np.ndarray:
    """Pairwise minimum distances between segments [P0_i, P1_i] and [Q0_j, Q1_j].

    Returns an (I, J) array; intersecting segments give 0.
    """
    P0 = P0[:, None, :]; P1 = P1[:, None, :]
    Q0 = Q0[None, :, :]; Q1 = Q1[None, :, :]

    def pt_seg(p, a, b):
        ab = b - a
        denom = np.maximum(np.sum(ab * ab, axis=-1), 1e-300)
        u = np.clip(np.sum((p - a) * ab, axis=-1) / denom, 0.0, 1.0)
        c = a + u[..., None] * ab
        return np.hypot(*(p - c).transpose(2, 0, 1))

    d = np.minimum(np.minimum(pt_seg(P0, Q0, Q1), pt_seg(P1, Q0, Q1)),
                   np.minimum(pt_seg(Q0, P0, P1), pt_seg(Q1, P0, P1)))
    hit = _segments_cross(P0, P1, Q0, Q1)
    return np.where(hit, 0.0, d)


def _orient(a, b, c):
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - \
        (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def _segments_cross(P0, P1, Q0, Q1):
    o1 = _orient(P0, P1, Q0)
    o2 = _orient(P0, P1, Q1)
    o3 = _orient(Q0, Q1, P0)
    o4 = _orient(Q0, Q1, P1)
    return (o1 * o2 < 0) & (o3 * o4 < 0)


def is_simple(X: np.ndarray, chunk: int = 1024) -> bool:
    """True if the closed polygon through X has no crossing non-adjacent edges.

    Touching (a zero orientation) is treated as a crossing only when two
    non-adjacent segments actually overlap at a point.
    """
    X = np.asarray(X, dtype=float)
    n = len(X)
    A = cyc_prev(X)
    idx = np.arange(n)
    for s in range(0, n, chunk):
        rows = idx[s:s + chunk]
        a0 = A[rows][:, None, :]; a1 = X[rows][:, None, :]
        b0 = A[None, :, :]; b1 = X[None, :, :]
        o1 = _orient(a0, a1, b0); o2 = _orient(a0, a1, b1)
        o3 = _orient(b0, b1, a0); o4 = _orient(b0, b1, a1)
        cross = (o1 * o2 <= 0) & (o3 * o4 <= 0)
        # collinear non-overlapping segments also give zero products; filter by bbox overlap
        bbox = ((np.minimum(a0[..., 0], a1[..., 0]) <= np.maximum(b0[..., 0], b1[..., 0]))
                & (np.minimum(b0[..., 0], b1[..., 0]) <= np.maximum(a0[..., 0], a1[..., 0]))
                & (np.minimum(a0[..., 1], a1[..., 1]) <= np.maximum(b0[..., 1], b1[..., 1]))
                & (np.minimum(b0[..., 1], b1[..., 1]) <= np.maximum(a0[..., 1], a1[..., 1])))
        gap = np.abs(rows[:, None] - idx[None, :])
        gap = np.minimum(gap, n - gap)
        if np.any(cross & bbox & (gap > 1)):
            return False
    return True
