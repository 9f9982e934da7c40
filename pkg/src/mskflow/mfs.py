"""Charge simulation (method of fundamental solutions) for the two Dirichlet problems.

The interior potential is harmonic inside the region bounded by the curves, the
exterior one outside it. Both are written as

    U(x) = Q_0 + sum_j Q_j [E(x - y_j) - E(x - z_j)]

with E the logarithmic fundamental solution, a charge point y_j and a dummy
point z_j placed on the opposite side of the curve along the edge normal. One
extra row forces sum_j Q_j H_j = 0, which makes the flux through the curves
vanish and hence preserves the enclosed area.

Several closed curves can be collocated together (the "coupled" system); they
then share Q_0 and the single flux row. A charge/dummy pair has zero net
charge, so no combination of pairs can carry net flux through one particle or
around a hole; coupled systems therefore default to plain monopoles (the dummy
sent to infinity), for which the flux row is the zero-total-charge condition.

With ``mirrored=True`` every charge is paired with its reflection across the
x-axis, giving a homogeneous Neumann condition there (used by
:mod:`mskflow.halfplane`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence, Union

import numpy as np

from . import _kernels, linsolve
from .errors import PlacementError, SingularEvaluationError
from .geometry import PolygonalCurve, edge_frames, winding_numbers

Side = Literal["interior", "exterior"]
Curves = Union[PolygonalCurve, Sequence[PolygonalCurve]]

_INV_2PI = 1.0 / (2.0 * np.pi)
_INV_4PI = 1.0 / (4.0 * np.pi)


def fundamental_solution(x) -> float | np.ndarray:
    """E(x) = log|x| / (2 pi)."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 == 0.0):
        raise SingularEvaluationError("fundamental solution evaluated at its singularity")
    return np.log(r2) * _INV_4PI


def fundamental_gradient(x) -> np.ndarray:
    """grad E(x) = x / (2 pi |x|^2)."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    if np.any(r2 == 0.0):
        raise SingularEvaluationError("fundamental gradient evaluated at its singularity")
    return x / r2 * _INV_2PI


@dataclass(frozen=True)
class Collocation:
    """Edge midpoints, outward normals and lengths where the Dirichlet data live."""

    midpoint: np.ndarray
    n: np.ndarray
    r: np.ndarray
    owner: np.ndarray  # index of the curve each edge belongs to

    def __len__(self) -> int:
        return len(self.r)


def as_curve_list(curves: Curves) -> list[PolygonalCurve]:
    if isinstance(curves, PolygonalCurve):
        return [curves]
    return list(curves)


def collocation(curves: Curves) -> Collocation:
    mids, ns, rs, owner = [], [], [], []
    for k, c in enumerate(as_curve_list(curves)):
        f = edge_frames(c)
        mids.append(f.midpoint); ns.append(f.n); rs.append(f.r)
        owner.append(np.full(len(f.r), k))
    return Collocation(np.concatenate(mids), np.concatenate(ns),
                       np.concatenate(rs), np.concatenate(owner))


@dataclass(frozen=True)
class ChargePlacement:
    side: Side
    y: np.ndarray               # (K, 2) singular points
    z: np.ndarray | None        # (K, 2) dummy points; None = monopoles
    d: np.ndarray               # (K,) offsets used
    mirrored: bool = False

    def sources(self):
        """(points, signs) for every kernel term, reflections included."""
        terms = [(self.y, 1.0)] if self.z is None else [(self.y, 1.0), (self.z, -1.0)]
        if self.mirrored:
            flip = np.array([1.0, -1.0])
            terms += [(p * flip, s) for p, s in terms]
        return terms

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([p for p, _ in self.sources()])


def resolve_offsets(curves: list[PolygonalCurve], d_policy) -> np.ndarray:
    """Per-edge charge offset d.

    ``None`` / ``"inv_sqrt_n"``: 1/sqrt(N) with N the total collocation count.
    A number: that constant. ``"edge"`` or ``"edge:c"``: c times the mean edge
    length of each curve (c defaults to 1.5).
    """
    counts = [c.n for c in curves]
    total = sum(counts)
    if d_policy is None or d_policy == "inv_sqrt_n":
        return np.full(total, 1.0 / np.sqrt(total))
    if isinstance(d_policy, (int, float)) and not isinstance(d_policy, bool):
        if d_policy <= 0:
            raise ValueError("charge offset d must be positive")
        return np.full(total, float(d_policy))
    if isinstance(d_policy, str) and d_policy.startswith("edge"):
        factor = float(d_policy.split(":", 1)[1]) if ":" in d_policy else 1.5
        out = []
        for c in curves:
            f = edge_frames(c)
            out.append(np.full(c.n, factor * f.r.mean()))
        return np.concatenate(out)
    raise ValueError(f"unknown charge offset policy {d_policy!r}")


def place_charges(curves: Curves, side: Side, d_policy=None, *,
                  dummy: str = "auto", validate: bool = True,
                  col: Collocation | None = None) -> ChargePlacement:
    """Charge and dummy points at distance d and d/2 off each edge midpoint.

    Interior problem: pushed along +n (outside the region); exterior problem:
    along -n (inside it). ``dummy`` is ``"near"`` (dummy at d/2), ``"none"``
    (monopoles) or ``"auto"``: near for a single curve, none for several.
    ``validate`` checks by winding number that every point landed on the
    intended side. ``col`` reuses an already built collocation of ``curves``.
    """
    if side not in ("interior", "exterior"):
        raise ValueError(f"side must be 'interior' or 'exterior', got {side!r}")
    cl = as_curve_list(curves)
    col = col if col is not None else collocation(cl)
    d = resolve_offsets(cl, d_policy)
    sgn = 1.0 if side == "interior" else -1.0
    if dummy == "auto":
        dummy = "near" if len(cl) == 1 else "none"
    if dummy not in ("near", "none"):
        raise ValueError(f"dummy must be 'auto', 'near' or 'none', got {dummy!r}")
    y = col.midpoint + sgn * d[:, None] * col.n
    z = col.midpoint + sgn * 0.5 * d[:, None] * col.n if dummy == "near" else None
    placement = ChargePlacement(side, y, z, d)
    if validate:
        check_placement(cl, placement)
    return placement


def check_placement(curves: list[PolygonalCurve], placement: ChargePlacement) -> None:
    pts = placement.y if placement.z is None else np.concatenate([placement.y, placement.z])
    w = np.rint(winding_numbers(pts, curves))
    inside = w != 0
    wrong = inside if placement.side == "interior" else ~inside
    if np.any(wrong):
        k = int(np.flatnonzero(wrong)[0]) % len(placement.y)
        raise PlacementError(
            f"{placement.side} charge point for edge {k} lies on the wrong side of the "
            f"curve (d = {placement.d[k]:.4g}); use a smaller offset")


def kernel_matrices(x: np.ndarray, placement: ChargePlacement, *, gradient: bool = True):
    """Kernel values G[p, j] and gradient components at targets x.

    G[p, j] = sum over terms of sign * E(x_p - s_j). Returns (G, Gx, Gy), the
    last two None when ``gradient`` is False.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    G = 0.0
    Gx = Gy = 0.0
    for pts, sign in placement.sources():
        dx = x[:, None, 0] - pts[None, :, 0]
        dy = x[:, None, 1] - pts[None, :, 1]
        r2 = dx * dx + dy * dy
        if np.any(r2 == 0.0):
            raise SingularEvaluationError("evaluation point coincides with a charge point")
        G = G + sign * _INV_4PI * np.log(r2)
        if gradient:
            w = sign * _INV_2PI / r2
            Gx = Gx + w * dx
            Gy = Gy + w * dy
    if not gradient:
        return G, None, None
    return G, Gx, Gy


@dataclass(frozen=True)
class CollocationSystem:
    G: np.ndarray    # (M, K) kernel at midpoints
    Hn: np.ndarray   # (M, K) kernel gradient at midpoints dotted with n_i
    H: np.ndarray    # (K,) flux weights, H_j = -sum_i Hn[i, j] r_i


def build_system(col: Collocation, placement: ChargePlacement) -> CollocationSystem:
    """Kernel values G and normal derivatives Hn at the midpoints, plus flux weights H."""
    x = np.ascontiguousarray(col.midpoint)
    nrm = np.ascontiguousarray(col.n)
    G = np.zeros((len(x), len(placement.y)))
    Hn = np.zeros_like(G)
    for pts, sign in placement.sources():
        if not _kernels.accumulate(x, nrm, np.ascontiguousarray(pts), float(sign), G, Hn):
            raise SingularEvaluationError("collocation point coincides with a charge point")
    G *= _INV_4PI
    Hn *= _INV_2PI
    return CollocationSystem(G, Hn, -(col.r @ Hn))


def assemble_from(system: CollocationSystem, side: Side, kappa: np.ndarray):
    M = len(kappa)
    A = np.empty((M + 1, M + 1))
    A[0, 0] = 0.0
    A[0, 1:] = system.H if side == "interior" else -system.H
    A[1:, 0] = 1.0
    A[1:, 1:] = system.G
    rhs = np.concatenate([[0.0], kappa])
    return A, rhs


def assemble(curves: Curves, placement: ChargePlacement, kappa: np.ndarray):
    """The (N+1) x (N+1) collocation system and its right-hand side.

    Row 0 is the flux constraint (negated for the exterior problem), rows
    1..N are Q_0 + sum_j G_ij Q_j = kappa_i.
    """
    col = collocation(curves)
    kappa = np.asarray(kappa, dtype=float)
    if len(kappa) != len(col):
        raise ValueError(f"expected {len(col)} curvature values, got {len(kappa)}")
    return assemble_from(build_system(col, placement), placement.side, kappa)


@dataclass(frozen=True)
class ChargeSolution:
    side: Side
    q0: float
    q: np.ndarray
    residual: float       # relative residual of the linear solve
    ap_residual: float    # |sum_j Q_j H_j|
    dudn: np.ndarray      # grad U(X_i*) . n_i at every collocation point
    cond: float

    @property
    def max_abs(self) -> float:
        return float(max(abs(self.q0), np.max(np.abs(self.q))))


def solve_system(system: CollocationSystem, side: Side, kappa: np.ndarray, *,
                 refine: bool = False, estimate_cond: bool = True) -> ChargeSolution:
    A, rhs = assemble_from(system, side, kappa)
    x, cond = linsolve.solve(A, rhs, refine=refine, return_cond=True,
                             estimate_cond=estimate_cond)
    q = x[1:]
    return ChargeSolution(
        side=side, q0=float(x[0]), q=q,
        residual=linsolve.relative_residual(A, x, rhs),
        ap_residual=float(abs(system.H @ q)),
        dudn=system.Hn @ q, cond=cond)


def solve_charges(curves: Curves, placement: ChargePlacement, kappa: np.ndarray, *,
                  refine: bool = False) -> ChargeSolution:
    col = collocation(curves)
    kappa = np.asarray(kappa, dtype=float)
    if len(kappa) != len(col):
        raise ValueError(f"expected {len(col)} curvature values, got {len(kappa)}")
    return solve_system(build_system(col, placement), placement.side, kappa, refine=refine)


def potential(sol: ChargeSolution, placement: ChargePlacement, x):
    """U(x); scalar for a single point, array for (P, 2) input."""
    x = np.asarray(x, dtype=float)
    G, _, _ = kernel_matrices(x, placement, gradient=False)
    u = sol.q0 + G @ sol.q
    return float(u[0]) if x.ndim == 1 else u


def gradient(sol: ChargeSolution, placement: ChargePlacement, x):
    """grad U(x), shape (2,) for a single point or (P, 2)."""
    x = np.asarray(x, dtype=float)
    _, Gx, Gy = kernel_matrices(x, placement)
    g = np.stack([Gx @ sol.q, Gy @ sol.q], axis=-1)
    return g[0] if x.ndim == 1 else g


def edge_velocities(sol_int: ChargeSolution, sol_ext: ChargeSolution, curves: Curves | None = None):
    """Per-edge normal speeds v+ = -dU+/dn and v- = +dU-/dn at the midpoints."""
    if curves is not None and len(collocation(curves)) != len(sol_int.dudn):
        raise ValueError("solutions were not computed on these curves")
    return -sol_int.dudn, sol_ext.dudn.copy()
