"""Reference solutions and independent checks.

The concentric annulus R1 < |x| < R2 has a radially symmetric solution: u is
-1/R1 inside the inner circle (a hole, so its curvature is negative), 1/R2
outside the outer one, and logarithmic in between.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, StencilError
from .geometry import PolygonalCurve, centroid


@dataclass(frozen=True)
class AnnulusState:
    R1: float
    R2: float

    def __post_init__(self):
        if not 0 < self.R1 < self.R2:
            raise ConfigError(f"annulus needs 0 < R1 < R2, got R1={self.R1}, R2={self.R2}")


def annulus_potential(state: AnnulusState, x) -> float | np.ndarray:
    x = np.asarray(x, dtype=float)
    rho = np.hypot(x[..., 0], x[..., 1])
    if np.any(rho == 0):
        raise ValueError("annulus potential is not evaluated at the origin")
    R1, R2 = state.R1, state.R2
    mid = -1.0 / R1 + (1.0 / R1 + 1.0 / R2) * np.log(rho / R1) / np.log(R2 / R1)
    u = np.where(rho <= R1, -1.0 / R1, np.where(rho >= R2, 1.0 / R2, mid))
    return float(u) if u.ndim == 0 else u


def annulus_speeds(state: AnnulusState) -> tuple[float, float]:
    """(dR1/dt, dR2/dt); both radii shrink and the enclosed area is conserved."""
    R1, R2 = state.R1, state.R2
    k = (1.0 / R1 + 1.0 / R2) / np.log(R2 / R1)
    return -k / R1, -k / R2


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    vanish_time: float | None   # first time R1 reached zero, if it did


def annulus_trajectory(state: AnnulusState, dt: float, t_end: float) -> Trajectory:
    """Forward Euler for the two radii, stopped at t_end or when R1 hits zero."""
    if dt <= 0:
        raise ConfigError("dt must be positive")
    n = int(np.ceil(t_end / dt - 1e-9))
    t = np.empty(n + 1); r1 = np.empty(n + 1); r2 = np.empty(n + 1)
    t[0], r1[0], r2[0] = 0.0, state.R1, state.R2
    vanish = None
    k = 0
    while k < n:
        a, b = r1[k], r2[k]
        c = (1.0 / a + 1.0 / b) / np.log(b / a)
        na = a - dt * c / a
        t[k + 1], r2[k + 1] = t[k] + dt, b - dt * c / b
        k += 1
        if na <= 0:
            r1[k] = 0.0
            vanish = t[k - 1] + dt * a / (c / a)   # linear interpolation to zero
            break
        r1[k] = na
    return Trajectory(t[:k + 1], r1[:k + 1], r2[:k + 1], vanish)


def polygon_radius(curve: PolygonalCurve) -> float:
    """Mean vertex distance from the polygon centroid."""
    X = curve.vertices
    return float(np.mean(np.hypot(*(X - centroid(curve)).T)))


def harmonic_residual(u: Callable[[np.ndarray], np.ndarray], x, h: float,
                      singular_points=None) -> float:
    """Five-point Laplacian of u at x with spacing h.

    ``singular_points`` (optional) are charge locations; if any lies within
    the stencil box the residual is meaningless and StencilError is raised.
    """
    x = np.asarray(x, dtype=float)
    if h <= 0:
        raise ValueError("h must be positive")
    if singular_points is not None:
        sp = np.atleast_2d(np.asarray(singular_points, float))
        if len(sp) and np.any(np.max(np.abs(sp - x), axis=1) <= h):
            raise StencilError(f"stencil of size {h} around {x.tolist()} crosses a charge point")
    e1, e2 = np.array([h, 0.0]), np.array([0.0, h])
    pts = np.array([x + e1, x - e1, x + e2, x - e2, x])
    vals = np.asarray(u(pts), dtype=float)
    return float((vals[:4].sum() - 4.0 * vals[4]) / (h * h))
