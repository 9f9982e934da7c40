"""Vertex normal velocities and the uniform-distribution tangential velocities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (EPS_ANGLE, PolygonalCurve, VertexFrames, cyc_next, cyc_prev, discrete_curvature,
                       edge_frames, vertex_frames)


@dataclass(frozen=True)
class VelocityField:
    v_plus: np.ndarray   # per edge
    v_minus: np.ndarray  # per edge
    w: np.ndarray        # per edge, sigma_i * v_plus + sigma_e * v_minus
    V: np.ndarray        # per vertex, normal speed
    W: np.ndarray        # per vertex, tangential speed


def combined_speed(v_plus, v_minus, sigma_i: float = 1.0, sigma_e: float = 1.0) -> np.ndarray:
    return sigma_i * np.asarray(v_plus, float) + sigma_e * np.asarray(v_minus, float)


def vertex_normal_velocity(v_plus, v_minus, frames: VertexFrames,
                           sigma_i: float = 1.0, sigma_e: float = 1.0) -> np.ndarray:
    """V_k = (w_k + w_{k+1}) / (2 cos_k) with w = sigma_i v+ + sigma_e v-."""
    w = combined_speed(v_plus, v_minus, sigma_i, sigma_e)
    if len(w) != len(frames):
        raise ValueError(f"{len(w)} edge speeds for {len(frames)} vertices")
    return (w + cyc_next(w)) / (2.0 * frames.cos_half)


def udm_tangential(curve: PolygonalCurve, w, V, *, omega: float | None = None,
                   frames: VertexFrames | None = None, eps_angle: float = EPS_ANGLE) -> np.ndarray:
    """Tangential speeds that relax the edge lengths toward L/N.

    Each edge length is driven toward rdot_k = Ldot/N + (L/N - r_k) omega.
    Writing that in terms of the vertex speeds gives
    W_k cos_k - W_{k-1} cos_{k-1} = psi_k, which is summed up from psi_0 = 0;
    the free constant is fixed by requiring sum_k W_k = 0. ``omega`` defaults
    to 10 N.
    """
    ef = edge_frames(curve)
    vf = frames if frames is not None else vertex_frames(curve, ef, eps_angle)
    kappa = discrete_curvature(curve, ef, eps_angle)
    if omega is None:
        omega = 10.0 * curve.n
    return udm_from_arrays(ef.r, kappa, np.asarray(w, float), np.asarray(V, float),
                           vf.cos_half, vf.sin_half, omega)


def udm_from_arrays(r, kappa, w, V, cos_half, sin_half, omega: float) -> np.ndarray:
    n = len(r)
    L = r.sum()
    ldot = float(np.sum(kappa * w * r))
    Vs = V * sin_half
    psi = ldot / n - Vs - cyc_prev(Vs) + (L / n - r) * omega
    psi[0] = 0.0
    Psi = np.cumsum(psi)
    inv_c = 1.0 / cos_half
    C = -np.sum(Psi * inv_c) / np.sum(inv_c)
    return (Psi + C) * inv_c


def length_derivative(curve: PolygonalCurve, w) -> float:
    """Ldot = sum_k kappa_k w_k r_k."""
    ef = edge_frames(curve)
    return float(np.sum(discrete_curvature(curve, ef) * np.asarray(w, float) * ef.r))


def area_derivative(curve: PolygonalCurve, w, W) -> tuple[float, float]:
    """Adot = sum_k w_k r_k + errA and the errA term itself.

    errA = sum_k (W_k sin_k - (w_{k+1} - w_k)/2) (r_{k+1} - r_k)/2; it vanishes
    when all edges have equal length.
    """
    ef = edge_frames(curve)
    vf = vertex_frames(curve, ef)
    return area_rate_from_arrays(ef.r, np.asarray(w, float), np.asarray(W, float), vf.sin_half)


def area_rate_from_arrays(r, w, W, sin_half) -> tuple[float, float]:
    dr = cyc_next(r) - r
    err = float(np.sum((W * sin_half - 0.5 * (cyc_next(w) - w)) * 0.5 * dr))
    return float(np.sum(w * r)) + err, err
