"""Inner loops compiled with numba when it is installed.

``accumulate`` adds sign * log|x_i - p_j|^2 to G and the matching normal
derivative (without the 1/2pi factor) to Hn. It returns False when a target
coincides with a source. ``crossings`` adds the signed ray-crossing count of
one polygon to a winding-number total.
"""

from __future__ import annotations

import math

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None


def _accumulate_py(x, n, pts, sign, G, Hn):
    dx = x[:, 0:1] - pts[:, 0]
    dy = x[:, 1:2] - pts[:, 1]
    r2 = dx * dx + dy * dy
    if np.any(r2 == 0.0):
        return False
    G += sign * np.log(r2)
    Hn += sign * (dx * n[:, 0:1] + dy * n[:, 1:2]) / r2
    return True


def _accumulate_loop(x, n, pts, sign, G, Hn):
    M = x.shape[0]
    K = pts.shape[0]
    for i in range(M):
        xi = x[i, 0]
        yi = x[i, 1]
        nx = n[i, 0]
        ny = n[i, 1]
        for j in range(K):
            dx = xi - pts[j, 0]
            dy = yi - pts[j, 1]
            r2 = dx * dx + dy * dy
            if r2 == 0.0:
                return False
            G[i, j] += sign * math.log(r2)
            Hn[i, j] += sign * (dx * nx + dy * ny) / r2
    return True


def _crossings_py(P, A, B, total):
    ax, ay, bx, by = A[:, 0], A[:, 1], B[:, 0], B[:, 1]
    for s in range(0, len(P), 2048):
        px = P[s:s + 2048, 0:1]
        py = P[s:s + 2048, 1:2]
        side = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        up = (ay <= py) & (by > py) & (side > 0)
        down = (by <= py) & (ay > py) & (side < 0)
        total[s:s + 2048] += up.sum(axis=1) - down.sum(axis=1)


def _crossings_loop(P, A, B, total):
    for i in range(P.shape[0]):
        px = P[i, 0]
        py = P[i, 1]
        w = 0
        for k in range(A.shape[0]):
            ax = A[k, 0]
            ay = A[k, 1]
            bx = B[k, 0]
            by = B[k, 1]
            if ay <= py:
                if by > py and (bx - ax) * (py - ay) - (by - ay) * (px - ax) > 0:
                    w += 1
            elif by <= py and (bx - ax) * (py - ay) - (by - ay) * (px - ax) < 0:
                w -= 1
        total[i] += w


if numba is not None:
    accumulate = numba.njit(cache=True)(_accumulate_loop)
    crossings = numba.njit(cache=True)(_crossings_loop)
else:  # pragma: no cover
    accumulate = _accumulate_py
    crossings = _crossings_py
