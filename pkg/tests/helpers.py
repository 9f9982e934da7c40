"""Shared constructors for the test modules."""

from __future__ import annotations

import numpy as np

# criterion id -> (passed, detail); filled by test_acceptance, printed by conftest
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def regular_polygon(n: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> np.ndarray:
    th = phase + 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)])


def star_polygon(n: int, amplitude: float, arms: int, phase: float = 0.0) -> np.ndarray:
    th = phase + 2.0 * np.pi * np.arange(n) / n
    rr = 1.0 + amplitude * np.cos(arms * th)
    return np.column_stack([rr * np.cos(th), rr * np.sin(th)])
