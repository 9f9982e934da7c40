"""Exception hierarchy shared by every module."""

from __future__ import annotations


class MskflowError(Exception):
    """Base class for all errors raised by the package."""


class GeometryError(MskflowError):
    pass


class DegenerateEdgeError(GeometryError):
    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"zero-length edge at index {index}")


class SharpAngleError(GeometryError):
    def __init__(self, index: int, phi: float):
        self.index = index
        self.phi = phi
        super().__init__(f"outer angle {phi:.6g} rad at vertex {index} is too close to pi")


class UnsupportedOperationError(GeometryError):
    pass


class SelfIntersectionError(GeometryError):
    pass


class SingularMatrixError(MskflowError):
    def __init__(self, pivot_index: int, pivot: float):
        self.pivot_index = pivot_index
        self.pivot = pivot
        super().__init__(f"singular matrix: pivot {pivot:.3g} at index {pivot_index}")


class SingularEvaluationError(MskflowError):
    """A kernel was evaluated at (or numerically on top of) its singular point."""


class PlacementError(MskflowError):
    pass


class StencilError(MskflowError):
    pass


class SurgeryError(MskflowError):
    pass


class TangentialContactError(MskflowError):
    pass


class ConfigError(MskflowError):
    pass


class StepError(MskflowError):
    """A numerical failure during time stepping.

    Carries the step index, the offending curve id (if known) and the
    pre-step state so the failure can be inspected post mortem.
    """

    def __init__(self, message: str, *, step: int, curve_id: int | None = None,
                 snapshot=None, cause: BaseException | None = None):
        self.step = step
        self.curve_id = curve_id
        self.snapshot = snapshot
        self.cause = cause
        where = f"step {step}" + (f", curve {curve_id}" if curve_id is not None else "")
        super().__init__(f"{where}: {message}")
