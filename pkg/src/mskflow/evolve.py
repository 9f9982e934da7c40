"""Explicit time stepping of closed polygonal interfaces.

One step: discrete curvature per edge, interior and exterior charge solves,
edge normal speeds, vertex normal speeds, tangential redistribution, then
X^{n+1} = X^n + dt (V N + W T). Topology surgery happens between steps in
:func:`run`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping

import numpy as np

from . import mfs, topology
from .errors import ConfigError, MskflowError, StepError
from .geometry import (
    PolygonalCurve,
    cyc_next,
    discrete_curvature,
    edge_frames,
    shoelace,
    vertex_frames,
)
from .velocity import VelocityField, area_rate_from_arrays, udm_from_arrays

logger = logging.getLogger(__name__)

METRICS_FIELDS = (
    "step", "t", "curve_id", "L", "A", "kappa_min", "kappa_max",
    "maxQ_int", "maxQ_ext", "residual_int", "residual_ext", "Ldot", "Adot", "errA",
)


@dataclass(frozen=True)
class StepParams:
    """Time step policy, material constants and charge placement options.

    ``dt``, when set, overrides the ``dt_coeff * N**-alpha`` policy. ``coupled``
    None means: one coupled system whenever more than one curve is present.
    The winding-number check of the charge placement and the condition
    estimate of the linear solves run every ``validate_every`` steps.
    """

    alpha: float = 2.0
    dt_coeff: float = 0.1
    sigma_i: float = 1.0
    sigma_e: float = 1.0
    d_policy: object = None
    dummy: str = "auto"
    omega_factor: float = 10.0
    coupled: bool | None = None
    monotone_length: bool = False
    dt: float | None = None
    refine: bool = False
    validate_placement: bool = True
    validate_every: int = 1

    def __post_init__(self):
        if self.validate_every < 1:
            raise ConfigError("validate_every must be >= 1")
        if self.dt_coeff <= 0:
            raise ConfigError("dt_coeff must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.sigma_i <= 0 or self.sigma_e <= 0:
            raise ConfigError("sigma_i and sigma_e must be positive")
        if self.monotone_length and self.alpha <= 2:
            raise ConfigError("the monotone-length guarantee needs alpha > 2 "
                              f"(got alpha = {self.alpha})")


@dataclass(frozen=True)
class MetricsRecord:
    step: int
    t: float
    curve_id: int
    L: float
    A: float
    kappa_min: float
    kappa_max: float
    maxQ_int: float
    maxQ_ext: float
    residual_int: float
    residual_ext: float
    Ldot: float
    Adot: float
    errA: float

    def row(self) -> list:
        return [getattr(self, k) for k in METRICS_FIELDS]


@dataclass(frozen=True)
class SimulationState:
    curves: Mapping[int, PolygonalCurve]
    params: StepParams = field(default_factory=StepParams)
    time: float = 0.0
    step: int = 0
    next_id: int = 0
    events: tuple = ()
    last_metrics: tuple = ()
    last_fields: Mapping[int, VelocityField] = field(default_factory=dict)
    last_dt: float | None = None

    @property
    def total_vertices(self) -> int:
        return sum(c.n for c in self.curves.values())


def initial_state(curves: Iterable[PolygonalCurve], params: StepParams | None = None) -> SimulationState:
    cl = list(curves)
    return SimulationState(curves={i: c for i, c in enumerate(cl)},
                           params=params or StepParams(), next_id=len(cl))


def timestep(params: StepParams, N: int) -> float:
    """dt = dt_coeff * N**(-alpha), or the fixed override."""
    if N < 3:
        raise ConfigError(f"time step needs N >= 3, got {N}")
    if params.dt is not None:
        return params.dt
    return params.dt_coeff * float(N) ** (-params.alpha)


def _groups(state: SimulationState) -> list[list[int]]:
    ids = sorted(state.curves)
    coupled = state.params.coupled
    if coupled is None:
        coupled = len(ids) > 1
    return [ids] if coupled else [[i] for i in ids]


@dataclass
class _CurveData:
    ef: object
    vf: object
    kappa: np.ndarray


def compute_fields(state: SimulationState, _frames: dict | None = None):
    """Velocity fields and per-curve metrics for the current configuration.

    Returns (fields, metrics) keyed by curve id. Errors are re-raised as
    StepError tagged with the step and, when attributable, the curve id.
    """
    p = state.params
    validate = p.validate_placement and state.step % p.validate_every == 0
    fields: dict[int, VelocityField] = {}
    metrics: dict[int, MetricsRecord] = {}
    for group in _groups(state):
        data: dict[int, _CurveData] = {}
        for cid in group:
            c = state.curves[cid]
            try:
                ef = edge_frames(c)
                vf = vertex_frames(c, ef)
                kappa = discrete_curvature(c, ef)
            except MskflowError as exc:
                raise StepError(str(exc), step=state.step, curve_id=cid,
                                snapshot=state, cause=exc) from exc
            data[cid] = _CurveData(ef, vf, kappa)
            if _frames is not None:
                _frames[cid] = vf
        curves = [state.curves[cid] for cid in group]
        kappa = np.concatenate([data[cid].kappa for cid in group])
        blame = group[0] if len(group) == 1 else None
        try:
            col = mfs.Collocation(
                np.concatenate([data[c].ef.midpoint for c in group]),
                np.concatenate([data[c].ef.n for c in group]),
                np.concatenate([data[c].ef.r for c in group]),
                np.concatenate([np.full(state.curves[c].n, k) for k, c in enumerate(group)]))
            sols = {}
            for side in ("interior", "exterior"):
                pl = mfs.place_charges(curves, side, p.d_policy, dummy=p.dummy,
                                       validate=validate, col=col)
                sols[side] = mfs.solve_system(mfs.build_system(col, pl), side, kappa,
                                              refine=p.refine, estimate_cond=validate)
        except MskflowError as exc:
            raise StepError(str(exc), step=state.step, curve_id=blame,
                            snapshot=state, cause=exc) from exc
        si, se = sols["interior"], sols["exterior"]
        v_plus, v_minus = mfs.edge_velocities(si, se)
        offset = 0
        for cid in group:
            d = data[cid]
            n = state.curves[cid].n
            sl = slice(offset, offset + n)
            offset += n
            vp, vm = v_plus[sl], v_minus[sl]
            w = p.sigma_i * vp + p.sigma_e * vm
            V = (w + cyc_next(w)) / (2.0 * d.vf.cos_half)
            W = udm_from_arrays(d.ef.r, d.kappa, w, V, d.vf.cos_half, d.vf.sin_half,
                                p.omega_factor * n)
            fields[cid] = VelocityField(vp, vm, w, V, W)
            adot, err = area_rate_from_arrays(d.ef.r, w, W, d.vf.sin_half)
            metrics[cid] = MetricsRecord(
                step=state.step, t=state.time, curve_id=cid,
                L=float(d.ef.r.sum()), A=shoelace(state.curves[cid].vertices),
                kappa_min=float(d.kappa.min()), kappa_max=float(d.kappa.max()),
                maxQ_int=max(abs(si.q0), float(np.max(np.abs(si.q[sl])))),
                maxQ_ext=max(abs(se.q0), float(np.max(np.abs(se.q[sl])))),
                residual_int=si.residual, residual_ext=se.residual,
                Ldot=float(np.sum(d.kappa * w * d.ef.r)), Adot=adot, errA=err)
    return fields, metrics


def step(state: SimulationState) -> SimulationState:
    """Advance every curve by one forward-Euler step."""
    if not state.curves:
        return state
    dt = timestep(state.params, state.total_vertices)
    if state.last_dt is not None and dt != state.last_dt:
        logger.info("step %d: dt changed from %.3g to %.3g (N = %d)",
                    state.step, state.last_dt, dt, state.total_vertices)
    frames: dict = {}
    fields, metrics = compute_fields(state, frames)
    new_curves = {}
    for cid, c in state.curves.items():
        f = fields[cid]
        vf = frames[cid]
        X = c.vertices + dt * (f.V[:, None] * vf.N + f.W[:, None] * vf.T)
        if not np.all(np.isfinite(X)):
            raise StepError("non-finite vertex positions", step=state.step,
                            curve_id=cid, snapshot=state)
        try:
            new_curves[cid] = PolygonalCurve(X, closed=True, check_simple=False)
        except MskflowError as exc:
            raise StepError(str(exc), step=state.step, curve_id=cid,
                            snapshot=state, cause=exc) from exc
    return replace(state, curves=new_curves, time=state.time + dt, step=state.step + 1,
                   last_metrics=tuple(metrics[c] for c in sorted(metrics)),
                   last_fields=fields, last_dt=dt)


@dataclass
class RunResult:
    state: SimulationState
    metrics: list = field(default_factory=list)
    events: list = field(default_factory=list)
    error: StepError | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


Hook = Callable[[SimulationState], None]


def run(state: SimulationState, t_end: float | None = None, hooks: Iterable[Hook] = (), *,
        steps: int | None = None, thresholds=None, metrics_every: int = 1,
        stop: Callable[[SimulationState], bool] | None = None) -> RunResult:
    """Step until ``t_end`` and/or ``steps`` steps, all curves gone, or an error.

    Topology detection runs after every step when ``thresholds`` is given.
    Hooks are called with the state after every step (and topology surgery).
    On a numerical failure the partial result is returned with ``error`` set;
    ``error.snapshot`` holds the pre-step state.
    """
    if t_end is None and steps is None:
        raise ConfigError("run needs t_end or steps")
    if t_end is not None and t_end <= state.time:
        raise ConfigError(f"t_end = {t_end} is not after the current time {state.time}")
    hooks = list(hooks)
    result = RunResult(state)
    n0 = state.step
    n_events = len(state.events)
    while state.curves:
        if steps is not None and state.step - n0 >= steps:
            break
        if t_end is not None and state.time >= t_end * (1 - 1e-12):
            break
        if stop is not None and stop(state):
            break
        try:
            state = step(state)
        except StepError as exc:
            result.error = exc
            logger.error("%s", exc)
            break
        if metrics_every and (state.step - 1 - n0) % metrics_every == 0:
            result.metrics.extend(state.last_metrics)
        if thresholds is not None:
            try:
                state = topology.process(state, thresholds)
            except MskflowError as exc:
                result.error = exc if isinstance(exc, StepError) else StepError(
                    str(exc), step=state.step, snapshot=state, cause=exc)
                break
        for h in hooks:
            h(state)
        result.state = state
    result.state = state
    result.events = list(state.events[n_events:])
    return result
