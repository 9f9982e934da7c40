"""Open curves in the upper half plane with both ends on the x-axis.

Vertices X[0] .. X[N-1]; the ends sit on the axis and may slide along it.
Closing the polygon with the axis edge X[N-1] -> X[0] gives a CCW region,
so the closed-curve frames apply unchanged to the N-1 curve edges 1 .. N-1.

Every charge is paired with its reflection across the axis, which makes both
potentials even in x_2 and gives a homogeneous Neumann condition on the axis.
Interior charges use a far dummy at 1000 y; exterior ones keep the dummy at
X* - (d/2) n.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import mfs
from .errors import (
    ConfigError,
    GeometryError,
    MskflowError,
    PlacementError,
    StepError,
    TangentialContactError,
)
from .evolve import MetricsRecord, StepParams, timestep
from .geometry import (
    EPS_ANGLE,
    PolygonalCurve,
    cyc_next,
    cyc_prev,
    discrete_curvature,
    edge_frames,
    shoelace,
    vertex_frames,
    winding_numbers,
)

logger = logging.getLogger(__name__)

FAR_DUMMY = 1000.0
MIN_CONTACT = 1e-3


class HalfPlaneCurve:
    """Open polygon with X[0].y = X[-1].y = 0 and interior vertices above the axis."""

    __slots__ = ("vertices", "closed")

    def __init__(self, vertices, check_simple: bool = True):
        X = np.array(vertices, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2:
            raise GeometryError(f"vertices must have shape (N, 2), got {X.shape}")
        if len(X) < 3:
            raise GeometryError("a half-plane curve needs at least 3 vertices")
        if X[0, 1] != 0.0 or X[-1, 1] != 0.0:
            raise GeometryError("end points must lie on the x-axis")
        if np.any(X[1:-1, 1] <= 0.0):
            k = int(np.flatnonzero(X[1:-1, 1] <= 0.0)[0]) + 1
            raise GeometryError(f"vertex {k} is not strictly above the axis")
        X.setflags(write=False)
        self.vertices = X
        self.closed = PolygonalCurve(X, closed=True, check_simple=check_simple)
        if shoelace(X) <= 0:
            raise GeometryError("vertices must run counterclockwise around the enclosed region")

    @property
    def n(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class HalfPlaneFrames:
    r: np.ndarray          # curve edges 1..N-1
    t: np.ndarray
    n: np.ndarray
    midpoint: np.ndarray
    cos_half: np.ndarray   # interior vertices 1..N-2
    sin_half: np.ndarray
    N: np.ndarray
    T: np.ndarray
    tan_half: np.ndarray


def hp_frames(curve: HalfPlaneCurve, eps_angle: float = EPS_ANGLE) -> HalfPlaneFrames:
    ef = edge_frames(curve.closed)
    vf = vertex_frames(curve.closed, ef, eps_angle)
    inner = slice(1, -1)
    return HalfPlaneFrames(ef.r[1:], ef.t[1:], ef.n[1:], ef.midpoint[1:],
                           vf.cos_half[inner], vf.sin_half[inner], vf.N[inner], vf.T[inner],
                           vf.tan_half[inner])


END_CURVATURE = ("mirror", "doubled")


def hp_curvature(curve: HalfPlaneCurve, frames: HalfPlaneFrames | None = None,
                 eps_angle: float = EPS_ANGLE, mode: str = "mirror") -> np.ndarray:
    """Curvature on edges 1..N-1.

    Interior edges use the closed-curve formula. The two edges touching the
    axis differ by ``mode``:

    * ``"doubled"``: 2 tan / r with the half angle of the single interior
      vertex, so the contact angle never enters;
    * ``"mirror"``: the end point counts as a vertex of the curve doubled by
      reflection, whose half turning angle is pi/2 - theta for contact angle
      theta. This gives the end point a restoring force toward 90 degrees.
    """
    if mode not in END_CURVATURE:
        raise ConfigError(f"end_curvature must be one of {END_CURVATURE}, got {mode!r}")
    f = frames if frames is not None else hp_frames(curve, eps_angle)
    kappa = discrete_curvature(curve.closed, None, eps_angle)[1:].copy()
    if mode == "doubled":
        kappa[0] = 2.0 * f.tan_half[0] / f.r[0]
        kappa[-1] = 2.0 * f.tan_half[-1] / f.r[-1]
    else:
        # cot(theta) with cos(theta) = -t_x and sin(theta) = t_y
        cot0 = -f.t[0, 0] / f.t[0, 1]
        cot1 = f.t[-1, 0] / f.t[-1, 1]
        kappa[0] = (cot0 + f.tan_half[0]) / f.r[0]
        kappa[-1] = (cot1 + f.tan_half[-1]) / f.r[-1]
    return kappa


def hp_collocation(frames: HalfPlaneFrames) -> mfs.Collocation:
    return mfs.Collocation(frames.midpoint, frames.n, frames.r,
                           np.zeros(len(frames.r), dtype=int))


def hp_place(curve: HalfPlaneCurve, side: str, d=None, frames: HalfPlaneFrames | None = None,
             validate: bool = True) -> mfs.ChargePlacement:
    """Mirrored placement; ``d`` defaults to 1/sqrt(number of curve edges)."""
    if side not in ("interior", "exterior"):
        raise ValueError(f"side must be 'interior' or 'exterior', got {side!r}")
    f = frames if frames is not None else hp_frames(curve)
    m = len(f.r)
    d = 1.0 / np.sqrt(m) if d is None else float(d)
    if d <= 0:
        raise ConfigError("charge offset d must be positive")
    dd = np.full(m, d)
    if side == "interior":
        y = f.midpoint + d * f.n
        z = FAR_DUMMY * y
    else:
        y = f.midpoint - d * f.n
        z = f.midpoint - 0.5 * d * f.n
    pl = mfs.ChargePlacement(side, y, z, dd, mirrored=True)
    if validate:
        _check_hp_placement(curve, pl)
    return pl


def _check_hp_placement(curve: HalfPlaneCurve, pl: mfs.ChargePlacement) -> None:
    """No source (mirrors included) may lie in the domain the potential lives in.

    The interior domain is the region enclosed with the axis; the exterior
    one is the rest of the upper half plane.
    """
    pts = pl.points
    inside = np.rint(winding_numbers(pts, [curve.closed])) != 0
    if pl.side == "interior":
        bad = inside
    else:
        bad = (pts[:, 1] > 0) & ~inside
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0]) % len(pl.y)
        raise PlacementError(f"{pl.side} charge point for curve edge {k + 1} lies inside "
                             "the solution domain; use a smaller offset")


def hp_solve(curve: HalfPlaneCurve, side: str, *, d=None, frames=None, kappa=None,
             validate: bool = True, refine: bool = False):
    """Solve one side; returns (ChargeSolution, placement)."""
    f = frames if frames is not None else hp_frames(curve)
    k = kappa if kappa is not None else hp_curvature(curve, f)
    pl = hp_place(curve, side, d, f, validate)
    sol = mfs.solve_system(mfs.build_system(hp_collocation(f), pl), side, k, refine=refine)
    return sol, pl


def neumann_residual(sol: mfs.ChargeSolution, placement: mfs.ChargePlacement,
                     xs) -> float:
    """max |dU/dy| / max |grad U| over axis points (0 when the gradient vanishes)."""
    pts = np.column_stack([np.asarray(xs, float), np.zeros(len(xs))])
    g = mfs.gradient(sol, placement, pts)
    top = float(np.max(np.abs(g[:, 1])))
    if top == 0.0:
        return 0.0
    return top / float(np.max(np.hypot(g[:, 0], g[:, 1])))


def contact_angles(curve: HalfPlaneCurve, frames: HalfPlaneFrames | None = None) -> tuple[float, float]:
    """Angles (radians) between the curve and the axis, measured inside the region."""
    f = frames if frames is not None else hp_frames(curve)
    c0 = np.clip(-f.t[0, 0], -1.0, 1.0)
    c1 = np.clip(-f.t[-1, 0], -1.0, 1.0)
    return float(np.arccos(c0)), float(np.arccos(c1))


def hp_endpoint_velocity(w_first: float, w_last: float, frames: HalfPlaneFrames,
                         min_angle: float = MIN_CONTACT) -> tuple[float, float]:
    """Signed x-speeds of X[0] and X[N-1].

    The end point slides so that the adjacent edge moves with normal speed w:
    s (e1 . n) = w with e1 . n = t_y. The magnitude is w / sin(theta).
    """
    ty0, ty1 = float(frames.t[0, 1]), float(frames.t[-1, 1])
    for ty, where in ((ty0, "first"), (ty1, "last")):
        if abs(ty) < np.sin(min_angle):
            raise TangentialContactError(
                f"{where} end point: contact angle {np.degrees(np.arcsin(abs(ty))):.3g} deg "
                "is too close to tangential")
    return w_first / ty0, w_last / ty1


@dataclass(frozen=True)
class UDMResult:
    W: np.ndarray          # all N vertices, W[0] = W[-1] = 0
    ldot: float            # kinematic length rate used for the targets
    ldot_curvature: float  # sum kappa w r
    closure: float         # mismatch left on the last edge


def hp_udm(frames: HalfPlaneFrames, kappa, w, V, s_first: float, s_last: float,
           omega: float) -> UDMResult:
    """Tangential speeds for an open curve with W fixed to 0 at both ends.

    Target edge rates rdot_k = Ldot/(N-1) + (L/(N-1) - r_k) omega are met on
    edges 1 .. N-2 by forward substitution from the first end point; the
    last edge takes what is left and the mismatch is returned as ``closure``.
    Ldot is the length rate implied by the normal motion alone (W cancels
    out of it), which makes the closure vanish up to rounding.
    """
    r = frames.r
    m = len(r)
    L = float(r.sum())
    Vs = np.asarray(V, float) * frames.sin_half
    ends = -s_first * frames.t[0, 0] + s_last * frames.t[-1, 0]
    ldot = float(2.0 * Vs.sum() + ends)
    target = ldot / m + (L / m - r) * omega
    Wc = np.zeros(m - 1)   # W_k cos_k at interior vertices 1 .. N-2
    if m > 1:
        rhs = target[:-1].copy()
        rhs[0] += s_first * frames.t[0, 0] - Vs[0]
        if m > 2:
            rhs[1:] -= Vs[1:] + Vs[:-1]
        Wc = np.cumsum(rhs)
    W = np.zeros(m + 1)
    W[1:-1] = Wc / frames.cos_half
    last = s_last * frames.t[-1, 0] + (Vs[-1] - Wc[-1] if m > 1 else -s_first * frames.t[0, 0])
    closure = float(target[-1] - last)
    return UDMResult(W, ldot, float(np.sum(kappa * w * r)), closure)


@dataclass(frozen=True)
class HalfPlaneFields:
    kappa: np.ndarray
    w: np.ndarray
    V: np.ndarray          # interior vertices
    W: np.ndarray          # all vertices
    s_first: float
    s_last: float
    udm: UDMResult
    sol_int: mfs.ChargeSolution
    sol_ext: mfs.ChargeSolution
    neumann: float
    angles: tuple


@dataclass(frozen=True)
class HalfPlaneState:
    curve: HalfPlaneCurve
    params: StepParams = field(default_factory=StepParams)
    time: float = 0.0
    step: int = 0
    last_metrics: tuple = ()
    last_fields: HalfPlaneFields | None = None
    end_curvature: str = "mirror"


def hp_fields(state: HalfPlaneState, neumann_samples: int = 10) -> HalfPlaneFields:
    p = state.params
    c = state.curve
    f = hp_frames(c)
    kappa = hp_curvature(c, f, mode=state.end_curvature)
    d = p.d_policy if isinstance(p.d_policy, (int, float)) else None
    si, pi = hp_solve(c, "interior", d=d, frames=f, kappa=kappa,
                      validate=p.validate_placement, refine=p.refine)
    se, pe = hp_solve(c, "exterior", d=d, frames=f, kappa=kappa,
                      validate=p.validate_placement, refine=p.refine)
    w = p.sigma_i * (-si.dudn) + p.sigma_e * se.dudn
    V = (w[:-1] + w[1:]) / (2.0 * f.cos_half)
    s0, s1 = hp_endpoint_velocity(w[0], w[-1], f)
    udm = hp_udm(f, kappa, w, V, s0, s1, p.omega_factor * c.n)
    x0, x1 = c.vertices[:, 0].min(), c.vertices[:, 0].max()
    span = x1 - x0
    xs = np.linspace(x0 - span, x1 + span, neumann_samples)
    neu = max(neumann_residual(si, pi, xs), neumann_residual(se, pe, xs))
    return HalfPlaneFields(kappa, w, V, udm.W, s0, s1, udm, si, se, neu, contact_angles(c, f))


def hp_step(state: HalfPlaneState) -> HalfPlaneState:
    c = state.curve
    dt = timestep(state.params, c.n)
    try:
        fl = hp_fields(state)
    except MskflowError as exc:
        raise StepError(str(exc), step=state.step, curve_id=0, snapshot=state, cause=exc) from exc
    f = hp_frames(c)
    X = c.vertices.copy()
    X[1:-1] += dt * (fl.V[:, None] * f.N + fl.W[1:-1, None] * f.T)
    X[0, 0] += dt * fl.s_first
    X[-1, 0] += dt * fl.s_last
    if not np.all(np.isfinite(X)):
        raise StepError("non-finite vertex positions", step=state.step, curve_id=0, snapshot=state)
    if np.any(X[1:-1, 1] <= 0.0):
        raise StepError("an interior vertex crossed the axis", step=state.step,
                        curve_id=0, snapshot=state)
    try:
        new = HalfPlaneCurve(X, check_simple=False)
    except MskflowError as exc:
        raise StepError(str(exc), step=state.step, curve_id=0, snapshot=state, cause=exc) from exc
    rec = MetricsRecord(
        step=state.step, t=state.time, curve_id=0, L=float(f.r.sum()), A=shoelace(c.vertices),
        kappa_min=float(fl.kappa.min()), kappa_max=float(fl.kappa.max()),
        maxQ_int=fl.sol_int.max_abs, maxQ_ext=fl.sol_ext.max_abs,
        residual_int=fl.sol_int.residual, residual_ext=fl.sol_ext.residual,
        Ldot=fl.udm.ldot, Adot=_area_rate(c, f, fl), errA=float("nan"))
    return replace(state, curve=new, time=state.time + dt, step=state.step + 1,
                   last_metrics=(rec,), last_fields=fl)


def _area_rate(curve: HalfPlaneCurve, f: HalfPlaneFrames, fl: HalfPlaneFields) -> float:
    """d/dt of the shoelace area for the current vertex velocities."""
    X = curve.vertices
    Xd = np.zeros_like(X)
    Xd[1:-1] = fl.V[:, None] * f.N + fl.W[1:-1, None] * f.T
    Xd[0, 0] = fl.s_first
    Xd[-1, 0] = fl.s_last
    Xn, Xp = cyc_next(X), cyc_prev(X)
    return float(0.5 * np.sum(Xd[:, 0] * (Xn[:, 1] - Xp[:, 1]) - Xd[:, 1] * (Xn[:, 0] - Xp[:, 0])))


@dataclass
class HalfPlaneRun:
    state: HalfPlaneState
    metrics: list = field(default_factory=list)
    angles: list = field(default_factory=list)        # (t, theta_first, theta_last)
    neumann_max: float = 0.0
    closure_max: float = 0.0
    error: StepError | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def hp_run(state: HalfPlaneState, t_end: float | None = None, hooks=(), *,
           steps: int | None = None, record_every: int = 1) -> HalfPlaneRun:
    if t_end is None and steps is None:
        raise ConfigError("run needs t_end or steps")
    res = HalfPlaneRun(state)
    n0 = state.step
    while True:
        if steps is not None and state.step - n0 >= steps:
            break
        if t_end is not None and state.time >= t_end * (1 - 1e-12):
            break
        try:
            state = hp_step(state)
        except StepError as exc:
            res.error = exc
            logger.error("%s", exc)
            break
        fl = state.last_fields
        res.neumann_max = max(res.neumann_max, fl.neumann)
        res.closure_max = max(res.closure_max, abs(fl.udm.closure))
        if record_every and (state.step - 1 - n0) % record_every == 0:
            res.metrics.extend(state.last_metrics)
            res.angles.append((state.last_metrics[0].t, *fl.angles))
        for h in hooks:
            h(state)
        res.state = state
    res.state = state
    return res
