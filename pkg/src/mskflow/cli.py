"""Command line entry point: ``mskflow run``.

Settings come from three layers, later ones winning: built-in defaults, a
flat JSON file given by ``--config``, and explicit flags. Exit status is 0
for a clean finish, 1 for a configuration error and 2 for a numerical
failure (the pre-failure state is written as a snapshot).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import evolve, halfplane, oracle, output, shapes, topology
from .errors import ConfigError, MskflowError, StepError

logger = logging.getLogger("mskflow")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

DEFAULT_N = {
    "circle": 64, "star": 50, "tube": 50, "annulus": 256, "four_circles": 80,
    "two_ovals": 84, "dumbbell": 400, "lshape": 58, "semicircle": 41,
}


@dataclass
class RunConfig:
    shape: str = "circle"
    n: int | None = None
    alpha: float = 2.0
    dt_coeff: float = 0.1
    dt: float | None = None
    sigma_int: float = 1.0
    sigma_ext: float = 1.0
    steps: int | None = None
    t_end: float | None = None
    mode: str = "plane"
    coupled_system: bool | None = None
    area_min: float | None = None
    contact_dist: float | None = None
    neck_width: float | None = None
    neighbor_trim: int = 1
    events: bool = True
    out: str = "out"
    snapshot_every: int = 0
    svg_every: int = 0
    metrics_every: int = 1
    shape_params: dict | None = None
    d_policy: object = None
    dummy: str = "auto"
    omega_factor: float = 10.0
    validate_every: int = 1
    end_curvature: str = "mirror"
    log_level: str = "INFO"

    @classmethod
    def keys(cls) -> set[str]:
        return {f.name for f in fields(cls)}

    def validate(self) -> None:
        if self.mode not in ("plane", "halfplane"):
            raise ConfigError(f"mode must be 'plane' or 'halfplane', got {self.mode!r}")
        if self.steps is None and self.t_end is None:
            raise ConfigError("give --steps or --t-end")
        if self.steps is not None and self.steps < 0:
            raise ConfigError("steps must be >= 0")
        if self.t_end is not None and self.t_end <= 0:
            raise ConfigError("t_end must be positive")
        for name in ("snapshot_every", "svg_every", "metrics_every"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.shape_params is not None and not isinstance(self.shape_params, dict):
            raise ConfigError("shape_params must be a JSON object")
        if self.dummy not in ("auto", "near", "none"):
            raise ConfigError(f"dummy must be auto, near or none, got {self.dummy!r}")
        if self.end_curvature not in halfplane.END_CURVATURE:
            raise ConfigError(f"end_curvature must be one of {halfplane.END_CURVATURE}")
        d = self.d_policy
        ok = (d is None or d == "inv_sqrt_n"
              or (isinstance(d, (int, float)) and not isinstance(d, bool) and d > 0)
              or (isinstance(d, str) and (d == "edge" or d.startswith("edge:"))))
        if isinstance(d, str) and d.startswith("edge:"):
            try:
                ok = float(d[5:]) > 0
            except ValueError:
                ok = False
        if not ok:
            raise ConfigError(f"bad d_policy {d!r}: use a positive number, inv_sqrt_n, "
                              "edge or edge:<factor>")
        if self.log_level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR"):
            raise ConfigError(f"unknown log level {self.log_level!r}")

    def step_params(self) -> evolve.StepParams:
        return evolve.StepParams(
            alpha=self.alpha, dt_coeff=self.dt_coeff, dt=self.dt, sigma_i=self.sigma_int,
            sigma_e=self.sigma_ext, d_policy=self.d_policy, dummy=self.dummy,
            omega_factor=self.omega_factor, coupled=self.coupled_system,
            validate_every=self.validate_every)


def _d_policy(text: str):
    try:
        return float(text)
    except ValueError:
        return text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mskflow", description="Mullins-Sekerka interface evolution "
                "by the charge simulation method.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    r = sub.add_parser("run", help="run one simulation and write its outputs")
    S = argparse.SUPPRESS
    r.add_argument("--config", help="flat JSON file with any of the settings below")
    r.add_argument("--shape", default=S, help="circle, star, tube, annulus, four_circles, "
                   "two_ovals, dumbbell, lshape, semicircle or file:<csv>")
    r.add_argument("--shape-params", dest="shape_params", type=json.loads, default=S,
                   help='JSON object of generator parameters, e.g. \'{"amplitude": 0.3}\'')
    r.add_argument("--n", type=int, default=S, help="total vertex count")
    r.add_argument("--alpha", type=float, default=S)
    r.add_argument("--dt-coeff", dest="dt_coeff", type=float, default=S)
    r.add_argument("--dt", type=float, default=S, help="fixed step, overrides the N policy")
    r.add_argument("--sigma-int", dest="sigma_int", type=float, default=S)
    r.add_argument("--sigma-ext", dest="sigma_ext", type=float, default=S)
    r.add_argument("--steps", type=int, default=S)
    r.add_argument("--t-end", dest="t_end", type=float, default=S)
    r.add_argument("--mode", choices=("plane", "halfplane"), default=S)
    r.add_argument("--coupled-system", dest="coupled_system",
                   action=argparse.BooleanOptionalAction, default=S,
                   help="solve all curves in one system (default: when there are several)")
    r.add_argument("--area-min", dest="area_min", type=float, default=S)
    r.add_argument("--contact-dist", dest="contact_dist", type=float, default=S)
    r.add_argument("--neck-width", dest="neck_width", type=float, default=S)
    r.add_argument("--neighbor-trim", dest="neighbor_trim", type=int, default=S)
    r.add_argument("--events", action=argparse.BooleanOptionalAction, default=S,
                   help="topology surgery between steps (default on)")
    r.add_argument("--out", default=S, help="output directory")
    r.add_argument("--snapshot-every", dest="snapshot_every", type=int, default=S)
    r.add_argument("--svg-every", dest="svg_every", type=int, default=S)
    r.add_argument("--metrics-every", dest="metrics_every", type=int, default=S)
    r.add_argument("--d-policy", dest="d_policy", type=_d_policy, default=S)
    r.add_argument("--dummy", default=S)
    r.add_argument("--omega-factor", dest="omega_factor", type=float, default=S)
    r.add_argument("--validate-every", dest="validate_every", type=int, default=S)
    r.add_argument("--end-curvature", dest="end_curvature", default=S)
    r.add_argument("--log-level", dest="log_level", default=S)
    return p


def load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = set(data) - RunConfig.keys()
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def resolve_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    ns.pop("command")
    path = ns.pop("config", None)
    merged = load_config_file(path) if path else {}
    merged.update(ns)
    try:
        cfg = RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.n is None and not cfg.shape.startswith("file:"):
        cfg.n = DEFAULT_N.get(cfg.shape, 64)
    if cfg.shape in shapes.OPEN_GENERATORS and cfg.mode == "plane" and "mode" not in merged:
        cfg.mode = "halfplane"
    cfg.validate()
    return cfg


class _Writers:
    """Per-step output hook shared by both modes."""

    def __init__(self, cfg: RunConfig, out: Path, curves_of, closed: bool, box):
        self.cfg, self.out, self.curves_of, self.closed, self.box = cfg, out, curves_of, closed, box
        self.metrics = output.MetricsWriter(out / "metrics.csv")

    def snapshot(self, state) -> None:
        output.write_snapshot(self.out / f"snap_{state.step}.csv", self.curves_of(state))

    def frame(self, state) -> None:
        output.write_svg(self.out / f"frame_{state.step}.svg", self.curves_of(state), self.box,
                         closed=self.closed, title=f"t = {state.time:.6g}")

    def start(self, state) -> None:
        if self.cfg.snapshot_every:
            self.snapshot(state)
        if self.cfg.svg_every:
            self.frame(state)

    def __call__(self, state) -> None:
        c = self.cfg
        if c.metrics_every and (state.step - 1) % c.metrics_every == 0:
            self.metrics.write(state.last_metrics)
        if c.snapshot_every and state.step % c.snapshot_every == 0:
            self.snapshot(state)
        if c.svg_every and state.step % c.svg_every == 0:
            self.frame(state)

    def finish(self, state) -> None:
        if self.cfg.snapshot_every and state.step % self.cfg.snapshot_every:
            self.snapshot(state)
        if self.cfg.svg_every and state.step % self.cfg.svg_every:
            self.frame(state)
        self.metrics.close()


class _AnnulusOracle:
    """Steps the exact radii with the simulation's own dt and logs both."""

    def __init__(self, path: Path, r_inner: float, r_outer: float):
        self.R1, self.R2 = r_inner, r_outer
        self.fh = path.open("w")
        self.fh.write("step,t,R1_sim,R2_sim,R1_exact,R2_exact,relerr_R1,relerr_R2\n")
        self.max_err = 0.0

    def __call__(self, state) -> None:
        dt = state.last_dt
        if self.R1 > 0:
            c = (1.0 / self.R1 + 1.0 / self.R2) / np.log(self.R2 / self.R1)
            self.R1, self.R2 = self.R1 - dt * c / self.R1, self.R2 - dt * c / self.R2
        if self.R1 <= 0 or set(state.curves) != {0, 1}:
            self.R1 = 0.0
            return
        r2 = oracle.polygon_radius(state.curves[0])
        r1 = oracle.polygon_radius(state.curves[1])
        e1 = float(abs(r1 - self.R1) / self.R1)
        e2 = float(abs(r2 - self.R2) / self.R2)
        self.R1, self.R2 = float(self.R1), float(self.R2)
        self.max_err = max(self.max_err, e1, e2)
        self.fh.write(f"{state.step},{state.time!r},{r1!r},{r2!r},{self.R1!r},{self.R2!r},"
                      f"{e1!r},{e2!r}\n")

    def close(self):
        self.fh.close()


def _write_failure(out: Path, err: StepError, curves_of) -> None:
    snap = err.snapshot
    if snap is not None:
        output.write_snapshot(out / f"snap_{snap.step}.csv", curves_of(snap))
    (out / "failure.json").write_text(json.dumps(
        {"step": err.step, "curve_id": err.curve_id, "message": str(err),
         "snapshot": f"snap_{snap.step}.csv" if snap is not None else None}, indent=2) + "\n")


def run_plane(cfg: RunConfig, out: Path) -> int:
    params = dict(cfg.shape_params or {})
    curves = shapes.generate_shape(cfg.shape, cfg.n, **params)
    state = evolve.initial_state(curves, cfg.step_params())
    th = None
    if cfg.events:
        th = topology.EventThresholds.defaults(
            curves, area_min=cfg.area_min, contact_dist=cfg.contact_dist,
            neck_width=cfg.neck_width, neighbor_trim=cfg.neighbor_trim)
        logger.info("event thresholds: area_min=%.4g contact_dist=%.4g neck_width=%.4g",
                    th.area_min, th.contact_dist, th.neck_width)
    box = output.view_box([c.vertices for c in curves])
    writers = _Writers(cfg, out, lambda s: s.curves, True, box)
    hooks = [writers]
    orc = None
    if cfg.shape == "annulus":
        orc = _AnnulusOracle(out / "oracle.csv", params.get("r_inner", 1.0),
                             params.get("r_outer", 3.0))
        hooks.append(orc)
    writers.start(state)
    try:
        res = evolve.run(state, cfg.t_end, hooks, steps=cfg.steps, thresholds=th,
                         metrics_every=0)
    finally:
        if orc is not None:
            orc.close()
    writers.finish(res.state)
    output.write_events(out / "events.json", res.state.events)
    summary = {"ok": res.ok, "steps": res.state.step, "t": res.state.time,
               "curves": sorted(res.state.curves), "events": len(res.state.events)}
    if orc is not None:
        summary["annulus_max_relerr"] = orc.max_err
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if not res.ok:
        _write_failure(out, res.error, lambda s: s.curves)
        return EXIT_NUMERIC
    logger.info("finished: %d steps, t = %.6g, %d curves, %d events", res.state.step,
                res.state.time, len(res.state.curves), len(res.state.events))
    return EXIT_OK


def run_halfplane(cfg: RunConfig, out: Path) -> int:
    X = shapes.generate_open(cfg.shape, cfg.n, **(cfg.shape_params or {}))
    curve = halfplane.HalfPlaneCurve(X)
    state = halfplane.HalfPlaneState(curve, cfg.step_params(), end_curvature=cfg.end_curvature)
    box = output.view_box([X])
    writers = _Writers(cfg, out, lambda s: {0: s.curve.vertices}, False, box)
    writers.start(state)
    res = halfplane.hp_run(state, cfg.t_end, [writers], steps=cfg.steps, record_every=0)
    writers.finish(res.state)
    output.write_events(out / "events.json", [])
    f = halfplane.hp_frames(res.state.curve)
    a0, a1 = halfplane.contact_angles(res.state.curve, f)
    kappa = halfplane.hp_curvature(res.state.curve, f, mode=cfg.end_curvature)
    summary = {"ok": res.ok, "steps": res.state.step, "t": res.state.time,
               "contact_angles_deg": [float(np.degrees(a0)), float(np.degrees(a1))],
               "kappa_spread": float(kappa.max() / kappa.min()) if kappa.min() > 0 else None,
               "neumann_max": res.neumann_max, "udm_closure_max": res.closure_max}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if not res.ok:
        _write_failure(out, res.error, lambda s: {0: s.curve.vertices})
        return EXIT_NUMERIC
    logger.info("finished: t = %.6g, contact angles %.2f and %.2f degrees",
                res.state.time, *summary["contact_angles_deg"])
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", level=logging.INFO)
    try:
        cfg = resolve_config(sys.argv[1:] if argv is None else argv)
        logging.getLogger().setLevel(cfg.log_level.upper())
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(vars(cfg), indent=2, default=str) + "\n")
        runner = run_halfplane if cfg.mode == "halfplane" else run_plane
        return runner(cfg, out)
    except ConfigError as exc:
        print(f"mskflow: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StepError as exc:
        print(f"mskflow: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MskflowError as exc:
        # raised before the first step, i.e. by an unusable initial shape
        print(f"mskflow: invalid setup: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
