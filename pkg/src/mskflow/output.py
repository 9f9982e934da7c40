"""Run outputs: metrics CSV, event log, vertex snapshots and SVG frames."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from xml.sax.saxutils import quoteattr

import numpy as np

from .evolve import METRICS_FIELDS

SNAPSHOT_HEADER = ("curve_id", "vertex_index", "x", "y")
SVG_SCALE = 1.5


class MetricsWriter:
    """Append-only metrics.csv with the frozen header."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._fh = self.path.open("w", newline="")
        self._w = csv.writer(self._fh)
        self._w.writerow(METRICS_FIELDS)
        self.rows = 0

    def write(self, records) -> None:
        for rec in records:
            self._w.writerow([_fmt(v) for v in rec.row()])
            self.rows += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_events(path: str | Path, events) -> None:
    Path(path).write_text(json.dumps([e.to_dict() for e in events], indent=2) + "\n")


def write_snapshot(path: str | Path, curves: dict) -> None:
    """``curves`` maps id to an (N, 2) vertex array or anything with ``.vertices``."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SNAPSHOT_HEADER)
        for cid in sorted(curves):
            X = getattr(curves[cid], "vertices", curves[cid])
            for k, (x, y) in enumerate(np.asarray(X)):
                w.writerow([cid, k, repr(float(x)), repr(float(y))])


def view_box(vertex_sets, scale: float = SVG_SCALE) -> tuple[float, float, float, float]:
    """Bounding box of all vertices, grown by ``scale`` about its centre."""
    pts = np.vstack([np.asarray(X) for X in vertex_sets])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    mid, half = 0.5 * (lo + hi), 0.5 * scale * np.maximum(hi - lo, 1e-9)
    return float(mid[0] - half[0]), float(mid[1] - half[1]), float(2 * half[0]), float(2 * half[1])


def svg_frame(curves: dict, box, *, closed: bool = True, title: str = "") -> str:
    """One <path> per curve; y is flipped so the picture is upright."""
    x0, y0, w, h = box
    vb = f"{x0:.6g} {-(y0 + h):.6g} {w:.6g} {h:.6g}"
    stroke = max(w, h) / 400.0
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vb}" width="600" '
             f'height="{600 * h / w:.0f}">']
    if title:
        parts.append(f"<title>{title}</title>")
    for cid in sorted(curves):
        X = np.asarray(getattr(curves[cid], "vertices", curves[cid]))
        d = "M " + " L ".join(f"{x:.6g} {-y:.6g}" for x, y in X) + (" Z" if closed else "")
        parts.append(f'<path id={quoteattr(f"curve-{cid}")} d="{d}" fill="none" '
                     f'stroke="black" stroke-width="{stroke:.3g}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path: str | Path, curves: dict, box, **kw) -> None:
    Path(path).write_text(svg_frame(curves, box, **kw))
