"""Between-step surgery: particle removal, coalescence and pinch-off.

Three kinds of event are handled, in this order, after each time step:

* disappearance: a curve whose enclosed area fell below ``area_min`` is dropped;
* coalescence: two curves whose closest vertices are nearer than
  ``contact_dist`` are joined into one polygon (at most one merge per step);
* pinch-off: a curve with two non-adjacent edges closer than ``neck_width``
  is cut at the neck into two closed curves.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, replace
from typing import Iterable

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, SurgeryError
from .geometry import PolygonalCurve, edge_frames, is_simple, segment_distances, shoelace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EventThresholds:
    """Event triggers.

    ``arc_factor`` excludes neck candidates whose shorter arc-length
    separation is below ``arc_factor * neck_width``; without it a concave
    right-angle corner would read as a neck.
    """

    area_min: float
    contact_dist: float
    neck_width: float
    neighbor_trim: int = 1
    arc_factor: float = 3.0

    def __post_init__(self):
        for name in ("area_min", "contact_dist", "neck_width"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.neighbor_trim < 0:
            raise ConfigError("neighbor_trim must be >= 0")
        if self.arc_factor < 0:
            raise ConfigError("arc_factor must be >= 0")

    @classmethod
    def defaults(cls, curves: Iterable[PolygonalCurve], **overrides) -> EventThresholds:
        """area_min = 1e-3 mean |A|, contact_dist = 2 mean edge, neck_width = contact_dist."""
        cl = list(curves)
        if not cl:
            raise ConfigError("cannot derive thresholds from an empty curve set")
        mean_area = float(np.mean([abs(shoelace(c.vertices)) for c in cl]))
        mean_edge = float(np.mean(np.concatenate([edge_frames(c).r for c in cl])))
        vals = {"area_min": 1e-3 * mean_area, "contact_dist": 2.0 * mean_edge}
        vals["neck_width"] = vals["contact_dist"]
        vals.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**vals)


@dataclass(frozen=True)
class TopologyEvent:
    kind: str                 # "disappearance" | "coalescence" | "pinchoff"
    step: int
    time: float
    curve_ids: tuple          # affected (parent) curves
    vertices_removed: int
    new_ids: tuple = ()
    area_before: float = 0.0
    area_after: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["curve_ids"] = list(self.curve_ids)
        d["new_ids"] = list(self.new_ids)
        return d


@dataclass(frozen=True)
class MergePlan:
    id_a: int
    id_b: int
    index_a: int
    index_b: int
    distance: float


def _event(state, kind, ids, removed, new_ids=(), before=0.0, after=0.0):
    ev = TopologyEvent(kind, state.step, state.time, tuple(ids), int(removed),
                       tuple(new_ids), float(before), float(after))
    logger.info("%s at step %d (t = %.6g): curves %s -> %s",
                kind, state.step, state.time, list(ids), list(new_ids))
    return ev


def detect_disappearance(state, thresholds: EventThresholds) -> list[int]:
    return [cid for cid in sorted(state.curves)
            if abs(shoelace(state.curves[cid].vertices)) < thresholds.area_min]


def remove_curves(state, ids: Iterable[int]):
    ids = list(ids)
    if not ids:
        return state
    curves = dict(state.curves)
    events = list(state.events)
    for cid in ids:
        c = curves.pop(cid)
        a = shoelace(c.vertices)
        events.append(_event(state, "disappearance", [cid], c.n, before=a, after=0.0))
    return replace(state, curves=curves, events=tuple(events))


def detect_coalescence(state, thresholds: EventThresholds) -> list[MergePlan]:
    """Closest vertex pair of every curve pair nearer than ``contact_dist``.

    Plans come out in ascending (id_a, id_b) order.
    """
    ids = sorted(state.curves)
    trees = {cid: cKDTree(state.curves[cid].vertices) for cid in ids}
    plans = []
    for a_pos, a in enumerate(ids):
        Xa = state.curves[a].vertices
        for b in ids[a_pos + 1:]:
            dist, idx = trees[b].query(Xa, distance_upper_bound=thresholds.contact_dist)
            hit = np.isfinite(dist)
            if not np.any(hit):
                continue
            ia = int(np.argmin(np.where(hit, dist, np.inf)))
            if dist[ia] < thresholds.contact_dist:
                plans.append(MergePlan(a, b, ia, int(idx[ia]), float(dist[ia])))
    return plans


def _cyclic(X: np.ndarray, start: int, stop: int) -> np.ndarray:
    """X[start], X[start+1], ..., X[stop] with wrap-around (inclusive)."""
    n = len(X)
    count = (stop - start) % n + 1
    return X[(start + np.arange(count)) % n]


def merge_vertices(Xa: np.ndarray, Xb: np.ndarray, ia: int, ib: int, trim: int):
    """Join two CCW polygons at vertices ia / ib.

    Returns (merged vertices, vertices removed, corridor area bound).
    """
    na, nb = len(Xa), len(Xb)
    if 2 * trim + 1 >= na or 2 * trim + 1 >= nb:
        raise SurgeryError("neighbor_trim removes a whole curve")
    chain_a = _cyclic(Xa, ia + trim + 1, ia - trim - 1)
    chain_b = _cyclic(Xb, ib + trim + 1, ib - trim - 1)
    merged = np.concatenate([chain_a, chain_b])
    cap_a = _cyclic(Xa, ia - trim - 1, ia + trim + 1)
    cap_b = _cyclic(Xb, ib - trim - 1, ib + trim + 1)
    bridge = np.array([chain_a[-1], chain_b[0], chain_b[-1], chain_a[0]])
    bound = abs(shoelace(cap_a)) + abs(shoelace(cap_b)) + abs(shoelace(bridge))
    return merged, (2 * trim + 1) * 2, bound


def apply_merge(state, plan: MergePlan, thresholds: EventThresholds):
    """Replace the two planned curves by their union; the new curve gets a fresh id."""
    try:
        ca, cb = state.curves[plan.id_a], state.curves[plan.id_b]
    except KeyError as exc:
        raise SurgeryError(f"merge plan names a missing curve {exc}") from exc
    merged, removed, bound = merge_vertices(ca.vertices, cb.vertices, plan.index_a,
                                            plan.index_b, thresholds.neighbor_trim)
    if len(merged) < 3:
        raise SurgeryError("merged curve has fewer than 3 vertices")
    if not is_simple(merged):
        raise SurgeryError(f"merging curves {plan.id_a} and {plan.id_b} gives a "
                           "self-intersecting polygon")
    before = shoelace(ca.vertices) + shoelace(cb.vertices)
    after = shoelace(merged)
    if abs(after - before) > bound * (1 + 1e-9) + 1e-14:
        raise SurgeryError(f"merge changed the area by {after - before:.3g}, more than "
                           f"the trimmed corridor ({bound:.3g})")
    new_id = state.next_id
    curves = {k: v for k, v in state.curves.items() if k not in (plan.id_a, plan.id_b)}
    curves[new_id] = PolygonalCurve(merged)
    ev = _event(state, "coalescence", [plan.id_a, plan.id_b], removed, [new_id], before, after)
    return replace(state, curves=curves, next_id=new_id + 1, events=state.events + (ev,))


def find_neck(curve: PolygonalCurve, thresholds: EventThresholds):
    """Closest pair of edges (i, j), i < j, nearer than ``neck_width``, or None.

    Edge k joins X[k-1] and X[k]. Pairs within two indices of each other and
    pairs whose shorter arc between them is under ``arc_factor * neck_width``
    are ignored.
    """
    X = curve.vertices
    n = len(X)
    ef = edge_frames(curve)
    reach = thresholds.neck_width + float(ef.r.max())
    pairs = cKDTree(ef.midpoint).query_pairs(reach, output_type="ndarray")
    if len(pairs) == 0:
        return None
    i, j = pairs[:, 0], pairs[:, 1]
    swap = i > j
    i, j = np.where(swap, j, i), np.where(swap, i, j)
    gap = np.minimum(j - i, n - (j - i))
    s = np.concatenate([[0.0], np.cumsum(ef.r)])  # arc length at the end of edge k-1
    L = s[-1]
    arc = np.abs(s[j] - s[i + 1])
    arc = np.minimum(arc, L - arc - ef.r[i] - ef.r[j])
    keep = (gap > 2) & (arc >= thresholds.arc_factor * thresholds.neck_width)
    if not np.any(keep):
        return None
    i, j = i[keep], j[keep]
    P0, P1 = np.roll(X, 1, axis=0)[i], X[i]
    Q0, Q1 = np.roll(X, 1, axis=0)[j], X[j]
    d = np.array([segment_distances(P0[k:k + 1], P1[k:k + 1], Q0[k:k + 1], Q1[k:k + 1])[0, 0]
                  for k in range(len(i))])
    k = int(np.argmin(d))
    if d[k] >= thresholds.neck_width:
        return None
    return int(i[k]), int(j[k]), float(d[k])


def split_vertices(X: np.ndarray, i: int, j: int, trim: int):
    """Cut a closed polygon at edges i < j into two closed vertex chains.

    The first child keeps X[i+trim .. j-1-trim], the second the cyclic run
    X[j+trim .. i-1-trim]; the trimmed vertices sit inside the neck.
    """
    n = len(X)
    idx = np.arange(n)
    m1 = j - i - 2 * trim
    m2 = n - (j - i) - 2 * trim
    first = X[(i + trim + idx[:max(m1, 0)]) % n]
    second = X[(j + trim + idx[:max(m2, 0)]) % n]
    return first, second


def detect_and_apply_pinchoff(state, thresholds: EventThresholds):
    """Split every curve that has a neck; returns (state, new events)."""
    new_events = []
    for cid in sorted(state.curves):
        c = state.curves[cid]
        neck = find_neck(c, thresholds)
        if neck is None:
            continue
        i, j, _ = neck
        parts = split_vertices(c.vertices, i, j, thresholds.neighbor_trim)
        curves = dict(state.curves)
        del curves[cid]
        next_id = state.next_id
        kept, dropped = [], []
        for part in parts:
            if len(part) < 3:
                dropped.append(len(part))
                continue
            if not is_simple(part):
                raise SurgeryError(f"pinch-off of curve {cid} produced a self-intersecting child")
            curves[next_id] = PolygonalCurve(part)
            kept.append(next_id)
            next_id += 1
        removed = c.n - sum(len(p) for p in parts)
        before = shoelace(c.vertices)
        after = sum(shoelace(curves[k].vertices) for k in kept)
        evs = [_event(state, "pinchoff", [cid], removed, kept, before, after)]
        for m in dropped:
            evs.append(_event(state, "disappearance", [cid], m))
        new_events.extend(evs)
        state = replace(state, curves=curves, next_id=next_id, events=state.events + tuple(evs))
    return state, new_events


def process(state, thresholds: EventThresholds):
    """Run every detector once, in the order disappearance, coalescence, pinch-off."""
    state = remove_curves(state, detect_disappearance(state, thresholds))
    if len(state.curves) > 1:
        plans = detect_coalescence(state, thresholds)
        if plans:
            state = apply_merge(state, plans[0], thresholds)
    state, _ = detect_and_apply_pinchoff(state, thresholds)
    return state
