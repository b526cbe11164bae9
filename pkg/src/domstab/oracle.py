"""Exhaustive ground truth on finite metric spaces.

Only finitely many distinct balls exist around a support point: one per
gap between consecutive sorted distances. Evaluating one representative
radius per gap (every distinct distance, the midpoints between them, the
resolution and a radius past the farthest point) decides every quantified
statement over radii exactly. Deliberately written as plain loops over
centres with no shared code from the testers it checks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError, InvalidProbeError, InvalidScenarioError
from .metric import L2, Metric, as_point, as_points, float_key

__all__ = ["FiniteScenario", "enumerate_ball", "oracle_stable_points", "oracle_stability_table",
           "oracle_accumulation_points", "oracle_dense", "MAX_SUPPORT"]

MAX_SUPPORT = 2000


@dataclass(frozen=True, eq=False)
class FiniteScenario:
    support: np.ndarray
    assignment: np.ndarray       # set index of every support point
    labels: tuple
    metric: Metric = L2
    rho: Optional[float] = None
    set_ids: Optional[tuple] = None

    def __post_init__(self):
        S = as_points(self.support)
        a = np.asarray(self.assignment, dtype=np.int64).reshape(-1)
        if len(S) == 0:
            raise InvalidScenarioError("support must be non-empty")
        if len(S) > MAX_SUPPORT:
            raise InvalidScenarioError(f"oracle is capped at {MAX_SUPPORT} support points")
        if len(set(float_key(S))) != len(S):
            raise InvalidScenarioError("support points must be pairwise distinct")
        if len(a) != len(S):
            raise InvalidScenarioError("one set index per support point is required")
        m = len(self.labels)
        if m < 2:
            raise InvalidScenarioError("at least two labelled sets are required")
        if len(set(self.labels)) != m:
            raise InvalidScenarioError("labels must be distinct")
        if np.any((a < 0) | (a >= m)):
            raise InvalidScenarioError("every support point must belong to exactly one set")
        if self.rho is not None and not self.rho > 0:
            raise InvalidScenarioError("rho must be positive")
        object.__setattr__(self, "support", S)
        object.__setattr__(self, "assignment", a)
        if self.set_ids is None:
            object.__setattr__(self, "set_ids", tuple(range(m)))

    @classmethod
    def from_sets(cls, members, labels, metric: Metric = L2, rho=None, set_ids=None):
        """Build from one point list per set; the support is their union."""
        blocks = [as_points(m) for m in members if len(m)]
        S = np.concatenate(blocks)
        a = np.concatenate([np.full(len(as_points(m)), j) for j, m in enumerate(members) if len(m)])
        return cls(S, a, tuple(labels), metric, rho, set_ids)

    @classmethod
    def from_classifier(cls, c, metric: Metric = L2, rho=None):
        space = c.ambient
        if not space.finite:
            raise InvalidScenarioError("the classifier's space has no finite support")
        a = c.set_indices(space.support)
        if np.any(a < 0):
            raise InvalidScenarioError("the sets do not partition the support")
        return cls(space.support, a, tuple(c.labels), metric, rho, tuple(s.set_id for s in c.sets))

    def set_position(self, set_ref):
        if isinstance(set_ref, (int, np.integer)) and 0 <= set_ref < len(self.labels):
            return int(set_ref)
        if set_ref in self.set_ids:
            return self.set_ids.index(set_ref)
        raise InvalidInputError(f"unknown set {set_ref!r}")

    def members(self, set_ref):
        return self.support[self.assignment == self.set_position(set_ref)]

    def diameter(self):
        return max(float(self.metric.to_many(self.support, p).max()) for p in self.support)

    def index_of(self, p):
        p = as_point(p, self.support.shape[1])
        hit = np.flatnonzero(np.all(self.support == p, axis=1))
        if len(hit) == 0:
            raise InvalidProbeError(f"{p} is not a support point")
        return int(hit[0])


def enumerate_ball(s: FiniteScenario, center, radius):
    """Support points at distance strictly less than ``radius`` from a support point."""
    i = s.index_of(center)
    if not radius > 0:
        raise InvalidProbeError("radius must be positive")
    d = s.metric.to_many(s.support, s.support[i])
    return s.support[d < radius]


def _candidates(ds, extra=()):
    u = np.unique(ds)
    mids = (u[:-1] + u[1:]) / 2.0
    cands = np.concatenate([u, mids, [np.nextafter(u[-1], np.inf)], np.asarray(extra, dtype=float)])
    cands = np.unique(cands)
    return cands[cands > 0]


def oracle_stability_table(s: FiniteScenario, mode="strict", rho=None):
    """Per support point: ``(stable, largest certified delta or None)``."""
    if mode not in ("strict", "resolution"):
        raise InvalidInputError(f"unknown mode {mode!r}")
    rho = s.rho if rho is None else rho
    if mode == "resolution" and rho is None:
        raise InvalidInputError("resolution mode needs rho")
    out = []
    for i, x in enumerate(s.support):
        d = s.metric.to_many(s.support, x)
        order = np.argsort(d, kind="stable")
        ds = d[order]
        same = s.assignment[order] == s.assignment[i]
        first_rival = int(np.argmin(same)) if not same.all() else len(ds)
        cands = _candidates(ds, [rho] if mode == "resolution" else [])
        if mode == "resolution":
            cands = cands[cands >= rho]
        inside = np.searchsorted(ds, cands, side="left")       # points with d < delta
        clean = inside <= first_rival
        non_isolated = inside >= 2
        # clause iii must hold for every tested radius at or below delta
        ok = clean & np.logical_and.accumulate(non_isolated)
        if ok.any():
            out.append((True, float(cands[ok].max())))
        else:
            out.append((False, None))
    return out


def oracle_stable_points(s: FiniteScenario, mode="strict", rho=None):
    """Stable support points grouped by set id: ``{set_id: [(point, certified_delta), ...]}``."""
    table = oracle_stability_table(s, mode, rho)
    out = {sid: [] for sid in s.set_ids}
    for (stable, cert), p, j in zip(table, s.support, s.assignment):
        if stable:
            out[s.set_ids[j]].append((tuple(map(float, p)), cert))
    return out


def oracle_accumulation_points(s: FiniteScenario, set_ref, rho=None):
    """Support points whose every ball of radius in ``[rho, diameter]`` meets the set off the centre."""
    rho = s.rho if rho is None else rho
    if rho is None or not rho > 0:
        raise InvalidInputError("accumulation needs a positive rho")
    M = s.members(set_ref)
    out = []
    if len(M) == 0:
        return out
    diam = s.diameter()
    for x in s.support:
        d = s.metric.to_many(M, x)
        d = d[d > 0]
        if len(d) == 0:
            continue
        cands = _candidates(np.concatenate([[0.0], d]), [rho])
        cands = cands[(cands >= rho) & (cands <= max(diam, rho))]
        # a ball of radius r meets the set off-centre iff the nearest other member is closer than r
        if np.all(d.min() < cands):
            out.append(tuple(map(float, x)))
    return out


def oracle_dense(s: FiniteScenario, set_ref, delta) -> bool:
    """Does every support point's ``delta``-ball meet the set?"""
    if not delta > 0:
        raise InvalidInputError("delta must be positive")
    M = s.members(set_ref)
    if len(M) == 0:
        return False
    return all(float(s.metric.to_many(M, x).min()) < delta for x in s.support)
