"""Stable-point and accumulation-point testers, the dense-blocker scan and
the stable/accumulation agreement check.

A point ``x`` of its set ``D`` is stable when some ball ``B(x, delta)`` lies in
``D`` with one label throughout, and every smaller ball still holds a point
other than ``x``. The tester walks a geometric radius schedule from
``delta_start`` down to a lower radius and returns the first (largest) clean
radius as the certificate.

Lower radius by mode:

* ``strict``: ``max(delta_min, floor(x))`` where ``floor(x) = k*eps*(1+|x|_inf)``.
  On a finite space the non-isolation condition is checked all the way down,
  so no point of a finite space is ever strictly stable.
* ``resolution``: ``rho`` (default ``floor(x)``). Non-isolation is only
  required for radii ``>= rho``.

On a continuum the ball is sampled (``samples_per_radius`` points from a
per-radius random stream), and when the sets are exact every clean-looking
radius is confirmed analytically, so certificates never exceed the true
distance to the nearest rival point. On a finite space balls are enumerated.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .classifier import MANY_SETS, NO_SET, Classifier
from .errors import (ClassifierTimeout, DegenerateRadiusError, InvalidInputError, NotSupportedError,
                     PreconditionError, UndefinedPointError)
from .metric import L2, Metric, Space, as_point, as_points, derive_rng_stream, distance, radius_key, sample_ball
from .precision import DEFAULT_K, representability_floor
from .sets import DensityVerdict, DomainSet, complement_of, is_dense_at_resolution

__all__ = [
    "ProbeConfig", "Verdict", "AccumulationResult", "BlockerReport", "AgreementReport",
    "test_stable_point", "test_accumulation_point", "dense_blocker_scan", "cross_check_accumulation",
    "reverify_witness", "exit_margin", "agreement_category",
    "STABLE", "UNSTABLE", "INCONCLUSIVE", "MEMBERSHIP", "LABEL", "ISOLATION",
]

STABLE, UNSTABLE, INCONCLUSIVE = "stable", "unstable", "inconclusive"
MEMBERSHIP, LABEL, ISOLATION = "ii-membership", "ii-label", "iii-isolation"
MODES = ("strict", "resolution")


@dataclass(frozen=True)
class ProbeConfig:
    delta_start: Optional[float] = None     # default 0.1 * diameter of the space
    shrink_factor: float = 0.5
    delta_min: Optional[float] = None       # default: the representability floor
    samples_per_radius: int = 64
    mode: str = "strict"
    rho: Optional[float] = None             # resolution mode only
    seed: int = 0
    max_radii: int = 40
    k: int = DEFAULT_K

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInputError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 < self.shrink_factor < 1.0:
            raise InvalidInputError("shrink_factor must lie in (0, 1)")
        if self.samples_per_radius < 1 or self.max_radii < 1 or self.k < 1:
            raise InvalidInputError("samples_per_radius, max_radii and k must be positive")
        for name in ("delta_start", "delta_min", "rho"):
            v = getattr(self, name)
            if v is not None and not (np.isfinite(v) and v > 0):
                raise InvalidInputError(f"{name} must be finite and positive")
        if self.delta_start is not None and self.delta_min is not None and not self.delta_start > self.delta_min:
            raise InvalidInputError("delta_start must exceed delta_min")

    def start_radius(self, space: Space, metric: Metric) -> float:
        if self.delta_start is not None:
            return float(self.delta_start)
        return 0.1 * space.diameter(metric)

    def lower_radius(self, x) -> float:
        floor = representability_floor(x, self.k)
        if self.mode == "resolution":
            return float(self.rho) if self.rho is not None else floor
        return floor if self.delta_min is None else max(float(self.delta_min), floor)

    def radii(self, x, space: Space, metric: Metric):
        """Geometric schedule ending exactly at the lower radius."""
        start = self.start_radius(space, metric)
        lower = self.lower_radius(x)
        out = []
        r = start
        while r > lower and len(out) < self.max_radii - 1:
            out.append(r)
            r *= self.shrink_factor
        out.append(lower)
        return out

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _pt(p):
    return None if p is None else tuple(float(v) for v in p)


@dataclass(frozen=True)
class Verdict:
    outcome: str
    certified_delta: Optional[float] = None
    witness: Optional[tuple] = None
    clause: Optional[str] = None
    witness_radius: Optional[float] = None
    reason: Optional[str] = None
    trusted: bool = True
    approximate: bool = False
    probes_used: int = 0
    evidence: tuple = ()        # (radius, clause, witness, witness_radius) per dirty radius
    notes: tuple = ()

    @property
    def stable(self):
        return self.outcome == STABLE

    def to_dict(self):
        return {
            "outcome": self.outcome,
            "certified_delta": self.certified_delta,
            "witness": None if self.witness is None else list(self.witness),
            "clause": self.clause,
            "witness_radius": self.witness_radius,
            "reason": self.reason,
            "trusted": self.trusted,
            "approximate": self.approximate,
            "probes_used": self.probes_used,
            "evidence": [[r, c, list(w), wr] for r, c, w, wr in self.evidence],
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            outcome=d["outcome"], certified_delta=d["certified_delta"],
            witness=None if d["witness"] is None else tuple(d["witness"]), clause=d["clause"],
            witness_radius=d["witness_radius"], reason=d["reason"], trusted=d["trusted"],
            approximate=d["approximate"], probes_used=d["probes_used"],
            evidence=tuple((r, c, tuple(w), wr) for r, c, w, wr in d["evidence"]), notes=tuple(d["notes"]),
        )


def _unstable_from(evidence, used, approximate, trusted, notes=()):
    r, clause, w, wr = evidence[-1]
    return Verdict(UNSTABLE, witness=w, clause=clause, witness_radius=wr, trusted=trusted,
                   approximate=approximate, probes_used=used, evidence=tuple(evidence), notes=tuple(notes))


def exit_margin(s: DomainSet, x, metric: Metric = L2) -> Optional[float]:
    """Exact distance from ``x`` (inside ``s``) to the complement of ``s``, or None."""
    try:
        return float(complement_of(s).nearest_member(x, metric).distance)
    except NotSupportedError:
        return None


def _own_label(c: Classifier, i, x):
    return c.external(x) if c.external is not None else c.labels[i]


def _nearest_row(x, P, mask, metric):
    rows = np.flatnonzero(mask)
    d = metric.to_many(P[rows], x)
    return P[rows[int(np.argmin(d))]]


def test_stable_point(c: Classifier, x, cfg: Optional[ProbeConfig] = None, metric: Metric = L2,
                      probe_index: int = 0) -> Verdict:
    """Decide stability of ``x`` at the configured resolution.

    Raises :class:`UndefinedPointError` if ``x`` lies in no set (or is not a
    point of a finite space).
    """
    cfg = cfg or ProbeConfig()
    x = as_point(x, c.dim)
    space = c.ambient
    if space.finite and space.support_index(x) is None:
        raise UndefinedPointError(f"{x} is not a point of the finite space")
    i = c.set_index(x)
    try:
        y = _own_label(c, i, x)
    except ClassifierTimeout as exc:
        return Verdict(INCONCLUSIVE, reason=f"classifier timeout: {exc}", trusted=c.trusted)
    radii = cfg.radii(x, space, metric)
    try:
        if space.finite:
            return _stable_enumerated(c, i, y, x, radii, cfg, metric)
        return _stable_sampled(c, i, y, x, radii, cfg, metric, probe_index)
    except ClassifierTimeout as exc:
        return Verdict(INCONCLUSIVE, reason=f"classifier timeout: {exc}", trusted=c.trusted)


test_stable_point.__test__ = False


def _stable_enumerated(c, i, y, x, radii, cfg, metric):
    S = c.ambient.support
    d = metric.to_many(S, x)
    rival = c.support_indices != i
    positive = d[d > 0]
    nn = float(positive.min()) if len(positive) else np.inf
    evidence = []
    used = 0
    for j, r in enumerate(radii):
        inball = d < r
        used += int(inball.sum())
        bad = inball & rival
        if bad.any():
            evidence.append((r, MEMBERSHIP, _pt(_nearest_row(x, S, bad, metric)), r))
            continue
        if c.external is not None:
            rows = np.flatnonzero(inball)
            labels = c.label_many(S[rows])
            off = [k for k, lab in zip(rows, labels) if lab != y]
            if off:
                mask = np.zeros(len(S), dtype=bool)
                mask[off] = True
                evidence.append((r, LABEL, _pt(_nearest_row(x, S, mask, metric)), r))
                continue
        # non-isolation for every smaller radius that the mode asks about
        alphas = [min(r, nn)] if cfg.mode == "strict" else radii[j:]
        failed = next((a for a in alphas if np.count_nonzero(d < a) < 2), None)
        if failed is not None:
            evidence.append((r, ISOLATION, _pt(x), failed))
            continue
        return Verdict(STABLE, certified_delta=r, trusted=c.trusted, probes_used=used, evidence=tuple(evidence))
    return _unstable_from(evidence, used, False, c.trusted)


def _rival_within(c, i, x, r, metric, space):
    """Exact search for a point of S outside D_i within r of x.

    Returns ``(witness_or_None, exact)``.
    """
    own = c.sets[i]
    try:
        w = complement_of(own).member_within(x, r, metric)
    except NotSupportedError:
        w, exact = None, False
    else:
        if w is None:
            return None, True
        if space.contains(w):
            return w, True
        exact = True
    # the complement point found lies outside S; ask the rival sets themselves
    for j, s in enumerate(c.sets):
        if j == i:
            continue
        try:
            w = s.member_within(x, r, metric)
        except NotSupportedError:
            exact = False
            continue
        if w is not None and space.contains(w):
            return w, True
    return None, False


def _stable_sampled(c, i, y, x, radii, cfg, metric, probe_index):
    space = c.ambient
    floor = representability_floor(x, cfg.k)
    evidence = []
    used = 0
    approximate = c.external is not None
    for r in radii:
        stream = derive_rng_stream(cfg.seed, probe_index, radius_key(r))
        pts = sample_ball(x, r, cfg.samples_per_radius, metric, stream, k=cfg.k)
        pts = pts[space.contains_many(pts)]
        used += len(pts)
        if len(pts):
            idx = c.set_indices(pts)
            bad = idx != i
            if bad.any():
                evidence.append((r, MEMBERSHIP, _pt(_nearest_row(x, pts, bad, metric)), r))
                continue
            if c.external is not None:
                labels = c.label_many(pts, idx)
                off = np.array([lab != y for lab in labels])
                if off.any():
                    evidence.append((r, LABEL, _pt(_nearest_row(x, pts, off, metric)), r))
                    continue
        w, exact = _rival_within(c, i, x, r, metric, space)
        approximate |= not exact
        if w is not None:
            evidence.append((r, MEMBERSHIP, _pt(w), r))
            continue
        # non-isolation is automatic on a continuum above the floor
        return Verdict(STABLE, certified_delta=r, trusted=c.trusted, approximate=approximate,
                       probes_used=used, evidence=tuple(evidence))

    margin = exit_margin(c.sets[i], x, metric)
    only_membership = all(e[1] == MEMBERSHIP for e in evidence)
    if margin is not None and only_membership and margin >= floor:
        return Verdict(INCONCLUSIVE, reason=f"stability radius {margin:.3g} lies below the smallest tested radius",
                       trusted=c.trusted, approximate=approximate, probes_used=used, evidence=tuple(evidence))
    return _unstable_from(evidence, used, approximate, c.trusted)


def reverify_witness(c: Classifier, x, v: Verdict, metric: Metric = L2, k: int = DEFAULT_K) -> bool:
    """Re-evaluate an Unstable verdict's witness from scratch."""
    if v.outcome != UNSTABLE or v.witness is None:
        return False
    x = as_point(x, c.dim)
    w = np.asarray(v.witness, dtype=float)
    space = c.ambient
    if v.clause == ISOLATION:
        if space.finite:
            return len(space.ball(x, v.witness_radius, metric)) == 1
        return v.witness_radius < representability_floor(x, k)
    if not distance(metric, x, w) < v.witness_radius or not space.contains(w):
        return False
    i = c.set_index(x)
    j = int(c.set_indices(w[None, :])[0])
    if v.clause == MEMBERSHIP:
        return j != i
    if v.clause == LABEL:
        return j in (NO_SET, MANY_SETS) or c.classify(w) != c.classify(x)
    return False


# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class AccumulationResult:
    accumulates: Optional[bool]
    witnesses: tuple = ()          # (radius, member) pairs, largest radius first
    failed_radius: Optional[float] = None
    approximate: bool = False
    probes_used: int = 0

    @property
    def witness(self):
        """Member found at the smallest radius."""
        return self.witnesses[-1][1] if self.witnesses else None

    def to_dict(self):
        return {
            "accumulates": self.accumulates,
            "witness": None if self.witness is None else list(self.witness),
            "witness_radius": self.witnesses[-1][0] if self.witnesses else None,
            "failed_radius": self.failed_radius,
            "approximate": self.approximate,
            "probes_used": self.probes_used,
        }


def test_accumulation_point(s: DomainSet, x, cfg: Optional[ProbeConfig] = None, metric: Metric = L2,
                            probe_index: int = 0, space: Optional[Space] = None) -> AccumulationResult:
    """Does every ball in the schedule hold a member of ``s`` other than ``x``?

    Exact sets answer through their nearest member; predicates are sampled
    and the result carries ``approximate``. On a finite ``space`` only the
    support points of ``s`` count as members.
    """
    cfg = cfg or ProbeConfig()
    x = as_point(x, s.dim)
    space = space or Space(s.dim)
    radii = cfg.radii(x, space, metric)
    if space.finite:
        S = space.support
        members = S[s.contains(S)]
        d = metric.to_many(members, x) if len(members) else np.zeros(0)
        others = np.flatnonzero(d > 0)
        wits = []
        if len(others):
            j = others[int(np.argmin(d[others]))]
            near, dn = _pt(members[j]), float(d[j])
        else:
            near, dn = None, np.inf
        for r in radii:
            if not dn < r:
                return AccumulationResult(False, tuple(wits), r, False, len(members))
            wits.append((r, near))
        return AccumulationResult(True, tuple(wits), None, False, len(members))

    try:
        n = s.nearest_member(x, metric, exclude_self=True)
    except NotSupportedError:
        return _accumulation_sampled(s, x, radii, cfg, metric, probe_index)
    wits = []
    for r in radii:
        if not n.distance < r:
            return AccumulationResult(False, tuple(wits), r)
        if n.attained and n.point is not None and np.any(n.point != x):
            w = n.point
        else:
            w = s.member_within(x, r, metric, exclude_self=True)
        if w is None:
            return AccumulationResult(False, tuple(wits), r)
        wits.append((r, _pt(w)))
    return AccumulationResult(True, tuple(wits))


test_accumulation_point.__test__ = False


def _accumulation_sampled(s, x, radii, cfg, metric, probe_index):
    wits = []
    used = 0
    for r in radii:
        stream = derive_rng_stream(cfg.seed, probe_index, radius_key(r), 0xACC)
        pts = sample_ball(x, r, cfg.samples_per_radius, metric, stream, k=cfg.k)
        used += len(pts)
        hit = s.contains(pts) & np.any(pts != x, axis=1)
        if not hit.any():
            return AccumulationResult(False, tuple(wits), r, True, used)
        wits.append((r, _pt(_nearest_row(x, pts, hit, metric))))
    return AccumulationResult(True, tuple(wits), None, True, used)


# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class BlockerReport:
    density: tuple                 # DensityVerdict per (set, resolution)
    checks: int
    violations: tuple = ()         # (probe_index, point, set_id, dense_set_id, resolution, certified_delta)

    @property
    def consistent(self):
        return not self.violations

    def to_dict(self):
        return {
            "density": [d.to_dict() for d in self.density],
            "checks": self.checks,
            "consistent": self.consistent,
            "violations": [list(v[:1]) + [list(v[1])] + list(v[2:]) for v in self.violations],
        }


def dense_blocker_scan(c: Classifier, probes, resolutions, cfg: Optional[ProbeConfig] = None,
                       metric: Metric = L2, verdicts=None) -> BlockerReport:
    """Scan each set for density at each resolution and cross-examine certificates.

    When ``D_k`` is dense at ``delta_r``, no probe of another set may hold a
    Stable certificate ``>= delta_r``; any that does is recorded as an
    internal inconsistency. ``verdicts`` may supply precomputed stable-point
    verdicts aligned with ``probes`` (None entries for undefined probes).
    """
    cfg = cfg or ProbeConfig()
    P = as_points(probes, c.dim)
    idx = c.set_indices(P)
    if verdicts is None:
        verdicts = [test_stable_point(c, p, cfg, metric, probe_index=k) if idx[k] >= 0 else None
                    for k, p in enumerate(P)]
    space = c.ambient
    density = []
    violations = []
    checks = 0
    for kset, s in enumerate(c.sets):
        target = _finite_members(s, space) if space.finite else s
        for r in resolutions:
            dv = is_dense_at_resolution(target, P, r, metric, cfg)
            dv = replace(dv, set_id=s.set_id)
            density.append(dv)
            if not dv.dense:
                continue
            for k, v in enumerate(verdicts):
                if v is None or idx[k] == kset or idx[k] < 0:
                    continue
                checks += 1
                if v.outcome == STABLE and v.certified_delta >= r:
                    violations.append((k, _pt(P[k]), c.sets[idx[k]].set_id, s.set_id, float(r), v.certified_delta))
    return BlockerReport(tuple(density), checks, tuple(violations))


def _finite_members(s, space):
    from .sets import FiniteSet
    S = space.support
    return FiniteSet(S[s.contains(S)], set_id=s.set_id, dim=space.dim)


# ---------------------------------------------------------------------------
def agreement_category(verdict: Verdict, acc: AccumulationResult, margin, floor, lower):
    """Map one probe to ``(stable_side, accumulation_side)`` outcome labels.

    The accumulation side is "inconclusive" when the probe's exact distance to
    the complement is representable but below the lower radius (openness
    cannot be resolved inside the schedule). Probes closer to the complement
    than the representability floor are not open at machine precision and
    map to ``None`` (excluded).
    """
    if margin is not None and margin < floor:
        return None
    if margin is not None and margin < lower:
        acc_side = INCONCLUSIVE
    elif acc.accumulates is None:
        acc_side = INCONCLUSIVE
    else:
        acc_side = STABLE if acc.accumulates else UNSTABLE
    return verdict.outcome, acc_side


@dataclass(frozen=True)
class AgreementReport:
    total: int
    agreed: int
    skipped: tuple = ()            # probe indices excluded (not open at machine precision)
    disagreements: tuple = ()      # full traces

    @property
    def rate(self):
        return 1.0 if self.total == 0 else self.agreed / self.total

    def to_dict(self):
        return {"total": self.total, "agreed": self.agreed, "rate": self.rate,
                "skipped": list(self.skipped), "disagreements": list(self.disagreements)}


def cross_check_accumulation(c: Classifier, probes, cfg: Optional[ProbeConfig] = None, metric: Metric = L2,
                             eligible: bool = False, target: int = 0, stable_tester=None,
                             accumulation_tester=None) -> AgreementReport:
    """Compare stable-point and accumulation-point verdicts on the probes of one set.

    The equivalence only holds when the set is open and neither it nor its
    complement is dense; the caller vouches for that with ``eligible=True``.
    Probes outside ``c.sets[target]`` are ignored.
    """
    if not eligible:
        raise PreconditionError("scenario is not declared eligible: the set must be open and neither "
                                "it nor its complement dense at the probed resolutions")
    cfg = cfg or ProbeConfig()
    stable_tester = stable_tester or test_stable_point
    accumulation_tester = accumulation_tester or test_accumulation_point
    D = c.sets[target]
    P = as_points(probes, c.dim)
    idx = c.set_indices(P)
    total = agreed = 0
    skipped = []
    traces = []
    for k, p in enumerate(P):
        if idx[k] != target:
            continue
        v = stable_tester(c, p, cfg, metric, probe_index=k)
        a = accumulation_tester(D, p, cfg, metric, probe_index=k, space=c.ambient)
        margin = None if c.ambient.finite else exit_margin(D, p, metric)
        cat = agreement_category(v, a, margin, representability_floor(p, cfg.k), cfg.lower_radius(p))
        if cat is None:
            skipped.append(k)
            continue
        total += 1
        if cat[0] == cat[1]:
            agreed += 1
        else:
            traces.append({"probe_index": k, "point": list(_pt(p)), "stable": v.to_dict(),
                           "accumulation": a.to_dict(), "margin": margin})
    return AgreementReport(total, agreed, tuple(skipped), tuple(traces))
