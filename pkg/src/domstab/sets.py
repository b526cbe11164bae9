"""Classification sets: membership, nearest members and density at a resolution.

Every set answers ``contains`` exactly. The exact variants (finite sets,
box unions, balls, lattices and complements of those) also answer
``nearest_member`` and ``member_within`` exactly; predicates raise
:class:`NotSupportedError` there and callers fall back to sampling.

``nearest_member`` returns the *infimum* distance. For open sets that
infimum need not be attained, in which case the returned point lies on the
closure and ``attained`` is False. ``B(p, delta)`` meets a set iff the
infimum is ``< delta``, which is all the stability testers rely on.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DimensionError, InvalidInputError, NotSupportedError
from .metric import L2, Metric, as_point, as_points, derive_rng_stream, distance, float_key, sample_ball
from .precision import DEFAULT_K, machine_epsilon, representability_floor

__all__ = [
    "Nearest", "DomainSet", "FiniteSet", "Box", "BoxUnion", "Ball", "Lattice", "Predicate",
    "Complement", "complement_of", "nearest_member", "contains", "DensityVerdict",
    "is_dense_at_resolution", "sets_disjoint",
]

_FRACTIONS = (0.5, 0.25, 0.75, 0.125, 0.9, 1 / 16, 0.99, 1 / 64)


class Nearest(NamedTuple):
    point: Optional[np.ndarray]
    distance: float
    attained: bool


_NONE = Nearest(None, float("inf"), False)


class DomainSet:
    """Base class; subclasses implement ``_contains_many`` and friends."""

    exact = True

    def __init__(self, dim: int, set_id=None):
        if dim < 1:
            raise InvalidInputError("dimension must be positive")
        self.dim = int(dim)
        self.set_id = set_id

    # membership -----------------------------------------------------------
    def contains(self, p):
        """Membership of one point (1-D input) or of every row (2-D input)."""
        arr = np.asarray(p, dtype=float)
        if arr.ndim == 1:
            return bool(self._contains_many(as_point(arr, self.dim)[None, :])[0])
        return self._contains_many(as_points(arr, self.dim))

    def _contains_many(self, X):
        raise NotImplementedError

    # geometry ---------------------------------------------------------------
    def nearest_member(self, p, metric: Metric = L2, exclude_self=False) -> Nearest:
        raise NotSupportedError(f"{type(self).__name__} has no exact nearest-member query")

    def member_within(self, p, delta, metric: Metric = L2, exclude_self=False):
        """A member ``w`` with ``metric(p, w) < delta`` (and ``w != p`` if asked), else None."""
        raise NotSupportedError(f"{type(self).__name__} has no exact nearest-member query")

    def _exit(self, p, metric) -> Nearest:
        """Nearest point of the complement, for ``p`` inside the set."""
        raise NotSupportedError(f"complement of {type(self).__name__} has no exact distance")

    def _complement_near(self, p, delta, metric):
        raise NotSupportedError(f"complement of {type(self).__name__} has no exact distance")

    def _check(self, p):
        return as_point(p, self.dim)

    def __repr__(self):
        return f"{type(self).__name__}(id={self.set_id!r}, dim={self.dim})"


def contains(s: DomainSet, p):
    return s.contains(p)


def nearest_member(s: DomainSet, p, metric: Metric = L2, exclude_self=False) -> Nearest:
    return s.nearest_member(p, metric, exclude_self)


def _axis_nudges(p, delta, metric, outside: Callable, limit=None):
    """Try short axis-aligned steps from ``p`` until ``outside(w)`` holds."""
    step = delta / 2.0 if limit is None else min(delta, limit) / 2.0
    for _ in range(8):
        for i in range(p.size):
            for sign in (1.0, -1.0):
                w = p.copy()
                w[i] += sign * step
                if outside(w) and np.any(w != p) and distance(metric, p, w) < delta:
                    return w
        step /= 3.0
    return None


# ---------------------------------------------------------------------------
class FiniteSet(DomainSet):
    def __init__(self, points, set_id=None, dim=None):
        P = as_points(points, dim)
        super().__init__(P.shape[1], set_id)
        keys = float_key(P)
        self._index = {k: i for i, k in enumerate(keys)}
        if len(self._index) != len(P):
            raise InvalidInputError("finite set points must be pairwise distinct")
        P.setflags(write=False)
        self.points = P

    def __len__(self):
        return len(self.points)

    def _contains_many(self, X):
        index = self._index
        return np.array([k in index for k in float_key(X)], dtype=bool)

    def nearest_member(self, p, metric=L2, exclude_self=False):
        p = self._check(p)
        if len(self.points) == 0:
            return _NONE
        d = metric.to_many(self.points, p)
        if exclude_self:
            d = np.where(np.all(self.points == p, axis=1), np.inf, d)
        i = int(np.argmin(d))
        if not np.isfinite(d[i]):
            return _NONE
        return Nearest(self.points[i].copy(), float(d[i]), True)

    def member_within(self, p, delta, metric=L2, exclude_self=False):
        n = self.nearest_member(p, metric, exclude_self)
        return n.point if n.distance < delta else None

    def _exit(self, p, metric):
        return Nearest(self._check(p), 0.0, False)

    def _complement_near(self, p, delta, metric):
        return _axis_nudges(p, delta, metric, lambda w: not self.contains(w))


# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box with a closed/open flag per face."""

    lo: np.ndarray
    hi: np.ndarray
    lo_closed: np.ndarray
    hi_closed: np.ndarray

    @classmethod
    def make(cls, lo, hi, closed=True, lo_closed=None, hi_closed=None):
        lo = as_point(lo)
        hi = as_point(hi, lo.size)
        if np.any(lo > hi):
            raise InvalidInputError(f"box needs lo <= hi per axis, got {lo} > {hi}")
        lc = np.broadcast_to(np.asarray(closed if lo_closed is None else lo_closed, dtype=bool), lo.shape).copy()
        hc = np.broadcast_to(np.asarray(closed if hi_closed is None else hi_closed, dtype=bool), lo.shape).copy()
        return cls(lo, hi, lc, hc)

    @property
    def dim(self):
        return self.lo.size

    @property
    def empty(self):
        return bool(np.any((self.lo == self.hi) & ~(self.lo_closed & self.hi_closed)))

    @property
    def anchor(self):
        return self.lo + (self.hi - self.lo) / 2.0

    def contains_many(self, X):
        above = np.where(self.lo_closed, X >= self.lo, X > self.lo)
        below = np.where(self.hi_closed, X <= self.hi, X < self.hi)
        return np.all(above & below, axis=1)

    def contains(self, p):
        return bool(self.contains_many(p[None, :])[0])

    def closure_gap(self, p, metric):
        pc = np.clip(p, self.lo, self.hi)
        return pc, distance(metric, p, pc)

    def member_near(self, p, delta, metric, exclude_self):
        if self.empty:
            return None
        pc, g = self.closure_gap(p, metric)
        if not g < delta:
            return None
        anchor = self.anchor
        span = distance(metric, pc, anchor)
        for frac in _FRACTIONS:
            budget = (delta - g) * frac
            w = pc + min(1.0, budget / span) * (anchor - pc) if span > 0 else pc.copy()
            if exclude_self and np.array_equal(w, p):
                room_hi, room_lo = self.hi - w, w - self.lo
                i = int(np.argmax(np.maximum(room_hi, room_lo)))
                if room_hi[i] >= room_lo[i]:
                    w[i] += min(budget, room_hi[i] / 2.0)
                else:
                    w[i] -= min(budget, room_lo[i] / 2.0)
            if self.contains(w) and distance(metric, p, w) < delta and not (exclude_self and np.array_equal(w, p)):
                return w
        return None

    def exit_candidates(self, p):
        for i in range(self.dim):
            w = p.copy()
            w[i] = np.nextafter(self.lo[i], -np.inf) if self.lo_closed[i] else self.lo[i]
            yield w
            w = p.copy()
            w[i] = np.nextafter(self.hi[i], np.inf) if self.hi_closed[i] else self.hi[i]
            yield w


def _boxes_intersection(a: Box, b: Box):
    """A point in both boxes, or None if they are disjoint."""
    lo = np.maximum(a.lo, b.lo)
    hi = np.minimum(a.hi, b.hi)
    if np.any(lo > hi):
        return None
    w = lo + (hi - lo) / 2.0
    if a.contains(w) and b.contains(w):
        return w
    return None


def _box_closures_touch(a: Box, b: Box):
    return bool(np.all(np.maximum(a.lo, b.lo) <= np.minimum(a.hi, b.hi)))


class BoxUnion(DomainSet):
    """Finite union of boxes. ``closed`` sets every face; pass Box objects for mixed faces."""

    def __init__(self, boxes, set_id=None, closed=True):
        built = []
        for b in boxes:
            if isinstance(b, Box):
                built.append(b)
            else:
                lo, hi = b
                built.append(Box.make(lo, hi, closed=closed))
        if not built:
            raise InvalidInputError("a box union needs at least one box")
        dims = {b.dim for b in built}
        if len(dims) != 1:
            raise DimensionError("boxes in a union must share one dimension")
        super().__init__(dims.pop(), set_id)
        self.boxes = tuple(b for b in built if not b.empty) or tuple(built[:1])
        self._separated = all(
            not _box_closures_touch(a, b) for a, b in itertools.combinations(self.boxes, 2))

    @classmethod
    def open_box(cls, lo, hi, set_id=None):
        return cls([Box.make(lo, hi, closed=False)], set_id)

    @classmethod
    def closed_box(cls, lo, hi, set_id=None):
        return cls([Box.make(lo, hi, closed=True)], set_id)

    @property
    def anchor(self):
        return self.boxes[0].anchor

    def _contains_many(self, X):
        out = np.zeros(len(X), dtype=bool)
        for b in self.boxes:
            out |= b.contains_many(X)
        return out

    def nearest_member(self, p, metric=L2, exclude_self=False):
        p = self._check(p)
        best = _NONE
        for b in self.boxes:
            if b.empty:
                continue
            pc, g = b.closure_gap(p, metric)
            attained = b.contains(pc)
            if exclude_self and g == 0.0:
                if np.all(b.lo == b.hi):
                    continue  # single-point box: its only member is p itself
                cand = Nearest(p.copy(), 0.0, False)
            else:
                cand = Nearest(pc, g, attained)
            if cand.distance < best.distance or (cand.distance == best.distance and cand.attained and not best.attained):
                best = cand
        return best

    def member_within(self, p, delta, metric=L2, exclude_self=False):
        p = self._check(p)
        order = sorted(self.boxes, key=lambda b: b.closure_gap(p, metric)[1])
        for b in order:
            w = b.member_near(p, delta, metric, exclude_self)
            if w is not None:
                return w
        return None

    def _exit(self, p, metric):
        if not self._separated:
            raise NotSupportedError("complement distance needs boxes with pairwise disjoint closures")
        best = _NONE
        for b in self.boxes:
            if not b.contains(p):
                continue
            for w in b.exit_candidates(p):
                if self.contains(w):
                    continue
                d = distance(metric, p, w)
                if d < best.distance:
                    best = Nearest(w, d, True)
        return best

    def _complement_near(self, p, delta, metric):
        e = self._exit(p, metric)
        if e.point is not None and e.distance < delta:
            return e.point
        return None


# ---------------------------------------------------------------------------
class Ball(DomainSet):
    """``{x : metric(center, x) < radius}`` (or ``<=`` when closed)."""

    def __init__(self, center, radius, closed=False, metric: Metric = L2, set_id=None):
        c = as_point(center)
        super().__init__(c.size, set_id)
        if not float(radius) > 0.0:
            raise InvalidInputError("ball radius must be positive")
        self.center = c
        self.radius = float(radius)
        self.closed = bool(closed)
        self.metric = metric
        self._box = None
        if metric.kind == "Linf":
            self._box = Box.make(c - self.radius, c + self.radius, closed=self.closed)

    @property
    def anchor(self):
        return self.center

    def _contains_many(self, X):
        d = self.metric.to_many(X, self.center)
        return d <= self.radius if self.closed else d < self.radius

    def _radial(self, metric):
        if self.metric.kind == "L2" and metric.kind == "L2":
            return True
        if self._box is not None and metric.builtin:
            return False
        raise NotSupportedError(f"no exact projection onto a {self.metric.name} ball under {metric.name}")

    def nearest_member(self, p, metric=L2, exclude_self=False):
        p = self._check(p)
        if not self._radial(metric):
            pc, g = self._box.closure_gap(p, metric)
            if exclude_self and g == 0.0:
                return Nearest(p.copy(), 0.0, False)
            return Nearest(pc, g, self.contains(pc))
        v = p - self.center
        n = distance(metric, p, self.center)
        if n <= self.radius:
            if exclude_self or not self.contains(p):
                return Nearest(p.copy(), 0.0, False)
            return Nearest(p.copy(), 0.0, True)
        q = self.center + v * (self.radius / n)
        return Nearest(q, max(n - self.radius, 0.0), self.contains(q))

    def member_within(self, p, delta, metric=L2, exclude_self=False):
        p = self._check(p)
        if not self._radial(metric):
            w = self._box.member_near(p, delta, metric, exclude_self)
            return w if w is not None and self.contains(w) else None
        c = self.center
        n = distance(metric, p, c)
        if self.contains(p):
            if not exclude_self:
                return p.copy()
            for frac in _FRACTIONS:
                if n > 0:
                    w = p + (c - p) * (frac * min(delta, n) / n)
                else:
                    w = p.copy()
                    w[0] += frac * min(delta, self.radius)
                if self.contains(w) and np.any(w != p) and distance(metric, p, w) < delta:
                    return w
            return None
        g = max(n - self.radius, 0.0)
        if not g < delta:
            return None
        for frac in _FRACTIONS:
            s = min(g + frac * (delta - g), n)
            w = p + (c - p) * (s / n)
            if self.contains(w) and distance(metric, p, w) < delta and np.any(w != p):
                return w
        return None

    def _exit(self, p, metric):
        if not self._radial(metric):
            best = _NONE
            for w in self._box.exit_candidates(p):
                if self.contains(w):
                    continue
                d = distance(metric, p, w)
                if d < best.distance:
                    best = Nearest(w, d, True)
            return best
        c = self.center
        v = p - c
        top = float(np.max(np.abs(v)))
        if top == 0.0:
            v = np.zeros_like(p)
            v[0] = 1.0
        else:
            v = v / top  # rescale so tiny offsets keep a usable direction
        n = float(metric.to_many(v[None, :], np.zeros_like(v))[0])
        w = c + v * (self.radius / n)
        step = 1.0
        while self.contains(w):
            w = c + v * (self.radius * (1.0 + step * machine_epsilon()) / n)
            step *= 2.0
        return Nearest(w, distance(metric, p, w), True)

    def _complement_near(self, p, delta, metric):
        e = self._exit(p, metric)
        if e.point is not None and e.distance < delta:
            return e.point
        return None


# ---------------------------------------------------------------------------
class Lattice(DomainSet):
    """Points ``origin + k * spacing`` for integer vectors ``k`` accepted by ``select``.

    ``select`` maps an ``(n, dim)`` integer array to a boolean mask. A point
    counts as on the lattice when every coordinate lies within a few ulps
    (``k * eps * (1 + |site|)``) of the site, so decimal literals like 0.03
    match the computed site ``0 + 3 * 0.01``.
    """

    MAX_SHELLS = 4096

    def __init__(self, origin, spacing, select=None, index_lo=None, index_hi=None, set_id=None, describe=None):
        o = as_point(origin)
        super().__init__(o.size, set_id)
        h = np.broadcast_to(np.asarray(spacing, dtype=float), o.shape).copy()
        if np.any(~np.isfinite(h)) or np.any(h <= 0):
            raise InvalidInputError("lattice spacing must be positive")
        self.origin = o
        self.spacing = h
        self.select = select
        self.index_lo = None if index_lo is None else np.broadcast_to(np.asarray(index_lo, dtype=np.int64), o.shape).copy()
        self.index_hi = None if index_hi is None else np.broadcast_to(np.asarray(index_hi, dtype=np.int64), o.shape).copy()
        self.describe = describe

    @classmethod
    def parity(cls, origin, spacing, parity="even", index_lo=None, index_hi=None, set_id=None):
        want = {"even": 0, "odd": 1}[parity]
        return cls(origin, spacing, select=lambda K: (K.sum(axis=1) % 2) == want,
                   index_lo=index_lo, index_hi=index_hi, set_id=set_id, describe={"parity": parity})

    @property
    def bounded(self):
        return self.index_lo is not None and self.index_hi is not None

    def sites(self, K):
        return self.origin + K * self.spacing

    def _allowed(self, K):
        ok = np.ones(len(K), dtype=bool)
        if self.index_lo is not None:
            ok &= np.all(K >= self.index_lo, axis=1)
        if self.index_hi is not None:
            ok &= np.all(K <= self.index_hi, axis=1)
        if self.select is not None and ok.any():
            sel = np.zeros(len(K), dtype=bool)
            sel[ok] = np.asarray(self.select(K[ok]), dtype=bool)
            ok &= sel
        return ok

    def _snap(self, X):
        K = np.rint((X - self.origin) / self.spacing).astype(np.int64)
        sites = self.sites(K)
        tol = DEFAULT_K * machine_epsilon() * (1.0 + np.abs(sites))
        return K, np.all(np.abs(X - sites) <= tol, axis=1)

    def _contains_many(self, X):
        K, on = self._snap(X)
        out = np.zeros(len(X), dtype=bool)
        if on.any():
            out[on] = self._allowed(K[on])
        return out

    def enumerate(self, limit=200_000):
        """All member sites of a bounded lattice."""
        if not self.bounded:
            raise NotSupportedError("only index-bounded lattices can be enumerated")
        counts = self.index_hi - self.index_lo + 1
        if np.prod(counts.astype(float)) > limit:
            raise NotSupportedError("lattice too large to enumerate")
        axes = [np.arange(lo, hi + 1) for lo, hi in zip(self.index_lo, self.index_hi)]
        K = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        return self.sites(K[self._allowed(K)])

    def _shell(self, base, s):
        if s == 0:
            return base[None, :]
        rng = np.arange(-s, s + 1)
        G = np.stack(np.meshgrid(*([rng] * self.dim), indexing="ij"), axis=-1).reshape(-1, self.dim)
        G = G[np.max(np.abs(G), axis=1) == s]
        return base + G

    def nearest_member(self, p, metric=L2, exclude_self=False):
        p = self._check(p)
        if not exclude_self and self.contains(p):
            return Nearest(p.copy(), 0.0, True)  # on a site up to rounding
        base = np.rint((p - self.origin) / self.spacing).astype(np.int64)
        self_k = None
        if exclude_self:
            K, on = self._snap(p[None, :])
            if on[0]:
                self_k = K[0]
        hmin = float(self.spacing.min())
        best_d, best_pt = np.inf, None
        max_shell = self.MAX_SHELLS
        if self.bounded:
            max_shell = int(np.max(np.maximum(np.abs(self.index_lo - base), np.abs(self.index_hi - base)))) + 1
        for s in range(max_shell + 1):
            K = self._shell(base, s)
            K = K[self._allowed(K)]
            if self_k is not None and len(K):
                K = K[~np.all(K == self_k, axis=1)]
            if len(K):
                pts = self.sites(K)
                d = metric.to_many(pts, p)
                i = int(np.argmin(d))
                if d[i] < best_d:
                    best_d, best_pt = float(d[i]), pts[i]
            # every site in shell s+1 is at least (s + 1/2) * h away in Linf, hence in any Lp
            if best_pt is not None and best_d <= (s + 0.5) * hmin:
                break
        else:
            if best_pt is None and not self.bounded:
                raise NotSupportedError("no lattice member found within the search horizon")
        if best_pt is None:
            return _NONE
        return Nearest(best_pt.copy(), best_d, True)

    def member_within(self, p, delta, metric=L2, exclude_self=False):
        n = self.nearest_member(p, metric, exclude_self)
        return n.point if n.distance < delta else None

    def _exit(self, p, metric):
        return Nearest(self._check(p), 0.0, False)

    def _complement_near(self, p, delta, metric):
        return _axis_nudges(p, delta, metric, lambda w: not self.contains(w), limit=float(self.spacing.min()))


# ---------------------------------------------------------------------------
class Predicate(DomainSet):
    """Membership delegated to an oracle ``fn(point) -> bool``.

    With ``vectorized=True`` the oracle receives the whole ``(n, dim)`` array.
    ``sampler(rng, n)`` may supply candidate members for density checks.
    """

    exact = False

    def __init__(self, fn, dim, vectorized=False, sampler=None, set_id=None):
        super().__init__(dim, set_id)
        self.fn = fn
        self.vectorized = vectorized
        self.sampler = sampler

    def _contains_many(self, X):
        if self.vectorized:
            return np.asarray(self.fn(X), dtype=bool).reshape(len(X))
        return np.array([bool(self.fn(row)) for row in X], dtype=bool)


class Complement(DomainSet):
    """``R^n`` minus ``base``; exact whenever the base can measure its own exit distance."""

    def __init__(self, base: DomainSet, set_id=None):
        super().__init__(base.dim, set_id)
        self.base = base
        self.exact = base.exact

    def _contains_many(self, X):
        return ~self.base._contains_many(X)

    def nearest_member(self, p, metric=L2, exclude_self=False):
        p = self._check(p)
        if not self.base.contains(p):
            return Nearest(p.copy(), 0.0, not exclude_self)
        return self.base._exit(p, metric)

    def member_within(self, p, delta, metric=L2, exclude_self=False):
        p = self._check(p)
        if self.base.contains(p):
            w = self.base._complement_near(p, delta, metric)
            if w is not None and not self.base.contains(w) and distance(metric, p, w) < delta:
                return w
            return None
        if not exclude_self:
            return p.copy()
        anchor = getattr(self.base, "anchor", None)
        if anchor is not None and np.any(p != anchor):
            u = p - anchor
            un = distance(metric, p, anchor)
            for frac in _FRACTIONS:
                w = p + u * (frac * delta / un)
                if not self.base.contains(w) and np.any(w != p) and distance(metric, p, w) < delta:
                    return w
        return _axis_nudges(p, delta, metric, lambda w: not self.base.contains(w))

    def _exit(self, p, metric):
        # leaving the complement means entering the base
        n = self.base.nearest_member(p, metric)
        return n

    def _complement_near(self, p, delta, metric):
        return self.base.member_within(p, delta, metric)

    @property
    def anchor(self):
        return getattr(self.base, "anchor", None)


def complement_of(s: DomainSet, set_id=None) -> DomainSet:
    if isinstance(s, Complement):
        return s.base
    return Complement(s, set_id)


# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class DensityVerdict:
    dense: bool
    resolution: float
    failure_witness: Optional[tuple] = None
    approximate: bool = False
    set_id: object = None

    def __post_init__(self):
        if self.dense != (self.failure_witness is None):
            raise InvalidInputError("a density verdict has a witness exactly when it is not dense")

    def to_dict(self):
        return {
            "set": self.set_id,
            "resolution": self.resolution,
            "dense": self.dense,
            "failure_witness": None if self.failure_witness is None else list(self.failure_witness),
            "approximate": self.approximate,
        }


def is_dense_at_resolution(s: DomainSet, probes, delta, metric: Metric = L2, budget=None) -> DensityVerdict:
    """Does every probe's ``delta``-ball meet ``s``?

    Exact variants decide this with ``nearest_member``. Predicates sample each
    ball (``budget.samples_per_radius`` points, seeded by ``budget.seed``) and
    any miss is reported as ``approximate``.
    """
    delta = float(delta)
    if not delta > 0:
        raise InvalidInputError("delta must be positive")
    P = as_points(probes, s.dim)
    if len(P) == 0:
        raise InvalidInputError("probes must be non-empty")
    samples = getattr(budget, "samples_per_radius", 64)
    seed = getattr(budget, "seed", 0)
    approximate = False
    for j, p in enumerate(P):
        try:
            hit = s.nearest_member(p, metric).distance < delta
        except NotSupportedError:
            approximate = True
            hit = _sampled_hit(s, p, delta, metric, samples, seed, j)
        if not hit:
            return DensityVerdict(False, delta, tuple(map(float, p)), approximate, s.set_id)
    return DensityVerdict(True, delta, None, approximate, s.set_id)


def _sampled_hit(s, p, delta, metric, samples, seed, j):
    if s.contains(p):
        return True
    if delta < representability_floor(p):
        return False
    pts = sample_ball(p, delta, samples, metric, derive_rng_stream(seed, j, 0xD5))
    if np.any(s.contains(pts)):
        return True
    sampler = getattr(s, "sampler", None)
    if sampler is not None:
        cand = np.asarray(sampler(derive_rng_stream(seed, j, 0xD6).generator(), samples), dtype=float)
        cand = cand[metric.to_many(cand, p) < delta]
        return bool(len(cand) and np.any(s.contains(cand)))
    return False


# ---------------------------------------------------------------------------
def sets_disjoint(a: DomainSet, b: DomainSet, metric: Metric = L2):
    """Decide ``a ∩ b == ∅`` analytically where possible.

    Returns ``(True, None)`` if disjoint, ``(False, witness)`` with a point of
    both sets, or ``(None, None)`` when no exact rule applies.
    """
    for x, y in ((a, b), (b, a)):
        pts = None
        if isinstance(x, FiniteSet):
            pts = x.points
        elif isinstance(x, Lattice) and x.bounded:
            try:
                pts = x.enumerate()
            except NotSupportedError:
                pts = None
        if pts is not None:
            if len(pts) == 0:
                return True, None
            hit = y.contains(pts)
            if np.any(hit):
                return False, pts[int(np.argmax(hit))].copy()
            return True, None

    if isinstance(a, Complement) and a.base is b or isinstance(b, Complement) and b.base is a:
        return True, None

    if isinstance(a, BoxUnion) and isinstance(b, BoxUnion):
        for ba in a.boxes:
            for bb in b.boxes:
                w = _boxes_intersection(ba, bb)
                if w is not None:
                    return False, w
                if _box_closures_touch(ba, bb) and not _touch_is_empty(ba, bb):
                    return None, None
        return True, None

    if isinstance(a, Ball) and isinstance(b, Ball) and a.metric.kind == b.metric.kind == "L2":
        gap = distance(L2, a.center, b.center)
        reach = a.radius + b.radius
        if gap > reach:
            return True, None
        w = b.member_within(a.center, a.radius, L2)
        if w is not None and a.contains(w):
            return False, w
        return (True, None) if gap == reach and not (a.closed and b.closed) else (None, None)

    for x, y in ((a, b), (b, a)):
        if isinstance(x, BoxUnion) and isinstance(y, Ball) and y.metric.kind == "L2":
            for bx in x.boxes:
                _, g = bx.closure_gap(y.center, L2)
                if g < y.radius:
                    w = bx.member_near(y.center, y.radius, L2, False)
                    if w is not None and y.contains(w):
                        return False, w
                    return None, None
                if g == y.radius:
                    return None, None
            return True, None

    for x, y in ((a, b), (b, a)):
        if isinstance(x, Complement) and isinstance(y, BoxUnion) and isinstance(x.base, BoxUnion):
            inside = all(any(_box_within(by, bx) for bx in x.base.boxes) for by in y.boxes)
            if inside:
                return True, None

    if isinstance(a, Complement) and isinstance(b, Complement):
        far = np.full(a.dim, 1e12)
        if a.contains(far) and b.contains(far):
            return False, far
    return None, None


def _box_within(inner: Box, outer: Box):
    lo_ok = (inner.lo > outer.lo) | ((inner.lo == outer.lo) & (outer.lo_closed | ~inner.lo_closed))
    hi_ok = (inner.hi < outer.hi) | ((inner.hi == outer.hi) & (outer.hi_closed | ~inner.hi_closed))
    return bool(np.all(lo_ok & hi_ok))


def _touch_is_empty(a: Box, b: Box):
    """Closures meet; decide whether the sets themselves share a point."""
    lo = np.maximum(a.lo, b.lo)
    hi = np.minimum(a.hi, b.hi)
    for i in np.flatnonzero(lo == hi):
        v = lo[i]
        in_a = (a.lo[i] < v < a.hi[i]) or (v == a.lo[i] and a.lo_closed[i]) or (v == a.hi[i] and a.hi_closed[i])
        in_b = (b.lo[i] < v < b.hi[i]) or (v == b.lo[i] and b.lo_closed[i]) or (v == b.hi[i] and b.hi_closed[i])
        if not (in_a and in_b):
            return True
    return False
