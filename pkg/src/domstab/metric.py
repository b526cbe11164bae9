"""Points, metrics, neighbourhoods and seeded sampling inside balls.

Points are plain 1-D float64 numpy arrays; :func:`as_point` validates them.
Ambient spaces are subsets of R^n, optionally bounded by a closed box and
optionally restricted to a finite support (a finite metric space).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateRadiusError, DimensionError, InvalidInputError
from .precision import DEFAULT_K, representability_floor

__all__ = [
    "Metric", "L1", "L2", "LINF", "as_point", "as_points", "distance", "Space",
    "RngStream", "derive_rng_stream", "sample_ball", "float_key",
]


def as_point(p, dim=None):
    x = np.array(p, dtype=float).reshape(-1) if np.ndim(p) == 0 else np.array(p, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DimensionError(f"a point must be a non-empty 1-D coordinate vector, got shape {x.shape}")
    if dim is not None and x.size != dim:
        raise DimensionError(f"expected dimension {dim}, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"point has non-finite coordinates: {x}")
    return x + 0.0  # folds -0.0 into 0.0


def as_points(P, dim=None):
    X = np.array(P, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1) if dim == 1 else X.reshape(1, -1)
    if X.ndim != 2:
        raise DimensionError(f"expected an (n, dim) array, got shape {X.shape}")
    if dim is not None and X.shape[1] != dim:
        raise DimensionError(f"expected dimension {dim}, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("points have non-finite coordinates")
    return X + 0.0


class Metric:
    """A distance on R^n.

    Built-in kinds are ``L1``, ``L2`` and ``Linf``. Custom metrics wrap an
    opaque ``fn(p, q) -> float``; their axioms are only spot-checked.
    """

    BUILTIN = ("L1", "L2", "Linf")

    def __init__(self, kind: str, fn: Optional[Callable] = None, name: Optional[str] = None):
        if kind not in self.BUILTIN and kind != "custom":
            raise InvalidInputError(f"unknown metric kind {kind!r}")
        if kind == "custom" and fn is None:
            raise InvalidInputError("a custom metric needs a distance callable")
        self.kind = kind
        self.fn = fn
        self.name = name or kind

    @classmethod
    def custom(cls, fn, name="custom"):
        return cls("custom", fn=fn, name=name)

    @classmethod
    def from_name(cls, name):
        lookup = {"l1": L1, "l2": L2, "linf": LINF, "chebyshev": LINF, "euclidean": L2, "manhattan": L1}
        try:
            return lookup[str(name).lower()]
        except KeyError:
            raise InvalidInputError(f"unknown metric {name!r}") from None

    @property
    def builtin(self):
        return self.kind != "custom"

    def norms(self, V):
        """Row norms of ``V`` (built-in metrics only)."""
        V = np.abs(V)
        if self.kind == "L1":
            return V.sum(axis=1)
        if self.kind == "L2":
            # scale by the largest component so tiny or huge differences neither underflow nor overflow
            top = V.max(axis=1) if V.shape[1] else np.zeros(len(V))
            safe = np.where(top > 0, top, 1.0)
            W = V / safe[:, None]
            return top * np.sqrt(np.einsum("ij,ij->i", W, W))
        if self.kind == "Linf":
            return V.max(axis=1)
        raise InvalidInputError("custom metrics have no norm")

    def to_many(self, X, q):
        """Distances from every row of ``X`` to the point ``q``."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != q.shape[0]:
            raise DimensionError(f"dimension mismatch: {X.shape} vs {q.shape}")
        if self.builtin:
            return self.norms(X - q)
        return np.array([float(self.fn(row, q)) for row in X])

    def pairwise(self, X, Y):
        """Distances between matching rows of ``X`` and ``Y``."""
        X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
        if X.shape != Y.shape or X.ndim != 2:
            raise DimensionError(f"row-wise distances need equal 2-D shapes, got {X.shape} and {Y.shape}")
        if self.builtin:
            return self.norms(X - Y)
        return np.array([float(self.fn(a, b)) for a, b in zip(X, Y)])

    def __call__(self, p, q):
        return distance(self, p, q)

    def __eq__(self, other):
        return isinstance(other, Metric) and (self.kind, self.fn, self.name) == (other.kind, other.fn, other.name)

    def __hash__(self):
        return hash((self.kind, self.name))

    def __repr__(self):
        return f"Metric({self.name})"


L1 = Metric("L1")
L2 = Metric("L2")
LINF = Metric("Linf")


def distance(metric: Metric, p, q) -> float:
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    if p.shape != q.shape:
        raise DimensionError(f"dimension mismatch: {p.size} vs {q.size}")
    # route through the vectorised path so scalar and batch distances agree bitwise
    return float(metric.to_many(p[None, :], q)[0])


def float_key(points):
    """Hashable keys identifying rows bitwise (after folding -0.0)."""
    X = np.ascontiguousarray(np.asarray(points, dtype=float) + 0.0)
    return [row.tobytes() for row in X]


@dataclass(frozen=True, eq=False)
class Space:
    """The ambient metric space S.

    ``bounds`` is a closed box ``(lo, hi)``; ``support`` makes S finite.
    """

    dim: int
    bounds: Optional[tuple] = None
    support: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInputError("dimension must be positive")
        if self.bounds is not None:
            lo = as_point(self.bounds[0], self.dim)
            hi = as_point(self.bounds[1], self.dim)
            if np.any(lo > hi):
                raise InvalidInputError("space bounds need lo <= hi on every axis")
            object.__setattr__(self, "bounds", (lo, hi))
        if self.support is not None:
            S = as_points(self.support, self.dim)
            if len(set(float_key(S))) != len(S):
                raise InvalidInputError("support points must be pairwise distinct")
            if self.bounds is not None and not np.all(self._in_bounds(S)):
                raise InvalidInputError("support points must lie within the bounds")
            S.setflags(write=False)
            object.__setattr__(self, "support", S)

    @property
    def finite(self):
        return self.support is not None

    @cached_property
    def _support_index(self):
        return {k: i for i, k in enumerate(float_key(self.support))}

    def support_index(self, p):
        """Row index of ``p`` in the support, or None."""
        return self._support_index.get(float_key(np.asarray(p, dtype=float)[None, :])[0])

    def _in_bounds(self, X):
        if self.bounds is None:
            return np.ones(len(X), dtype=bool)
        lo, hi = self.bounds
        return np.all((X >= lo) & (X <= hi), axis=1)

    def contains_many(self, X):
        X = np.asarray(X, dtype=float)
        inside = self._in_bounds(X)
        if self.support is not None:
            index = self._support_index
            inside &= np.array([k in index for k in float_key(X)], dtype=bool)
        return inside

    def contains(self, p):
        return bool(self.contains_many(np.asarray(p, dtype=float)[None, :])[0])

    def diameter(self, metric: Metric) -> float:
        if self.bounds is not None:
            return distance(metric, self.bounds[0], self.bounds[1])
        if self.support is not None:
            return self._support_diameter(metric)
        raise InvalidInputError("an unbounded space has no diameter; give delta_start explicitly")

    def _support_diameter(self, metric):
        cache = self.__dict__.setdefault("_diameters", {})
        if metric not in cache:
            S = self.support
            cache[metric] = float(max(metric.to_many(S, s).max() for s in S))
        return cache[metric]

    def ball(self, center, radius, metric: Metric):
        """Support points at distance strictly below ``radius`` from ``center``."""
        if self.support is None:
            raise InvalidInputError("only finite spaces can enumerate balls")
        d = metric.to_many(self.support, np.asarray(center, dtype=float))
        return self.support[d < radius]


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by ``(master_seed, index...)``."""

    master_seed: int
    stream_index: tuple = field(default=(0,))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.master_seed) & 0xFFFF_FFFF_FFFF_FFFF,
                                     spawn_key=tuple(int(i) for i in self.stream_index))
        return np.random.Generator(np.random.PCG64(seq))


def derive_rng_stream(master_seed: int, index: int, *sub: int) -> RngStream:
    if index < 0 or any(s < 0 for s in sub):
        raise InvalidInputError("stream indices must be non-negative")
    return RngStream(int(master_seed), (int(index), *map(int, sub)))


def radius_key(r: float) -> int:
    """Integer key from the bit pattern of a radius, for per-radius streams."""
    return struct.unpack("<Q", struct.pack("<d", float(r)))[0]


def sample_ball(center, radius: float, count: int, metric: Metric, rng, k: int = DEFAULT_K):
    """Draw ``count`` points uniformly from the open ball B(center, radius).

    L2 uses a Gaussian direction scaled by ``radius * U**(1/n)``; every other
    metric rejects from the circumscribing box. Candidates that rounding puts
    on or outside the sphere are redrawn, so all returned points satisfy
    ``metric(center, p) < radius`` as evaluated.
    """
    c = as_point(center)
    radius = float(radius)
    if not radius > 0.0:
        raise InvalidInputError("radius must be positive")
    if count < 1:
        raise InvalidInputError("count must be at least 1")
    floor = representability_floor(c, k)
    if radius < floor:
        raise DegenerateRadiusError(
            f"radius {radius:.3g} is below the representability floor {floor:.3g} at this centre")

    gen = rng.generator() if isinstance(rng, RngStream) else rng
    n = c.size
    out = []
    have = 0
    while True:
        while have < count:
            need = count - have
            if metric.kind == "L2":
                dirs = gen.standard_normal((need, n))
                norms = np.sqrt(np.einsum("ij,ij->i", dirs, dirs))
                norms[norms == 0.0] = 1.0
                cand = c + (dirs / norms[:, None]) * (radius * gen.random(need) ** (1.0 / n))[:, None]
            else:
                batch = max(2 * need, 16)
                cand = c + gen.uniform(-radius, radius, size=(batch, n))
            cand = cand[metric.to_many(cand, c) < radius][:need]
            out.append(cand)
            have += len(cand)
        pts = np.concatenate(out)
        if np.any(np.any(pts != c, axis=1)):
            return pts
        out, have = [], 0
