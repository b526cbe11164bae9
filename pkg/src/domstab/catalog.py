"""Canned scenarios used by the tests, the demos and the acceptance suite."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .classifier import Classifier
from .metric import L1, L2, LINF, Space, derive_rng_stream
from .sets import Ball, BoxUnion, Complement, FiniteSet

__all__ = ["FiniteCase", "alternating_lattice", "run_lattice", "open_box", "open_disk", "unit_circle_probes",
           "interior_probes", "random_finite_cases"]


@dataclass(frozen=True, eq=False)
class FiniteCase:
    name: str
    classifier: Classifier
    metric: object = L2
    rho: Optional[float] = None
    resolutions: tuple = ()

    @property
    def support(self):
        return self.classifier.ambient.support


def _split(support, mask, ids=("D", "Dc"), labels=("A", "B")):
    dim = support.shape[1]
    sets = (FiniteSet(support[mask], set_id=ids[0], dim=dim), FiniteSet(support[~mask], set_id=ids[1], dim=dim))
    return Classifier(sets, labels, space=Space(dim, support=support))


def alternating_lattice(n=101, denom=100):
    """Points ``k/denom`` for ``k < n``; even ``k`` in D, odd in the complement."""
    k = np.arange(n)
    S = (k / denom)[:, None]
    return _split(S, k % 2 == 0)


def run_lattice(n=101, denom=100, split=50):
    """Points ``k/denom``; ``k < split`` in D, the rest in the complement."""
    k = np.arange(n)
    S = (k / denom)[:, None]
    return _split(S, k < split)


def open_box(dim=2, lo=0.0, hi=1.0, pad=1.0):
    """Open unit box against its complement inside ``[lo - pad, hi + pad]^dim``."""
    D = BoxUnion.open_box(np.full(dim, lo), np.full(dim, hi), set_id="D")
    space = Space(dim, (np.full(dim, lo - pad), np.full(dim, hi + pad)))
    return Classifier((D, Complement(D, set_id="Dc")), ("A", "B"), space=space)


def open_disk(dim=2, pad=1.0):
    D = Ball(np.zeros(dim), 1.0, closed=False, set_id="D")
    space = Space(dim, (np.full(dim, -1.0 - pad), np.full(dim, 1.0 + pad)))
    return Classifier((D, Complement(D, set_id="Dc")), ("A", "B"), space=space)


def unit_circle_probes(n=200):
    t = 2.0 * np.pi * np.arange(n) / n
    return np.stack([np.cos(t), np.sin(t)], axis=1)


def interior_probes(n=1000, margin=0.05, dim=2, seed=0):
    """Uniform points of ``[margin, 1 - margin]^dim``."""
    g = derive_rng_stream(seed, 0, 0x1B0).generator()
    return margin + g.random((n, dim)) * (1.0 - 2.0 * margin)


def _support(g, dim, npts):
    if g.random() < 0.5:
        # jittered-free grid subset: many exactly tied distances
        side = int(np.ceil(npts ** (1.0 / dim))) + 1
        axes = [np.arange(side) / side for _ in range(dim)]
        full = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
        return full[np.sort(g.choice(len(full), size=min(npts, len(full)), replace=False))]
    return g.random((npts, dim))


def _partition(g, S, kind):
    n, dim = S.shape
    if kind == "voronoi":
        sites = S[g.choice(n, size=min(n, int(g.integers(2, 6))), replace=False)]
        owner = np.argmin(((S[:, None, :] - sites[None, :, :]) ** 2).sum(-1), axis=1)
        return owner % 2 == 0
    if kind == "iid":
        return g.random(n) < g.uniform(0.2, 0.8)
    if kind == "parity":
        side = np.sort(np.unique(S[:, 0]))
        step = np.min(np.diff(side)) if len(side) > 1 else 1.0
        K = np.rint(S / step).astype(np.int64)
        return K.sum(axis=1) % 2 == 0
    w = g.standard_normal(dim)
    return S @ w < np.median(S @ w)


def random_finite_cases(seed=0, count=50, max_points=500, max_dim=3):
    """Randomised finite scenarios for the oracle and blocker criteria.

    Supports are grid subsets or uniform clouds in ``[0, 1)^dim``;
    partitions are Voronoi cells, iid labels, lattice parity or a
    half-space. ``rho`` is a multiple of the median nearest-neighbour
    distance so that both stable and unstable points occur.
    """
    out = []
    metrics = (L2, L1, LINF)
    kinds = ("voronoi", "iid", "parity", "halfspace")
    for j in range(count):
        g = derive_rng_stream(seed, j, 0xCA7).generator()
        dim = int(g.integers(1, max_dim + 1))
        npts = int(g.integers(20, max_points + 1))
        S = _support(g, dim, npts)
        kind = kinds[j % len(kinds)]
        mask = _partition(g, S, kind)
        if mask.all() or not mask.any():
            mask[: len(mask) // 2] = ~mask[: len(mask) // 2]
        metric = metrics[int(g.integers(0, len(metrics)))]
        nn = np.array([np.sort(metric.to_many(S, p))[1] for p in S])
        med = float(np.median(nn))
        rho = med * float(g.choice([0.5, 1.0, 1.5, 2.5, 4.0]))
        resolutions = tuple(med * f for f in (0.5, 1.0, 2.0, 4.0))
        c = _split(S, mask)
        out.append(FiniteCase(f"random-{j}-{kind}-d{dim}-{metric.name}", c, metric, rho, resolutions))
    return out
