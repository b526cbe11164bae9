"""Stability through convergent sequences.

A point is refuted as stable when some sequence converging to it keeps
returning to a rival set; it passes when every sequence of a fixed
generator family eventually stays in its own set. ``True`` therefore means
"no generator in the family refuted stability", nothing stronger.

Generator family (per probe): a radial pair ``+/- e_i`` on every axis, one
spiral in a random 2-plane and one jittered sequence. On finite supports
the only sensible sequence is a walk over support points closing in on the
target (``lattice_walk``).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .classifier import Classifier
from .errors import ClassifierTimeout, DegenerateRadiusError, InvalidInputError, UndefinedPointError
from .metric import L2, Metric, RngStream, as_point, as_points, derive_rng_stream, distance
from .precision import DEFAULT_K, machine_epsilon, representability_floor
from .sets import DomainSet
from .stability import (INCONCLUSIVE, ISOLATION, LABEL, MEMBERSHIP, STABLE, UNSTABLE, ProbeConfig, Verdict,
                        exit_margin)

__all__ = ["SequenceGenerator", "SubseriesInfo", "generate_sequence", "extract_subseries_in_set",
           "test_stability_via_series", "default_generators", "GOLDEN_ANGLE"]

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))
KINDS = ("radial", "spiral", "jittered", "lattice_walk")
# a tail that settles only in its last few terms is indistinguishable from a
# rival run cut off by the floor, so settling needs this many trailing terms
MIN_TAIL = 16


@dataclass(frozen=True)
class SequenceGenerator:
    kind: str
    ratio: float = 0.5
    r0: Optional[float] = None        # filled in per probe when None
    n_max: int = 64
    direction: Optional[tuple] = None  # radial
    angular_step: float = GOLDEN_ANGLE  # spiral
    plane: Optional[tuple] = None      # spiral: two orthonormal vectors; drawn from rng when None
    rng: Optional[RngStream] = None    # spiral plane, jitter
    support: Optional[np.ndarray] = None  # lattice_walk

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown generator kind {self.kind!r}")
        if not 0.0 < self.ratio < 1.0:
            raise InvalidInputError("ratio must lie in (0, 1)")
        if self.n_max < 1:
            raise InvalidInputError("n_max must be positive")
        if self.r0 is not None and not (np.isfinite(self.r0) and self.r0 > 0):
            raise InvalidInputError("r0 must be finite and positive")
        if self.kind == "radial" and self.direction is None:
            raise InvalidInputError("a radial generator needs a direction")
        if self.kind in ("jittered", "spiral") and self.rng is None and self.plane is None:
            object.__setattr__(self, "rng", RngStream(0))
        if self.kind == "lattice_walk" and self.support is None:
            raise InvalidInputError("a lattice walk needs the support points")

    def describe(self):
        d = {"kind": self.kind, "ratio": self.ratio, "r0": self.r0, "n_max": self.n_max}
        if self.direction is not None:
            d["direction"] = [float(v) for v in self.direction]
        return d


def _unit(v, metric):
    n = distance(metric, v, np.zeros_like(v))
    if not n > 0:
        raise InvalidInputError("generator direction must be non-zero")
    return v / n


def _plane(gen: SequenceGenerator, dim):
    if gen.plane is not None:
        a, b = (np.asarray(v, dtype=float) for v in gen.plane)
        return a, b
    if dim == 1:
        return np.ones(1), np.zeros(1)
    g = gen.rng.generator()
    a = g.standard_normal(dim)
    a /= np.linalg.norm(a)
    b = g.standard_normal(dim)
    b -= a * (a @ b)
    b /= np.linalg.norm(b)
    return a, b


def generate_sequence(gen: SequenceGenerator, target, metric: Metric = L2, k: int = DEFAULT_K):
    """Terms ``x_n`` with ``0 < d(x_n, target) <= r0 * q**n`` as an ``(N, dim)`` array.

    The stream stops at ``n_max`` terms or once the bound falls below the
    representability floor. A lattice walk instead lists the support points
    within ``r0`` by decreasing distance (ties by support order), keeping the
    ``n_max`` closest.
    """
    x = as_point(target)
    if gen.r0 is None:
        raise InvalidInputError("generator has no initial offset r0")
    if gen.kind == "lattice_walk":
        S = as_points(gen.support, x.size)
        return S[_walk_order(S, x, gen.r0, gen.n_max, metric)]

    floor = representability_floor(x, k)
    if not gen.r0 > floor:
        raise DegenerateRadiusError(f"r0={gen.r0:.3g} is at or below the representability floor {floor:.3g}")
    dim = x.size
    bounds = gen.r0 * gen.ratio ** np.arange(gen.n_max)
    bounds = bounds[bounds >= floor]
    n = len(bounds)
    if gen.kind == "radial":
        dirs = np.broadcast_to(_unit(np.asarray(gen.direction, dtype=float).reshape(dim), metric), (n, dim))
        steps = bounds.copy()
    elif gen.kind == "spiral":
        a, b = _plane(gen, dim)
        t = np.arange(n) * gen.angular_step
        dirs = _units(np.cos(t)[:, None] * a + np.sin(t)[:, None] * b, metric)
        steps = bounds.copy()
    else:
        g = gen.rng.generator()
        dirs = _units(g.standard_normal((n, dim)), metric)
        steps = bounds * (0.5 + 0.5 * (1.0 - g.random(n)))   # in (0.5, 1] * bound
    W = x + steps[:, None] * dirs
    # x + step rounds at the scale of ulp(x); nudge overshooting terms toward x an ulp at a time
    for _ in range(64):
        dw = metric.to_many(W, x)
        over = dw > bounds
        if not over.any():
            break
        W[over] = np.nextafter(W[over], np.broadcast_to(x, W[over].shape))
    dw = metric.to_many(W, x) if n else np.zeros(0)
    good = (dw <= bounds) & np.any(W != x, axis=1)
    # the stream ends at the first term that cannot be represented
    stop = int(np.argmin(good)) if not good.all() else n
    return W[:stop] if stop else np.zeros((0, dim))


def _walk_order(S, x, r0, n_max, metric):
    d = metric.to_many(S, x)
    keep = np.flatnonzero((d > 0) & (d < r0))
    order = keep[np.lexsort((keep, -d[keep]))]
    return order[-n_max:]


def _units(V, metric):
    n = metric.norms(V) if metric.builtin else np.array([distance(metric, v, np.zeros_like(v)) for v in V])
    if np.any(n <= 0):
        raise InvalidInputError("generator direction must be non-zero")
    return V / n[:, None]


@dataclass(frozen=True)
class SubseriesInfo:
    k_0: Optional[int]
    indices: tuple          # retained term indices, strictly increasing
    all_in_set: bool
    terminal_distance: float
    window: Optional[float] = None
    length: int = 0

    def to_dict(self):
        return {"k_0": self.k_0, "indices": list(self.indices), "all_in_set": self.all_in_set,
                "terminal_distance": self.terminal_distance, "window": self.window, "length": self.length}


def extract_subseries_in_set(seq, s: DomainSet, target, radius: Optional[float] = None,
                             metric: Metric = L2, cyclic: bool = False) -> SubseriesInfo:
    """Terms of ``seq`` inside ``B(target, radius)`` that are members of ``s`` and differ from target.

    ``k_0`` is the first window index from which every window term is
    retained. ``all_in_set`` holds iff that tail is non-empty. With
    ``cyclic`` the window terms are taken to repeat forever (a walk on a
    finite support can only get closer by revisiting points), so a single
    non-retained window term already recurs cofinally.
    """
    x = as_point(target)
    seq = as_points(seq, x.size) if len(seq) else np.zeros((0, x.size))
    d = metric.to_many(seq, x) if len(seq) else np.zeros(0)
    member = s.contains(seq) if len(seq) else np.zeros(0, dtype=bool)
    return _extract(d, member, radius, cyclic)


def _extract(d, member, radius, cyclic):
    window = np.ones(len(d), dtype=bool) if radius is None else d < radius
    keep = window & (d > 0) & member
    indices = tuple(int(i) for i in np.flatnonzero(keep))
    in_window = np.flatnonzero(window)
    k_0 = None
    if len(in_window):
        bad = in_window[~keep[in_window]]
        if len(bad) == 0:
            k_0 = int(in_window[0])
        elif bad[-1] < in_window[-1] and not cyclic:
            k_0 = int(in_window[np.searchsorted(in_window, bad[-1], side="right")])
    terminal = float(d[-1]) if len(d) else float("inf")
    return SubseriesInfo(k_0, indices, k_0 is not None, terminal, radius, len(d))


def default_generators(dim: int, seed: int = 0, probe_index: int = 0, r0: Optional[float] = None,
                       ratio: float = 0.5, n_max: int = 64, kinds=("radial", "spiral", "jittered")):
    gens = []
    if "radial" in kinds:
        for i in range(dim):
            for sign in (1.0, -1.0):
                e = np.zeros(dim)
                e[i] = sign
                gens.append(SequenceGenerator("radial", ratio, r0, n_max, direction=tuple(e)))
    if "spiral" in kinds and dim >= 2:
        gens.append(SequenceGenerator("spiral", ratio, r0, n_max, rng=derive_rng_stream(seed, probe_index, len(gens))))
    if "jittered" in kinds:
        gens.append(SequenceGenerator("jittered", ratio, r0, n_max, rng=derive_rng_stream(seed, probe_index, len(gens))))
    return gens


def _bind(gen: SequenceGenerator, r0, seed, probe_index, g):
    """Give a scenario-level generator its per-probe offset and stream."""
    upd = {}
    if gen.r0 is None:
        upd["r0"] = r0
    if gen.kind in ("spiral", "jittered") and gen.plane is None:
        upd["rng"] = derive_rng_stream(seed, probe_index, g)
    return replace(gen, **upd) if upd else gen


def test_stability_via_series(c: Classifier, x, gens=None, cfg: Optional[ProbeConfig] = None,
                              metric: Metric = L2, probe_index: int = 0, eligible: bool = False) -> Verdict:
    """Series-based stability verdict for ``x``.

    Unstable when some generator's tail keeps hitting a rival set (witness:
    first term of that rival run). Stable when every generator settles in
    x's set by ``r0 * q**k_0 >= lower radius``; the certificate is the
    smallest such settling radius. A stream that settles with fewer than
    ``MIN_TAIL`` trailing terms counts as refuting. The verdict carries the note "advisory"
    unless the scenario is declared eligible (open set, neither set dense).
    """
    cfg = cfg or ProbeConfig()
    x = as_point(x, c.dim)
    space = c.ambient
    if space.finite and space.support_index(x) is None:
        raise UndefinedPointError(f"{x} is not a point of the finite space")
    i = c.set_index(x)
    own = c.sets[i]
    notes = () if eligible else ("advisory",)
    try:
        y = c.external(x) if c.external is not None else c.labels[i]
        if space.finite:
            return _series_finite(c, i, x, cfg, metric, notes)
        return _series_continuum(c, i, y, own, x, gens, cfg, metric, probe_index, notes)
    except ClassifierTimeout as exc:
        return Verdict(INCONCLUSIVE, reason=f"classifier timeout: {exc}", trusted=c.trusted, notes=notes)


test_stability_via_series.__test__ = False


def _series_finite(c, i, x, cfg, metric, notes):
    space = c.ambient
    S = space.support
    d = metric.to_many(S, x)
    positive = d[d > 0]
    nn = float(positive.min()) if len(positive) else np.inf
    lower = cfg.lower_radius(x)
    window = lower if cfg.mode == "resolution" else min(lower, nn)
    r0 = max(cfg.start_radius(space, metric), window)
    order = _walk_order(S, x, r0, len(S), metric)
    seq = S[order]
    used = len(seq)
    members = c.support_indices[order] == i
    if c.external is not None:
        members &= _label_ok(c, i, seq)
    info = _extract(d[order], members, window, cyclic=True)
    if info.all_in_set:
        return Verdict(STABLE, certified_delta=window, trusted=c.trusted, probes_used=used, notes=notes)
    in_window = np.flatnonzero(d[order] < window)
    if len(in_window) == 0:
        return Verdict(UNSTABLE, witness=tuple(map(float, x)), clause=ISOLATION, witness_radius=window,
                       trusted=c.trusted, probes_used=used, notes=notes)
    j, clause = _first_of_rival_run(c, i, seq, in_window, members)
    return Verdict(UNSTABLE, witness=tuple(map(float, seq[j])), clause=clause, witness_radius=window,
                   trusted=c.trusted, probes_used=used, notes=notes)


def _label_ok(c, i, seq):
    """Terms in x's set carrying x's set label."""
    if len(seq) == 0:
        return np.zeros(0, dtype=bool)
    idx = c.set_indices(seq)
    ok = idx == i
    if c.external is not None and ok.any():
        rows = np.flatnonzero(ok)
        labels = c.label_many(seq[rows])
        ref = c.labels[i]
        for r, lab in zip(rows, labels):
            if lab != ref and str(lab) != str(ref):
                ok[r] = False
    return ok


def _first_of_rival_run(c, i, seq, window_idx, ok):
    """First term of the last run of non-retained window terms, and its clause."""
    bad = window_idx[~ok[window_idx]]
    last = bad[-1]
    pos = int(np.searchsorted(window_idx, last))
    while pos > 0 and not ok[window_idx[pos - 1]]:
        pos -= 1
    j = int(window_idx[pos])
    clause = MEMBERSHIP if int(c.set_indices(seq[j][None, :])[0]) != i else LABEL
    return j, clause


def _series_continuum(c, i, y, own, x, gens, cfg, metric, probe_index, notes):
    space = c.ambient
    floor = representability_floor(x, cfg.k)
    start = cfg.start_radius(space, metric)
    margin = exit_margin(own, x, metric)
    r0 = start
    if margin is not None and margin >= floor:
        r0 = min(start, margin * (1.0 - 4.0 * machine_epsilon()))
    if gens is None:
        gens = default_generators(c.dim, cfg.seed, probe_index, r0)
    if not gens:
        raise InvalidInputError("at least one generator is required")
    lower = cfg.lower_radius(x)
    used = 0
    certs = []
    for g, gen in enumerate(gens):
        gen = _bind(gen, r0, cfg.seed, probe_index, g)
        seq = generate_sequence(gen, x, metric, cfg.k)
        # terms outside S are not points of the space
        seq = seq[space.contains_many(seq)] if len(seq) else seq
        used += len(seq)
        if len(seq) == 0:
            return Verdict(INCONCLUSIVE, reason=f"generator {g} produced no terms", trusted=c.trusted,
                           probes_used=used, notes=notes)
        ok = _label_ok(c, i, seq)
        info = _extract(metric.to_many(seq, x), ok, None, cyclic=False)
        if not info.all_in_set or (info.k_0 > 0 and len(seq) - info.k_0 < MIN_TAIL):
            j, clause = _first_of_rival_run(c, i, seq, np.arange(len(seq)), ok)
            dj = distance(metric, x, seq[j])
            return Verdict(UNSTABLE, witness=tuple(map(float, seq[j])), clause=clause,
                           witness_radius=float(np.nextafter(dj, np.inf)), trusted=c.trusted,
                           approximate=c.external is not None, probes_used=used, notes=notes)
        certs.append(gen.r0 * gen.ratio ** info.k_0)
    cert = min(certs)
    if cert >= lower:
        return Verdict(STABLE, certified_delta=float(cert), trusted=c.trusted,
                       approximate=c.external is not None or margin is None, probes_used=used, notes=notes)
    return Verdict(INCONCLUSIVE, reason="sequences settle only below the lower radius", trusted=c.trusted,
                   probes_used=used, notes=notes)
