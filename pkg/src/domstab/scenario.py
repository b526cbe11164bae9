"""Scenario files: JSON in, validated :class:`Scenario` out.

Every problem found during validation is collected with its JSON location
and raised together as one :class:`SchemaError`.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classifier import Classifier, SubprocessClassifier
from .errors import DomstabError, SchemaError
from .metric import Metric, Space, derive_rng_stream
from .series import KINDS as GENERATOR_KINDS
from .series import SequenceGenerator, default_generators
from .sets import Ball, Box, BoxUnion, Complement, FiniteSet, Lattice
from .stability import ProbeConfig

__all__ = ["Scenario", "parse_scenario", "scenario_from_dict", "ANALYSES", "SCHEMA"]

SCHEMA = "domstab.scenario/1"
ANALYSES = ("axioms", "epsilon", "density", "stability", "accumulation", "series", "cross-check", "oracle")
MAX_PROBES = 1_000_000


@dataclass(eq=False)
class Scenario:
    raw: dict
    seed: int
    space: Space
    metric: Metric
    classifier: Classifier
    probes: np.ndarray
    config: ProbeConfig
    resolutions: tuple
    analyses: tuple
    coverage_declared: bool
    cross_check_eligible: bool
    generator_config: dict = field(default_factory=dict)
    cross_check_target: int = 0
    epsilon: dict = field(default_factory=dict)
    external: Optional[SubprocessClassifier] = None
    base_dir: str = "."

    @property
    def digest(self):
        return hashlib.sha256(canonical_json(self.raw).encode()).hexdigest()

    @property
    def induced(self):
        return self.classifier.external is None

    def generators(self, probe_index, r0=None):
        gcfg = self.generator_config
        kinds = tuple(k for k in gcfg.get("kinds", ("radial", "spiral", "jittered")) if k != "lattice_walk")
        return default_generators(self.space.dim, self.seed, probe_index, r0, gcfg.get("ratio", 0.5),
                                  gcfg.get("n_max", 64), kinds)

    def with_overrides(self, seed=None, mode=None, analyses=None):
        raw = json.loads(json.dumps(self.raw))
        if seed is not None:
            raw["seed"] = int(seed)
        if mode is not None:
            raw.setdefault("probe_config", {})["mode"] = mode
        if analyses is not None:
            raw["analyses"] = list(analyses)
        return scenario_from_dict(raw, self.base_dir)

    def close(self):
        if self.external is not None:
            self.external.close()


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


class _Errors:
    def __init__(self):
        self.items = []

    def add(self, loc, msg):
        self.items.append((loc, msg))

    def raise_if_any(self):
        if self.items:
            raise SchemaError(self.items)


def _vec(v, dim, loc, err, name="vector"):
    try:
        a = np.asarray(v, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        err.add(loc, f"{name} must be a list of numbers")
        return None
    if dim is not None and a.size == 1 and dim > 1:
        a = np.full(dim, a[0])
    if dim is not None and a.size != dim:
        err.add(loc, f"{name} must have {dim} coordinates, got {a.size}")
        return None
    if not np.all(np.isfinite(a)):
        err.add(loc, f"{name} must be finite")
        return None
    return a


def _positive(v, loc, err, name):
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not np.isfinite(v) or v <= 0:
        err.add(loc, f"{name} must be a positive number")
        return None
    return float(v)


def parse_scenario(path) -> Scenario:
    """Read and validate a scenario file."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError([("$", f"invalid JSON: {exc}")]) from None
    return scenario_from_dict(raw, os.path.dirname(os.path.abspath(path)))


def _read_support_csv(path, err):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
        return np.array([[float(v) for v in r] for r in rows], dtype=float)
    except FileNotFoundError:
        err.add("$.space.support_csv", f"file not found: {path}")
    except ValueError as exc:
        err.add("$.space.support_csv", f"unreadable coordinates: {exc}")
    return None


def _build_space(sp, base_dir, err):
    if not isinstance(sp, dict):
        err.add("$.space", "space must be an object")
        return None
    dim = sp.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        err.add("$.space.dim", "dim must be a positive integer")
        return None
    bounds = None
    if sp.get("bounds") is not None:
        b = sp["bounds"]
        if not (isinstance(b, list) and len(b) == 2):
            err.add("$.space.bounds", "bounds must be [lo, hi]")
        else:
            lo = _vec(b[0], dim, "$.space.bounds[0]", err)
            hi = _vec(b[1], dim, "$.space.bounds[1]", err)
            if lo is not None and hi is not None:
                if np.any(lo > hi):
                    err.add("$.space.bounds", "lo must not exceed hi")
                else:
                    bounds = (lo, hi)
    support = None
    if sp.get("support") is not None:
        try:
            support = np.asarray(sp["support"], dtype=float).reshape(len(sp["support"]), -1)
        except (TypeError, ValueError):
            err.add("$.space.support", "support must be a list of points")
    elif sp.get("support_csv") is not None:
        support = _read_support_csv(os.path.join(base_dir, sp["support_csv"]), err)
    elif sp.get("support_grid") is not None:
        g = sp["support_grid"]
        o = _vec(g.get("origin", 0.0), dim, "$.space.support_grid.origin", err)
        h = _vec(g.get("spacing"), dim, "$.space.support_grid.spacing", err, "spacing")
        cnt = g.get("count")
        cnt = [cnt] * dim if isinstance(cnt, int) else cnt
        if not (isinstance(cnt, list) and len(cnt) == dim and all(isinstance(c, int) and c >= 1 for c in cnt)):
            err.add("$.space.support_grid.count", "count must be a positive integer per axis")
        elif o is not None and h is not None:
            if np.any(h <= 0):
                err.add("$.space.support_grid.spacing", "spacing must be positive")
            else:
                axes = [o[i] + np.arange(cnt[i]) * h[i] for i in range(dim)]
                support = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    if support is not None and support.ndim == 2 and support.shape[1] != dim:
        err.add("$.space.support", f"support points must have {dim} coordinates")
        support = None
    try:
        return Space(dim, bounds, support)
    except DomstabError as exc:
        err.add("$.space", str(exc))
        return None


def _build_set(d, j, dim, metric, built, err):
    loc = f"$.sets[{j}]"
    kind = d.get("kind")
    sid = d.get("id", j)
    try:
        if kind == "box_union":
            boxes = []
            for b_i, b in enumerate(d.get("boxes", [])):
                lo = _vec(b.get("lo"), dim, f"{loc}.boxes[{b_i}].lo", err)
                hi = _vec(b.get("hi"), dim, f"{loc}.boxes[{b_i}].hi", err)
                if lo is None or hi is None:
                    return None
                closed = b.get("closed", True)
                boxes.append(Box.make(lo, hi, closed=closed, lo_closed=b.get("lo_closed"), hi_closed=b.get("hi_closed")))
            if not boxes:
                err.add(f"{loc}.boxes", "at least one box is required")
                return None
            return BoxUnion(boxes, set_id=sid)
        if kind == "ball":
            c = _vec(d.get("center"), dim, f"{loc}.center", err)
            r = _positive(d.get("radius"), f"{loc}.radius", err, "radius")
            if c is None or r is None:
                return None
            bm = Metric.from_name(d["metric"]) if "metric" in d else metric
            return Ball(c, r, closed=bool(d.get("closed", False)), metric=bm, set_id=sid)
        if kind == "finite":
            pts = d.get("points")
            if not isinstance(pts, list) or not pts:
                err.add(f"{loc}.points", "a finite set needs a non-empty point list")
                return None
            return FiniteSet(np.asarray(pts, dtype=float).reshape(len(pts), -1), set_id=sid, dim=dim)
        if kind == "lattice":
            o = _vec(d.get("origin", 0.0), dim, f"{loc}.origin", err)
            h = _vec(d.get("spacing"), dim, f"{loc}.spacing", err, "spacing")
            if o is None or h is None:
                return None
            lo, hi = d.get("index_lo"), d.get("index_hi")
            parity = d.get("parity")
            if parity is not None:
                if parity not in ("even", "odd"):
                    err.add(f"{loc}.parity", "parity must be 'even' or 'odd'")
                    return None
                return Lattice.parity(o, h, parity, index_lo=lo, index_hi=hi, set_id=sid)
            return Lattice(o, h, index_lo=lo, index_hi=hi, set_id=sid)
        if kind == "complement":
            ref = d.get("of")
            base = next((s for s in built if s is not None and s.set_id == ref), None)
            if base is None:
                err.add(f"{loc}.of", f"complement refers to unknown (or later) set {ref!r}")
                return None
            return Complement(base, set_id=sid)
    except DomstabError as exc:
        err.add(loc, str(exc))
        return None
    err.add(f"{loc}.kind", f"unknown set kind {kind!r}")
    return None


def _restrict(s, support):
    """A set as seen from a finite space: its support members."""
    return FiniteSet(support[s.contains(support)], set_id=s.set_id, dim=support.shape[1])


def _build_probes(pr, space, seed, err):
    if not isinstance(pr, dict) or len(pr) != 1:
        err.add("$.probes", "probes must be an object with exactly one of explicit, grid, random, support")
        return None
    (kind, v), = pr.items()
    dim = space.dim
    if kind == "explicit":
        try:
            P = np.asarray(v, dtype=float).reshape(len(v), -1)
        except (TypeError, ValueError):
            err.add("$.probes.explicit", "explicit probes must be a list of points")
            return None
        if P.shape[1] != dim:
            err.add("$.probes.explicit", f"probes must have {dim} coordinates")
            return None
        if not np.all(np.isfinite(P)):
            err.add("$.probes.explicit", "probes must be finite")
            return None
        return P
    if kind == "support":
        if not space.finite:
            err.add("$.probes.support", "support probes need a finite space")
            return None
        return space.support.copy()
    if kind in ("grid", "random") and space.bounds is None:
        err.add(f"$.probes.{kind}", f"{kind} probes need space bounds")
        return None
    if kind == "grid":
        h = v.get("spacing") if isinstance(v, dict) else None
        if not isinstance(h, (int, float)) or isinstance(h, bool) or not np.isfinite(h) or h <= 0:
            err.add("$.probes.grid.spacing", "grid spacing must be a positive number")
            return None
        lo, hi = space.bounds
        counts = np.floor((hi - lo) / h + 1e-9).astype(np.int64) + 1
        if np.prod(counts.astype(float)) > MAX_PROBES:
            err.add("$.probes.grid.spacing", "grid too fine")
            return None
        axes = [lo[i] + np.arange(counts[i]) * h for i in range(dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    if kind == "random":
        n = v.get("count") if isinstance(v, dict) else None
        if not isinstance(n, int) or isinstance(n, bool) or n < 1 or n > MAX_PROBES:
            err.add("$.probes.random.count", "count must be a positive integer")
            return None
        lo, hi = space.bounds
        g = derive_rng_stream(seed, 0, 0x9B0BE).generator()
        return lo + g.random((n, dim)) * (hi - lo)
    err.add("$.probes", f"unknown probe kind {kind!r}")
    return None


_CONFIG_KEYS = {"delta_start", "shrink_factor", "delta_min", "samples_per_radius", "mode", "rho", "max_radii", "k"}


def scenario_from_dict(raw: dict, base_dir: str = ".") -> Scenario:
    err = _Errors()
    if not isinstance(raw, dict):
        raise SchemaError([("$", "scenario must be a JSON object")])
    if raw.get("schema", SCHEMA) != SCHEMA:
        err.add("$.schema", f"unsupported schema {raw.get('schema')!r}; expected {SCHEMA!r}")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
        err.add("$.seed", "seed must be an unsigned 64-bit integer")
        seed = 0
    try:
        metric = Metric.from_name(raw.get("metric", "L2"))
    except DomstabError as exc:
        err.add("$.metric", str(exc))
        metric = Metric.from_name("L2")
    space = _build_space(raw.get("space"), base_dir, err)
    err.raise_if_any()

    sets_raw = raw.get("sets")
    if not isinstance(sets_raw, list) or len(sets_raw) < 2:
        err.add("$.sets", "at least two sets are required")
        err.raise_if_any()
    ids = [d.get("id", j) if isinstance(d, dict) else j for j, d in enumerate(sets_raw)]
    if len(set(map(str, ids))) != len(ids):
        err.add("$.sets", "set ids must be unique")
    labels = []
    for j, d in enumerate(sets_raw):
        if not isinstance(d, dict) or "label" not in d:
            err.add(f"$.sets[{j}].label", "every set needs a label")
            labels.append(None)
            continue
        lab = d["label"]
        if not isinstance(lab, (int, str)) or isinstance(lab, bool):
            err.add(f"$.sets[{j}].label", "labels must be integers or short strings")
        labels.append(lab)
    seen = {}
    for j, lab in enumerate(labels):
        if lab is None:
            continue
        if lab in seen:
            err.add(f"$.sets[{j}].label",
                    f"classifier clause iv (distinct labels) violated: label {lab!r} already used by set {seen[lab]}")
        seen.setdefault(lab, j)
    built = []
    for j, d in enumerate(sets_raw):
        built.append(_build_set(d, j, space.dim, metric, built, err) if isinstance(d, dict) else None)
    err.raise_if_any()

    sets = built
    if space.finite:
        sets = [_restrict(s, space.support) for s in built]

    external = None
    ext_raw = raw.get("external_classifier")
    if ext_raw is not None:
        cmd = ext_raw.get("command") if isinstance(ext_raw, dict) else None
        if not (isinstance(cmd, list) and cmd and all(isinstance(c, str) for c in cmd)):
            err.add("$.external_classifier.command", "command must be a non-empty list of strings")
        else:
            timeout = ext_raw.get("timeout", 5.0)
            if _positive(timeout, "$.external_classifier.timeout", err, "timeout") is not None:
                external = SubprocessClassifier(cmd, timeout=timeout, cwd=base_dir)

    cfg_raw = raw.get("probe_config", {}) or {}
    unknown = set(cfg_raw) - _CONFIG_KEYS
    if unknown:
        err.add("$.probe_config", f"unknown keys {sorted(unknown)}")
    try:
        cfg = ProbeConfig(seed=seed, **{k: v for k, v in cfg_raw.items() if k in _CONFIG_KEYS})
    except (DomstabError, TypeError) as exc:
        err.add("$.probe_config", str(exc))
        cfg = ProbeConfig(seed=seed)
    if cfg.delta_start is None and space.bounds is None and not space.finite:
        err.add("$.probe_config.delta_start", "an unbounded space needs an explicit delta_start")

    resolutions = raw.get("resolutions", [])
    if not isinstance(resolutions, list) or not all(
            isinstance(r, (int, float)) and not isinstance(r, bool) and np.isfinite(r) and r > 0 for r in resolutions):
        err.add("$.resolutions", "resolutions must be a list of positive numbers")
        resolutions = []

    analyses = raw.get("analyses", list(ANALYSES))
    if not isinstance(analyses, list) or any(a not in ANALYSES for a in analyses):
        err.add("$.analyses", f"analyses must be a subset of {list(ANALYSES)}")
        analyses = []

    gen_raw = raw.get("generators", {}) or {}
    kinds = gen_raw.get("kinds", ["radial", "spiral", "jittered"])
    if not isinstance(kinds, list) or not kinds or any(k not in GENERATOR_KINDS for k in kinds):
        err.add("$.generators.kinds", f"kinds must be a non-empty subset of {list(GENERATOR_KINDS)}")
    ratio = gen_raw.get("ratio", 0.5)
    if not isinstance(ratio, (int, float)) or not 0 < ratio < 1:
        err.add("$.generators.ratio", "ratio must lie in (0, 1)")
    n_max = gen_raw.get("n_max", 64)
    if not isinstance(n_max, int) or n_max < 1:
        err.add("$.generators.n_max", "n_max must be a positive integer")

    eps_raw = raw.get("epsilon", {}) or {}
    if "epsilon_0" in eps_raw:
        _positive(eps_raw["epsilon_0"], "$.epsilon.epsilon_0", err, "epsilon_0")
    if eps_raw.get("variant", "halving") not in ("halving", "compounding"):
        err.add("$.epsilon.variant", "variant must be 'halving' or 'compounding'")

    probes = _build_probes(raw.get("probes", {"support": True} if space.finite else None), space, seed, err)
    if probes is not None and len(probes) == 0:
        err.add("$.probes", "probe specification resolves to no points")

    target = raw.get("cross_check_set", ids[0])
    if target not in ids:
        err.add("$.cross_check_set", f"unknown set {target!r}")
        target = ids[0]

    if err.items:
        if external is not None:
            external.close()
        err.raise_if_any()

    clf = Classifier(tuple(sets), tuple(labels), external=external, space=space)
    sc = Scenario(
        raw=raw, seed=seed, space=space, metric=metric, classifier=clf, probes=probes, config=cfg,
        resolutions=tuple(float(r) for r in resolutions), analyses=tuple(analyses),
        coverage_declared=bool(raw.get("coverage_declared", False)),
        cross_check_eligible=bool(raw.get("cross_check_eligible", False)),
        generator_config={"kinds": kinds, "ratio": float(ratio), "n_max": n_max},
        cross_check_target=ids.index(target), epsilon=dict(eps_raw), external=external, base_dir=base_dir,
    )
    return sc
