"""Classifiers over a disjoint family of sets, and an axiom checker.

A classifier is *induced* when its labels come from set membership alone
(``x in D_i`` gives ``labels[i]``). An *external* classifier delegates
labelling to a callable, e.g. a real model behind :class:`SubprocessClassifier`;
the sets then describe what the model is supposed to do, and the axiom
checker reports where it does not.
"""
from __future__ import annotations

import itertools
import os
import selectors
import subprocess
import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import (ClassifierTimeout, DimensionError, InvalidInputError, PartitionViolationError,
                     UndefinedPointError)
from .metric import L2, Metric, Space, as_point, as_points
from .sets import DomainSet, sets_disjoint

__all__ = ["Classifier", "classify", "AxiomReport", "Violation", "check_classifier_axioms",
           "SubprocessClassifier"]

NO_SET = -1
MANY_SETS = -2


@dataclass(frozen=True, eq=False)
class Classifier:
    sets: tuple
    labels: tuple
    external: Optional[Callable] = None
    space: Optional[Space] = None
    trusted: bool = True

    def __post_init__(self):
        sets = tuple(self.sets)
        labels = tuple(self.labels)
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "labels", labels)
        if len(sets) != len(labels):
            raise InvalidInputError("one label per set is required")
        if len(sets) < 2:
            raise InvalidInputError("a classifier needs at least two sets")
        dims = {s.dim for s in sets}
        if len(dims) != 1:
            raise DimensionError("all sets must share one ambient dimension")
        if self.space is not None and self.space.dim != sets[0].dim:
            raise DimensionError("space and sets disagree on dimension")

    @property
    def dim(self):
        return self.sets[0].dim

    @cached_property
    def ambient(self) -> Space:
        return self.space if self.space is not None else Space(self.dim)

    def set_indices(self, X):
        """Index of the containing set per row; -1 if none, -2 if several."""
        X = as_points(X, self.dim)
        hits = np.stack([s.contains(X) for s in self.sets], axis=1)
        count = hits.sum(axis=1)
        out = np.argmax(hits, axis=1).astype(np.int64)
        out[count == 0] = NO_SET
        out[count > 1] = MANY_SETS
        return out

    def set_index(self, p) -> int:
        p = as_point(p, self.dim)
        i = int(self.set_indices(p[None, :])[0])
        if i == NO_SET:
            raise UndefinedPointError(f"{p} lies in none of the sets")
        if i == MANY_SETS:
            raise PartitionViolationError(f"{p} lies in more than one set")
        return i

    @cached_property
    def support_indices(self):
        """Set index of every support point of a finite space."""
        if self.space is None or self.space.support is None:
            raise InvalidInputError("classifier has no finite support")
        return self.set_indices(self.space.support)

    def classify(self, p):
        i = self.set_index(p)
        if self.external is not None:
            return self.external(as_point(p, self.dim))
        return self.labels[i]

    def label_many(self, X, idx=None):
        """Labels for rows already known to lie in sets ``idx``."""
        X = as_points(X, self.dim)
        if self.external is not None:
            return [self.external(row) for row in X]
        idx = self.set_indices(X) if idx is None else idx
        return [self.labels[i] if i >= 0 else None for i in idx]

    def with_trust(self, trusted: bool) -> "Classifier":
        return Classifier(self.sets, self.labels, self.external, self.space, trusted)


def classify(c: Classifier, p):
    return c.classify(p)


# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Violation:
    clause: str                 # "i", "ii", "iii" or "iv"
    witnesses: tuple
    detail: str = ""
    approximate: bool = False

    def to_dict(self):
        return {
            "clause": self.clause,
            "witnesses": [list(w) if isinstance(w, (tuple, list)) else w for w in self.witnesses],
            "detail": self.detail,
            "approximate": self.approximate,
        }


@dataclass(frozen=True)
class AxiomReport:
    violations: tuple = field(default_factory=tuple)
    approximate: bool = False

    @property
    def passed(self):
        return not self.violations

    def clauses(self):
        return sorted({v.clause for v in self.violations})

    def to_dict(self):
        return {"passed": self.passed, "approximate": self.approximate,
                "violations": [v.to_dict() for v in self.violations]}


def _pt(p):
    return tuple(float(v) for v in p)


def check_classifier_axioms(c: Classifier, probes, require_coverage=True, metric: Metric = L2,
                            max_witnesses=5) -> AxiomReport:
    """Check the four classifier conditions, collecting violations as data.

    Disjointness is decided analytically for pairs of exact sets and by
    probing otherwise (such findings carry ``approximate``). Constancy of the
    labelling and coverage are checked on the probes.
    """
    P = as_points(probes, c.dim) if len(probes) else np.zeros((0, c.dim))
    out = []
    approximate = False

    # iv: distinct labels
    for (i, a), (j, b) in itertools.combinations(enumerate(c.labels), 2):
        if a == b:
            out.append(Violation("iv", (a,), f"sets {c.sets[i].set_id!r} and {c.sets[j].set_id!r} share label {a!r}"))

    # ii: disjointness
    for i, j in itertools.combinations(range(len(c.sets)), 2):
        status, w = sets_disjoint(c.sets[i], c.sets[j], metric)
        if status is False:
            out.append(Violation("ii", (_pt(w),), f"sets {c.sets[i].set_id!r} and {c.sets[j].set_id!r} intersect"))
        elif status is None:
            approximate = True
    idx = c.set_indices(P) if len(P) else np.zeros(0, dtype=np.int64)
    overlap = np.flatnonzero(idx == MANY_SETS)
    already = {v.witnesses[0] for v in out if v.clause == "ii"}
    if len(overlap):
        wits = tuple(_pt(P[k]) for k in overlap[:max_witnesses])
        if not already:
            out.append(Violation("ii", wits, f"{len(overlap)} probe(s) lie in several sets", approximate=True))

    # i: coverage
    missing = np.flatnonzero(idx == NO_SET)
    if require_coverage and len(missing):
        out.append(Violation("i", tuple(_pt(P[k]) for k in missing[:max_witnesses]),
                             f"{len(missing)} probe(s) lie in no set"))

    # iii: constant label on each set
    inside = np.flatnonzero(idx >= 0)
    if len(inside):
        bad = []
        undefined = []
        for k in inside:
            want = c.labels[idx[k]]
            try:
                got = c.external(P[k]) if c.external is not None else c.labels[idx[k]]
            except ClassifierTimeout:
                undefined.append(k)
                continue
            except Exception:  # an external model that crashes is undefined there
                undefined.append(k)
                continue
            if got != want and str(got) != str(want):
                bad.append((k, got, want))
        if bad:
            wits = tuple((_pt(P[k]), str(got), str(want)) for k, got, want in bad[:max_witnesses])
            out.append(Violation("iii", wits, f"{len(bad)} probe(s) labelled differently from their set"))
        if undefined:
            out.append(Violation("i", tuple(_pt(P[k]) for k in undefined[:max_witnesses]),
                                 "external classifier undefined on probes inside the sets"))
    return AxiomReport(tuple(out), approximate)


# ---------------------------------------------------------------------------
class SubprocessClassifier:
    """Talk to a model living in a child process.

    Protocol: for each query the parent writes one line of space-separated
    coordinates (``repr`` precision); the child answers one line holding the
    label token. A reply slower than ``timeout`` seconds raises
    :class:`ClassifierTimeout` and restarts the child.
    Calls are serialised with a lock, so one instance may be shared by threads.
    """

    def __init__(self, command, timeout=5.0, cwd=None):
        self.command = list(command) if not isinstance(command, str) else [command]
        self.timeout = float(timeout)
        self.cwd = cwd
        self._lock = threading.Lock()
        self._proc = None
        self._buf = b""

    def _start(self):
        self._proc = subprocess.Popen(self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                      stderr=subprocess.DEVNULL, cwd=self.cwd)
        self._buf = b""

    def _readline(self):
        fd = self._proc.stdout.fileno()
        with selectors.DefaultSelector() as sel:
            sel.register(fd, selectors.EVENT_READ)
            while b"\n" not in self._buf:
                if not sel.select(self.timeout):
                    raise ClassifierTimeout(f"no answer within {self.timeout}s")
                chunk = os.read(fd, 4096)
                if not chunk:
                    raise ClassifierTimeout("classifier process closed its output")
                self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode().strip()

    def __call__(self, p):
        line = " ".join(repr(float(v)) for v in np.asarray(p, dtype=float).reshape(-1)) + "\n"
        with self._lock:
            if self._proc is None or self._proc.poll() is not None:
                self._start()
            try:
                self._proc.stdin.write(line.encode())
                self._proc.stdin.flush()
                return self._readline()
            except (ClassifierTimeout, BrokenPipeError):
                self._kill()
                raise ClassifierTimeout(f"external classifier failed on {line.strip()!r}") from None

    def _kill(self):
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
            self._proc = None

    def close(self):
        with self._lock:
            if self._proc is not None:
                try:
                    self._proc.stdin.close()
                    self._proc.wait(timeout=1.0)
                except Exception:
                    self._proc.kill()
                self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
