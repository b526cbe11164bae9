"""Machine-epsilon calibration and the representability floor."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError

VARIANTS = ("halving", "compounding")
DEFAULT_K = 4


@dataclass(frozen=True)
class EpsilonCalibration:
    epsilon: float          # first iterate with 1 + eps == 1
    epsilon_prev: float     # last iterate with 1 + eps > 1
    variant: str
    k: int
    resolution: float       # k * epsilon_prev * (1 + |reference|_inf)
    iterations: int

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "epsilon_prev": self.epsilon_prev,
            "variant": self.variant,
            "k": self.k,
            "resolution": self.resolution,
            "iterations": self.iterations,
        }


def estimate_machine_epsilon(epsilon_0=1.0, variant="halving", k=DEFAULT_K, reference=None):
    """Shrink ``epsilon_0`` until ``1 + eps`` no longer differs from 1.

    ``halving`` divides by two each step. ``compounding`` divides the n-th iterate
    by ``2**n`` (n = 1, 2, ...), giving 1, 1/2, 1/8, 1/64, ... which reaches
    the stopping point in far fewer steps but lands well below the unit
    roundoff.
    """
    if variant not in VARIANTS:
        raise InvalidInputError(f"unknown epsilon variant {variant!r}")
    eps = float(epsilon_0)
    if not math.isfinite(eps) or eps <= 0.0:
        raise InvalidInputError(f"epsilon_0 must be finite and positive, got {epsilon_0!r}")
    if k <= 0:
        raise InvalidInputError("k must be positive")

    one = 1.0
    prev = None
    n = 0
    while one + eps != one:
        prev = eps
        n += 1
        eps = eps / 2.0 if variant == "halving" else eps / 2.0 ** n
    if prev is None:
        # epsilon_0 was already indistinguishable from zero at 1.0
        raise InvalidInputError(f"1 + epsilon_0 == 1 already for epsilon_0={epsilon_0!r}")

    scale = 1.0
    if reference is not None:
        scale += float(np.max(np.abs(np.asarray(reference, dtype=float)), initial=0.0))
    return EpsilonCalibration(
        epsilon=eps,
        epsilon_prev=prev,
        variant=variant,
        k=int(k),
        resolution=k * prev * scale,
        iterations=n,
    )


@lru_cache(maxsize=None)
def machine_epsilon():
    """Spacing of binary64 just above 1, as found by the halving loop."""
    return estimate_machine_epsilon(1.0, "halving").epsilon_prev


def representability_floor(x, k=DEFAULT_K):
    """Smallest radius at which a ball around ``x`` surely holds a distinct double.

    ``k * eps * (1 + |x|_inf)``.
    """
    x = np.asarray(x, dtype=float)
    return k * machine_epsilon() * (1.0 + float(np.max(np.abs(x), initial=0.0)))
