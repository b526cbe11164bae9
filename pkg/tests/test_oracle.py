import numpy as np
import pytest

from domstab import (FiniteScenario, enumerate_ball, oracle_accumulation_points, oracle_dense,
                     oracle_stability_table, oracle_stable_points)
from domstab.catalog import alternating_lattice, random_finite_cases, run_lattice
from domstab.errors import InvalidProbeError, InvalidScenarioError

LATTICE = (np.arange(101) / 100)[:, None]


def parity_scenario(rho=None):
    k = np.arange(101)
    return FiniteScenario(LATTICE, k % 2, ("even", "odd"), rho=rho)


def test_enumerate_ball_strict_radius():
    s = parity_scenario()
    assert enumerate_ball(s, [0.5], 0.015)[:, 0].tolist() == [0.49, 0.5, 0.51]
    assert enumerate_ball(s, [0.5], 0.01)[:, 0].tolist() == [0.5]


def test_enumerate_ball_rejects_bad_probes():
    s = parity_scenario()
    with pytest.raises(InvalidProbeError):
        enumerate_ball(s, [0.5], 0.0)
    with pytest.raises(InvalidProbeError):
        enumerate_ball(s, [0.505], 0.1)


def test_alternating_lattice_has_no_stable_points():
    for mode, rho in (("strict", None), ("resolution", 0.005), ("resolution", 0.01)):
        found = oracle_stable_points(parity_scenario(), mode, rho)
        assert found == {0: [], 1: []}


def test_run_lattice_interior_is_stable_at_resolution():
    k = np.arange(101)
    s = FiniteScenario(LATTICE, (k >= 50).astype(int), ("A", "B"), rho=0.015)
    got = oracle_stable_points(s, "resolution")
    assert [round(p[0] * 100) for p, _ in got[0]] == list(range(49))
    assert [round(p[0] * 100) for p, _ in got[1]] == list(range(51, 101))
    # the largest clean ball reaches exactly to the nearest rival
    certs = dict((round(p[0] * 100), d) for p, d in got[0])
    assert certs[0] == 0.5 and certs[48] == 0.5 - 0.48
    assert oracle_stable_points(s, "strict") == {0: [], 1: []}


def test_single_set_is_invalid():
    with pytest.raises(InvalidScenarioError):
        FiniteScenario(LATTICE, np.zeros(101), ("A",))
    with pytest.raises(InvalidScenarioError):
        FiniteScenario(LATTICE, np.zeros(101), ("A", "A"))
    with pytest.raises(InvalidScenarioError):
        FiniteScenario(np.zeros((2, 1)), [0, 1], ("A", "B"))


def reciprocal_scenario():
    inv = (1.0 / np.arange(1, 1001))[:, None]
    return FiniteScenario.from_sets([inv, [[0.0], [0.3]]], ("R", "Z"))


def test_zero_accumulates_once_resolution_exceeds_smallest_member():
    s = reciprocal_scenario()
    acc = oracle_accumulation_points(s, 0, rho=1.5e-3)
    assert (0.0,) in acc
    # the nearest member to 0 is 1/1000, so a resolution of 1e-4 leaves a gap
    assert (0.0,) not in oracle_accumulation_points(s, 0, rho=1e-4)


def test_point_three_is_not_an_accumulation_point():
    s = reciprocal_scenario()
    assert (0.3,) not in oracle_accumulation_points(s, 0, rho=0.01)
    assert (0.3,) in oracle_accumulation_points(s, 0, rho=0.04)


def test_isolated_points_never_accumulate_below_spacing():
    s = FiniteScenario([[0.0], [1.0], [3.0]], [0, 0, 1], ("A", "B"))
    assert oracle_accumulation_points(s, 0, rho=0.5) == []
    assert oracle_accumulation_points(s, 1, rho=0.5) == []


def test_density_of_even_lattice():
    s = parity_scenario()
    assert oracle_dense(s, 0, 0.02)
    assert not oracle_dense(s, 0, 0.005)
    full = FiniteScenario.from_sets([LATTICE, []], ("all", "none"))
    assert oracle_dense(full, 0, 1e-9)
    assert not oracle_dense(full, 1, 10.0)


def test_classifier_bridge():
    c = alternating_lattice()
    s = FiniteScenario.from_classifier(c)
    assert s.set_ids == ("D", "Dc") and np.array_equal(s.assignment, np.arange(101) % 2)


CASES = random_finite_cases(seed=11, count=12, max_points=200)


@pytest.mark.parametrize("case", CASES, ids=lambda c: c.name)
def test_strict_mode_is_always_empty(case):
    s = FiniteScenario.from_classifier(case.classifier, case.metric, case.rho)
    assert all(not stable for stable, _ in oracle_stability_table(s, "strict"))


@pytest.mark.parametrize("case", CASES, ids=lambda c: c.name)
def test_dense_rival_forbids_large_certificates(case):
    s = FiniteScenario.from_classifier(case.classifier, case.metric, case.rho)
    table = oracle_stability_table(s, "resolution")
    for k in range(len(s.labels)):
        for r in case.resolutions:
            if not oracle_dense(s, k, r):
                continue
            for (stable, cert), j in zip(table, s.assignment):
                if j != k and stable:
                    assert cert < r


def test_brute_force_on_tiny_space():
    # every radius on a fine grid, checked with explicit loops
    S = np.array([[0.0], [0.1], [0.25], [0.3], [0.7], [0.75]])
    a = np.array([0, 0, 1, 1, 0, 1])
    s = FiniteScenario(S, a, ("A", "B"), rho=0.12)
    grid = np.linspace(1e-3, 1.0, 4000)
    for mode in ("strict", "resolution"):
        want = []
        for i, x in enumerate(S[:, 0]):
            best = None
            for delta in grid:
                if mode == "resolution" and delta < 0.12:
                    continue
                ball = [j for j in range(len(S)) if abs(S[j, 0] - x) < delta]
                if any(a[j] != a[i] for j in ball):
                    continue
                lows = [g for g in grid if g <= delta and (mode == "strict" or g >= 0.12)]
                if all(sum(abs(S[j, 0] - x) < g for j in range(len(S))) >= 2 for g in lows):
                    best = delta
            want.append(best is not None)
        got = [st for st, _ in oracle_stability_table(s, mode)]
        assert got == want, mode
    assert [st for st, _ in oracle_stability_table(s, "resolution")] == [True, True, True, True, False, False]
