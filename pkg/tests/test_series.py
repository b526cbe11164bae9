import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domstab import (L1, L2, LINF, BoxUnion, Lattice, ProbeConfig, SequenceGenerator, default_generators,
                     derive_rng_stream, extract_subseries_in_set, generate_sequence, test_stability_via_series,
                     test_stable_point)
from domstab.catalog import alternating_lattice, open_box, open_disk, run_lattice
from domstab.errors import DegenerateRadiusError, InvalidInputError
from domstab.stability import MEMBERSHIP, STABLE, UNSTABLE, reverify_witness

EPS = 2.0 ** -52


def radial(r0=0.25, q=0.5, direction=(1.0,), n_max=64):
    return SequenceGenerator("radial", q, r0, n_max, direction=direction)


def test_radial_terms():
    seq = generate_sequence(radial(), [0.5])
    expected = 0.5 + 0.25 * 0.5 ** np.arange(len(seq))
    assert seq[:3, 0].tolist() == [0.75, 0.625, 0.5625]
    assert np.array_equal(seq[:, 0], expected)
    assert np.all(seq[:, 0] != 0.5)


def test_jittered_is_reproducible():
    g1 = SequenceGenerator("jittered", 0.5, 0.1, 40, rng=derive_rng_stream(7, 3, 1))
    g2 = SequenceGenerator("jittered", 0.5, 0.1, 40, rng=derive_rng_stream(7, 3, 1))
    g3 = SequenceGenerator("jittered", 0.5, 0.1, 40, rng=derive_rng_stream(7, 3, 2))
    a, b, c = (generate_sequence(g, [0.2, 0.4]) for g in (g1, g2, g3))
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_initial_offset_below_floor():
    with pytest.raises(DegenerateRadiusError):
        generate_sequence(radial(r0=EPS / 10, direction=(1.0, 0.0)), [1.0, 0.0])


def test_generator_validation():
    with pytest.raises(InvalidInputError):
        SequenceGenerator("radial", 1.0, 0.1, direction=(1.0,))
    with pytest.raises(InvalidInputError):
        SequenceGenerator("radial", 0.5, 0.1)
    with pytest.raises(InvalidInputError):
        SequenceGenerator("zigzag")


def test_interval_interior_keeps_every_term():
    d = BoxUnion.open_box([0.0], [1.0])
    info = extract_subseries_in_set(generate_sequence(radial(), [0.5]), d, [0.5])
    assert info.k_0 == 0 and info.all_in_set and info.indices == tuple(range(info.length))


def test_interval_endpoint_keeps_nothing():
    d = BoxUnion.open_box([0.0], [1.0])
    info = extract_subseries_in_set(generate_sequence(radial(), [1.0]), d, [1.0])
    assert info.indices == () and not info.all_in_set and info.k_0 is None


def test_lattice_walk_keeps_even_sites_only():
    c = alternating_lattice()
    S = c.ambient.support
    walk = SequenceGenerator("lattice_walk", r0=0.105, support=S)
    seq = generate_sequence(walk, [0.5])
    even = c.sets[0]
    info = extract_subseries_in_set(seq, even, [0.5])
    ks = np.rint(seq[:, 0] * 100).astype(int)
    # enumerated walk: the ten neighbours within 0.105, farthest first
    assert set(ks.tolist()) == set(range(40, 61)) - {50}
    assert [int(ks[i]) % 2 for i in info.indices] == [0] * len(info.indices)
    assert len(info.indices) == 10 and not info.all_in_set


def test_interior_point_of_box_stable_by_series():
    c = open_box()
    cfg = ProbeConfig(delta_start=0.25)
    v = test_stability_via_series(c, [0.5, 0.5], cfg=cfg, eligible=True)
    assert v.outcome == STABLE and v.notes == ()
    assert 0.0 < v.certified_delta <= 0.5


def test_disk_outward_generator_refutes():
    c = open_disk()
    x = [1.0, 0.0]
    inward = [radial(0.25, direction=(-1.0, 0.0))]
    outward = [radial(0.25, direction=(1.0, 0.0))]
    # x itself is in the complement: inward terms are rivals, outward terms stay home
    v = test_stability_via_series(c, x, inward + outward, ProbeConfig(delta_start=0.25))
    assert v.outcome == UNSTABLE and v.clause == MEMBERSHIP
    assert c.sets[0].contains(v.witness) and v.witness[0] < 1.0
    assert reverify_witness(c, x, v)
    home = c.sets[1]
    tail = generate_sequence(outward[0], x)
    assert extract_subseries_in_set(tail, home, x).all_in_set
    assert v.notes == ("advisory",)


def test_disk_point_just_inside():
    c = open_disk()
    x = [np.nextafter(1.0, 0.0), 0.0]
    v = test_stability_via_series(c, x, cfg=ProbeConfig(delta_start=0.25))
    assert v.outcome == UNSTABLE and reverify_witness(c, x, v)


def test_finite_series_matches_ball_tester_on_run_lattice():
    c = run_lattice()
    for mode, rho in (("strict", None), ("resolution", 0.015), ("resolution", 0.035)):
        cfg = ProbeConfig(delta_start=0.3, mode=mode, rho=rho)
        for k in range(101):
            a = test_stable_point(c, [k / 100], cfg)
            b = test_stability_via_series(c, [k / 100], cfg=cfg)
            assert a.outcome == b.outcome, (mode, rho, k)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(["radial", "spiral", "jittered"]), st.sampled_from([L1, L2, LINF]),
       st.floats(0.05, 0.95), st.floats(1e-8, 1.0), st.integers(1, 4), st.integers(0, 2 ** 32))
def test_convergence_bound_property(kind, metric, q, r0, dim, seed):
    g = np.random.default_rng(seed)
    x = g.uniform(-5, 5, dim)
    direction = tuple(g.standard_normal(dim)) if kind == "radial" else None
    gen = SequenceGenerator(kind, q, r0, 64, direction=direction, rng=derive_rng_stream(seed, 0, 0))
    seq = generate_sequence(gen, x, metric)
    d = metric.to_many(seq, x)
    assert np.all(d <= r0 * q ** np.arange(len(seq)))
    assert np.all(np.any(seq != x, axis=1))


@settings(max_examples=80, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(1e-4, 0.5))
def test_subseries_invariants_property(a, b, radius):
    c = open_box()
    x = np.array([a, b])
    D = c.sets[0]
    for gen in default_generators(2, 3, 0, r0=0.5):
        seq = generate_sequence(gen, x)
        info = extract_subseries_in_set(seq, D, x, radius)
        idx = np.array(info.indices, dtype=int)
        assert np.all(np.diff(idx) > 0)
        if len(idx):
            assert np.all(D.contains(seq[idx])) and np.all(np.any(seq[idx] != x, axis=1))
            assert np.all(L2.to_many(seq[idx], x) < radius)
        if info.all_in_set:
            tail = [i for i in range(info.k_0, len(seq)) if L2.to_many(seq[i][None, :], x)[0] < radius]
            assert set(tail) <= set(info.indices)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(0, 2 ** 32))
def test_series_agrees_with_ball_tester_property(a, b, seed):
    c = open_box()
    x = [a, b]
    cfg = ProbeConfig(delta_start=0.25, seed=seed, samples_per_radius=32)
    s = test_stable_point(c, x, cfg)
    t = test_stability_via_series(c, x, cfg=cfg, eligible=True)
    assert s.outcome == t.outcome
