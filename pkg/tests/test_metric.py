from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domstab import L1, L2, LINF, Metric, Space, derive_rng_stream, distance, sample_ball
from domstab.errors import DegenerateRadiusError, DimensionError, InvalidInputError
from domstab.metric import as_point, radius_key


def test_l2_pythagorean_triple():
    assert distance(L2, (0, 0), (3, 4)) == 5.0


def test_linf_identity():
    assert distance(LINF, (1, 2), (1, 2)) == 0.0


def test_l1_matches_exact_rational_sum():
    # oracle: exact rational arithmetic on the binary64 inputs
    p, q = (0.1, 0.2), (0.4, -0.2)
    exact = sum(abs(Fraction(a) - Fraction(b)) for a, b in zip(p, q))
    got = distance(L1, p, q)
    assert got == pytest.approx(0.7, abs=2e-16)
    assert abs(Fraction(got) - exact) <= Fraction(2 ** -51)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        distance(L2, (0, 0), (0, 0, 0))


def test_point_rejects_nan_and_folds_negative_zero():
    with pytest.raises(InvalidInputError):
        as_point([0.0, np.nan])
    assert np.signbit(as_point([-0.0]))[0] == False  # noqa: E712


def test_custom_metric_and_names():
    m = Metric.custom(lambda p, q: float(np.abs(p - q).max()))
    assert distance(m, (0, 0), (1, -2)) == 2.0
    assert Metric.from_name("euclidean") is L2
    with pytest.raises(InvalidInputError):
        Metric.from_name("cosine")


def test_space_support_validation():
    with pytest.raises(InvalidInputError):
        Space(1, support=[[0.0], [0.0]])
    with pytest.raises(InvalidInputError):
        Space(1, bounds=([0.0], [1.0]), support=[[2.0]])
    s = Space(1, support=[[0.0], [0.5], [1.0]])
    assert s.support_index([0.5]) == 1 and s.support_index([0.25]) is None
    assert s.diameter(L2) == 1.0
    assert s.ball([0.5], 0.5, L2).tolist() == [[0.5]]


def test_sample_ball_unit_disk():
    pts = sample_ball((0, 0), 1.0, 64, L2, derive_rng_stream(7, 0))
    assert pts.shape == (64, 2)
    assert np.all(np.sqrt((pts ** 2).sum(1)) < 1.0)


@pytest.mark.parametrize("metric", [L1, L2, LINF])
def test_sample_ball_strict_inequality_every_metric(metric):
    c = np.array([0.3, -1.2, 5.0])
    pts = sample_ball(c, 0.01, 200, metric, derive_rng_stream(1, 2))
    assert np.all(metric.to_many(pts, c) < 0.01)
    assert np.any(np.any(pts != c, axis=1))


def test_sample_ball_below_floor():
    # 1 + 1e-320 == 1, so no representable neighbour of (1, 1) lies that close
    assert 1.0 + 1e-320 == 1.0
    with pytest.raises(DegenerateRadiusError):
        sample_ball((1, 1), 1e-320, 8, L2, derive_rng_stream(0, 0))


def test_sample_ball_deterministic():
    a = sample_ball((0, 0, 0), 2.0, 50, L2, derive_rng_stream(42, 3))
    b = sample_ball((0, 0, 0), 2.0, 50, L2, derive_rng_stream(42, 3))
    assert np.array_equal(a, b)


def test_sample_ball_rejects_bad_arguments():
    with pytest.raises(InvalidInputError):
        sample_ball((0,), 0.0, 4, L2, derive_rng_stream(0, 0))
    with pytest.raises(InvalidInputError):
        sample_ball((0,), 1.0, 0, L2, derive_rng_stream(0, 0))


def test_rng_streams():
    first = lambda s: s.generator().random()  # noqa: E731
    assert first(derive_rng_stream(42, 0)) == first(derive_rng_stream(42, 0))
    assert first(derive_rng_stream(42, 0)) != first(derive_rng_stream(42, 1))
    assert first(derive_rng_stream(41, 0)) != first(derive_rng_stream(42, 0))
    with pytest.raises(InvalidInputError):
        derive_rng_stream(1, -1)


def test_radius_key_distinguishes_neighbouring_floats():
    assert radius_key(0.1) != radius_key(np.nextafter(0.1, 1.0))


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
triples = st.integers(1, 4).flatmap(lambda n: st.tuples(*[st.lists(finite, min_size=n, max_size=n)] * 3))


@settings(max_examples=300, deadline=None)
@given(triples)
def test_positivity_symmetry_identity_property(tr):
    p, q, _ = map(np.array, tr)
    for m in (L1, L2, LINF):
        dpq, dqp = distance(m, p, q), distance(m, q, p)
        assert dpq >= 0 and dpq == dqp
        assert (dpq == 0) == bool(np.array_equal(p, q))


@settings(max_examples=300, deadline=None)
@given(triples)
def test_triangle_inequality_within_rounding_property(tr):
    # each side carries at most (dim + 2) roundings, so allow that many unit roundoffs
    p, q, r = map(np.array, tr)
    slack = 1.0 + (p.size + 3) * 2.0 ** -52
    for m in (L1, L2, LINF):
        assert distance(m, p, r) <= (distance(m, p, q) + distance(m, q, r)) * slack


def test_l2_tiny_difference_is_not_zero():
    assert distance(L2, (0.0,), (1.1e-292,)) == 1.1e-292
    assert distance(L2, (0.0, 0.0), (3e-200, 4e-200)) == pytest.approx(5e-200, rel=1e-15)
    assert distance(L2, (0.0, 0.0), (3e200, 4e200)) == pytest.approx(5e200, rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 1000), st.floats(1e-6, 1e3))
def test_sample_ball_postcondition_property(seed, idx, radius):
    c = np.array([1.5, -2.0])
    for m in (L1, L2, LINF):
        pts = sample_ball(c, radius, 16, m, derive_rng_stream(seed, idx))
        assert np.all(m.to_many(pts, c) < radius)
