import sys
import textwrap

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domstab import (Ball, BoxUnion, Classifier, Complement, FiniteSet, Lattice, SubprocessClassifier,
                     check_classifier_axioms, classify)
from domstab.errors import ClassifierTimeout, InvalidInputError, PartitionViolationError, UndefinedPointError


def interval_vs_rest():
    d = BoxUnion.open_box([0.0], [1.0], set_id="D")
    return Classifier((d, Complement(d, set_id="Dc")), ("A", "B"))


def test_induced_labels():
    c = interval_vs_rest()
    assert classify(c, [0.5]) == "A"
    assert classify(c, [1.0]) == "B"
    assert classify(c, 7.0) == "B"


def test_overlap_and_gap_errors():
    a = BoxUnion.closed_box([0.0], [1.0])
    b = BoxUnion.closed_box([0.5], [2.0])
    c = Classifier((a, b), ("A", "B"))
    with pytest.raises(PartitionViolationError):
        classify(c, [0.75])
    with pytest.raises(UndefinedPointError):
        classify(c, [5.0])


def test_construction_checks():
    d = BoxUnion.open_box([0.0], [1.0])
    with pytest.raises(InvalidInputError):
        Classifier((d,), ("A",))
    with pytest.raises(InvalidInputError):
        Classifier((d, Complement(d)), ("A",))


def test_disjoint_boxes_pass():
    a = BoxUnion.closed_box([0.0, 0.0], [1.0, 1.0])
    b = BoxUnion.closed_box([2.0, 0.0], [3.0, 1.0])
    c = Classifier((a, b), (1, 2))
    g = np.random.default_rng(0)
    probes = np.concatenate([g.random((500, 2)), g.random((500, 2)) + [2.0, 0.0]])
    r = check_classifier_axioms(c, probes)
    assert r.passed and r.violations == () and not r.approximate


def test_shared_label_is_clause_iv():
    d = BoxUnion.open_box([0.0], [1.0])
    c = Classifier((d, Complement(d)), ("A", "A"))
    r = check_classifier_axioms(c, [[0.5], [2.0]])
    assert not r.passed and r.clauses() == ["iv"]


def test_inconsistent_external_is_clause_iii():
    d = BoxUnion.open_box([0.0], [1.0])

    def model(p):  # says B on the right half of D, which is wrong
        return "B" if p[0] >= 0.75 or not 0.0 < p[0] < 1.0 else "A"

    c = Classifier((d, Complement(d)), ("A", "B"), external=model)
    r = check_classifier_axioms(c, [[0.5], [0.8], [3.0]])
    assert r.clauses() == ["iii"]
    (v,) = r.violations
    assert v.witnesses[0] == ((0.8,), "B", "A")
    assert c.with_trust(False).trusted is False


def test_overlap_reported_as_clause_ii():
    a = Ball([0.0, 0.0], 1.0)
    b = Ball([1.5, 0.0], 1.0)
    r = check_classifier_axioms(Classifier((a, b), ("A", "B")), [[0.75, 0.0]], require_coverage=False)
    assert r.clauses() == ["ii"]
    w = r.violations[0].witnesses[0]
    assert a.contains(w) and b.contains(w)


def test_coverage_is_clause_i():
    a = FiniteSet([[0.0]])
    b = FiniteSet([[1.0]])
    r = check_classifier_axioms(Classifier((a, b), ("A", "B")), [[0.0], [0.5]])
    assert r.clauses() == ["i"] and r.violations[0].witnesses == ((0.5,),)
    assert check_classifier_axioms(Classifier((a, b), ("A", "B")), [[0.5]], require_coverage=False).passed


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_induced_classifier_self_consistent_property(seed, dim):
    g = np.random.default_rng(seed)
    even = Lattice.parity(np.zeros(dim), 0.25, "even")
    odd = Lattice.parity(np.zeros(dim), 0.25, "odd")
    box = BoxUnion.open_box(np.full(dim, -1.0), np.full(dim, 1.0))
    for c in (Classifier((even, odd), ("e", "o")), Classifier((box, Complement(box)), (0, 1))):
        probes = g.uniform(-2, 2, (200, dim))
        if c.sets[0] is even:
            probes = np.rint(probes * 4) / 4
        r = check_classifier_axioms(c, probes)
        assert r.passed
        labels = [c.classify(p) for p in probes]
        assert labels == [c.classify(p) for p in probes]


@pytest.fixture
def model_script(tmp_path):
    path = tmp_path / "model.py"
    path.write_text(textwrap.dedent("""
        import sys, time
        for line in sys.stdin:
            x = [float(t) for t in line.split()]
            if x[0] > 100:
                time.sleep(5)
            print("A" if 0 < x[0] < 1 else "B", flush=True)
    """))
    return path


def test_subprocess_classifier_protocol(model_script):
    with SubprocessClassifier([sys.executable, str(model_script)], timeout=2.0) as m:
        assert m([0.5]) == "A"
        assert m(np.array([1.0])) == "B"
        d = BoxUnion.open_box([0.0], [1.0])
        c = Classifier((d, Complement(d)), ("A", "B"), external=m)
        assert check_classifier_axioms(c, [[0.25], [0.75], [1.5]]).passed


def test_subprocess_classifier_timeout_restarts(model_script):
    with SubprocessClassifier([sys.executable, str(model_script)], timeout=0.5) as m:
        with pytest.raises(ClassifierTimeout):
            m([200.0])
        assert m([0.5]) == "A"
