from __future__ import annotations

from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaselab.catalogue import CatalogueSpec, random_phase
from phaselab.errors import IndexOutOfRange, InducedMonotonicityError, NotACongruence, UnknownIdentifier
from phaselab.morphism import find_isomorphism, morphism_violations
from phaselab.phase import BINARY, Phase
from phaselab.quotient import (Congruence, admissible_pairs, all_congruences, boundary, collapse_congruence,
                               collapse_stratum, completion, congruence_closure, is_admissible, is_complete,
                               is_congruence, maximal_admissible, quotient_phase, set_partitions,
                               smallest_congruence_oracle)


def test_closure_examples(fx):
    m, p = fx["max3"], fx["pair4"]
    assert congruence_closure(m, [("e1", "e2")]).classes == ((0,), (1, 2))
    assert congruence_closure(m, []).is_diagonal
    assert congruence_closure(p, [("a", "b")]).classes == ((0, 1), (2,), (3,))
    with pytest.raises(UnknownIdentifier):
        congruence_closure(m, [(0, 9)])


def test_closure_matches_oracle_on_small_catalogue(cat3):
    for p in cat3[::11]:
        for a, b in combinations(range(p.n), 2):
            assert congruence_closure(p, [(a, b)]) == smallest_congruence_oracle(p, [(a, b)])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**63 - 1), a=st.integers(0, 3), b=st.integers(0, 3))
def test_closure_matches_oracle_size_four(seed, a, b):
    p = random_phase(seed, CatalogueSpec(4))
    c = congruence_closure(p, [(a, b)])
    assert is_congruence(p, c) and c.related(a, b)
    assert c == smallest_congruence_oracle(p, [(a, b)])


def test_set_partitions_are_bell_numbers():
    assert [sum(1 for _ in set_partitions(n)) for n in range(6)] == [1, 1, 2, 5, 15, 52]


def test_quotient_examples(fx):
    m, p = fx["max3"], fx["pair4"]
    q = quotient_phase(m, Congruence.from_classes(3, [[0], [1, 2]]))
    assert q.n == 2 and q.defect == (0, 1) and q.tables == ((0, 1, 1, 1),)
    same = quotient_phase(m, Congruence.diagonal(3))
    assert find_isomorphism(m, same) is not None
    q = quotient_phase(p, Congruence.from_classes(4, [[0, 1], [2], [3]]))
    assert q.n == 3 and q.defect == (0, 1, 2)


def test_quotient_rejects_non_congruence(fx):
    with pytest.raises(NotACongruence):
        quotient_phase(fx["pair4"], Congruence.from_classes(4, [[0, 2], [1], [3]]))


def test_quotient_reports_induced_monotonicity_failure():
    # u absorbs, everything else goes to w; merging u with w drops m(v, v) below defect 1
    table = (0, 0, 0, 0, 2, 2, 0, 2, 2)
    p = Phase("Q", ("u", "v", "w"), BINARY, (table,), (0, 1, 2))
    c = Congruence.from_classes(3, [[0, 2], [1]])
    assert is_congruence(p, c)
    with pytest.raises(InducedMonotonicityError) as exc:
        quotient_phase(p, c)
    assert exc.value.violations[0].where == (1, 1)


def test_boundary_examples(fx):
    bd = boundary(fx["max3"])
    assert bd.n == 2 and bd.k == 1
    assert boundary(fx["t1"]).tables == fx["t1"].tables
    bd = boundary(fx["pair4"])
    assert bd.elements == ("a", "b", "y_z") and bd.defect == (0, 0, 1)


def test_collapse_examples(fx):
    m, p = fx["max3"], fx["pair4"]
    c1 = collapse_stratum(m, 1)
    b = boundary(m)
    assert (c1.tables, c1.defect) == (b.tables, b.defect)
    assert collapse_congruence(p, 2).is_diagonal
    assert find_isomorphism(p, collapse_stratum(p, 2)) is not None
    with pytest.raises(IndexOutOfRange):
        collapse_stratum(m, m.k + 1)


def test_completion_examples(fx):
    r = completion(fx["max3"])
    assert r.complete and r.unique_max and r.unit.mapping == (0, 1, 2)
    r = completion(fx["pair4"])
    assert not r.complete and r.unique_max and r.completed.n == 3
    assert r.congruence.classes == ((0, 1), (2,), (3,))
    again = completion(r.completed)
    assert again.complete and find_isomorphism(again.completed, r.completed) is not None
    assert completion(fx["t1"]).complete
    assert admissible_pairs(fx["pair4"]) == [(0, 1)]
    assert not admissible_pairs(fx["sep4"])


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**63 - 1), n=st.integers(1, 4))
def test_completion_properties(seed, n):
    p = random_phase(seed, CatalogueSpec(n))
    r = completion(p)
    assert is_admissible(p, r.congruence)
    assert not morphism_violations(p, r.completed, r.unit, "strict")
    assert r.complete == r.unit.is_bijective == is_complete(p)
    maxima = maximal_admissible(p)
    assert r.congruence in maxima
    assert r.unique_max == (len(maxima) == 1)
    again = completion(r.completed)
    assert again.complete and find_isomorphism(again.completed, r.completed) is not None


def test_all_congruences_contains_extremes(fx):
    cs = all_congruences(fx["pair4"])
    assert Congruence.diagonal(4) in cs
    assert Congruence((0, 0, 0, 0)) in cs
    assert all(is_congruence(fx["pair4"], c) for c in cs)
