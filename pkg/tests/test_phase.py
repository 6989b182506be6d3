from __future__ import annotations

import random
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaselab.catalogue import CatalogueSpec, random_phase, scramble
from phaselab.errors import (DuplicateIdentifier, MonotonicityError, SizeLimitExceeded, TotalityError,
                             UnknownIdentifier)
from phaselab.phase import BINARY, Phase, Signature, canonical_form, check_phase, find_violations, validate


def raw_two(table, defect=None):
    return {
        "name": "P",
        "elements": ["a", "b"],
        "signature": [("m", 2)],
        "tables": {"m": table},
        "defect": defect or {"a": 1, "b": 0},
    }


FULL = {("a", "a"): "a", ("a", "b"): "b", ("b", "a"): "b", ("b", "b"): "b"}


def test_max3_validates(fx):
    p = fx["max3"]
    assert p.n == 3 and p.k == 2
    assert p.tables == ((0, 1, 2, 1, 1, 2, 2, 2, 2),)
    assert check_phase(p) == []


def test_monotonicity_violation_reports_tuple():
    table = dict(FULL)
    table[("a", "a")] = "b"
    with pytest.raises(MonotonicityError) as exc:
        validate(raw_two(table))
    assert exc.value.violations[0].where == ("a", "a")
    assert "0 < 1" in exc.value.violations[0].message


def test_missing_entry_is_totality_error():
    table = dict(FULL)
    del table[("a", "a")]
    with pytest.raises(TotalityError):
        validate(raw_two(table))


def test_every_violation_is_listed():
    table = {("a", "a"): "b", ("a", "b"): "c"}
    kinds = {v.kind for v in find_violations(raw_two(table))}
    assert {"TotalityError", "MonotonicityError", "UnknownIdentifier"} <= kinds


def test_unknown_and_duplicate_identifiers():
    with pytest.raises(UnknownIdentifier):
        validate(raw_two(FULL, {"a": 1, "b": 0, "c": 0}))
    raw = raw_two(FULL)
    raw["elements"] = ["a", "b", "a"]
    with pytest.raises(DuplicateIdentifier):
        validate(raw)


def test_nullary_operation_is_unconstrained():
    raw = {
        "name": "C",
        "elements": ["lo", "hi"],
        "signature": [("c", 0)],
        "tables": {"c": {(): "lo"}},
        "defect": {"lo": 0, "hi": 3},
    }
    p = validate(raw)
    assert p.tables == ((0,),) and p.k == 3


def test_empty_signature_allowed():
    raw = {"name": "E", "elements": ["x", "y"], "signature": [], "tables": {}, "defect": {"x": 0, "y": 5}}
    p = validate(raw)
    assert p.signature == Signature.of() and p.stratum(1) == (1,)


def test_raw_round_trip(fx):
    for p in fx.values():
        assert validate(p.to_raw()) == p


def test_canonical_form_invariant_under_all_scrambles(fx):
    p = fx["max3"]
    digests = {canonical_form(scramble(p, perm)).digest for perm in permutations(range(3))}
    assert digests == {canonical_form(p).digest}


def test_canonical_form_t1_is_fixed(fx):
    c = canonical_form(fx["t1"])
    assert c.phase.elements == ("e0",)
    assert canonical_form(c.phase) == c


def test_canonical_form_distinguishes_fixtures(fx):
    digests = [fx[n].digest for n in ("t1", "max3", "pair4", "sep4")]
    assert len(set(digests)) == 4
    assert all(len(d) == 16 for d in digests)


def test_canonical_form_size_limit():
    n = 9
    p = Phase("Big", tuple(f"x{i}" for i in range(n)), BINARY, (tuple([0] * n * n),), tuple([0] * n))
    with pytest.raises(SizeLimitExceeded):
        canonical_form(p)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**63 - 1), n=st.integers(1, 5), perm_seed=st.integers(0, 10**6))
def test_canonical_form_respects_isomorphism(seed, n, perm_seed):
    p = random_phase(seed, CatalogueSpec(n))
    perm = list(range(n))
    random.Random(perm_seed).shuffle(perm)
    q = scramble(p, perm)
    assert canonical_form(q).digest == canonical_form(p).digest
    assert canonical_form(canonical_form(p).phase) == canonical_form(p)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**63 - 1), n=st.integers(1, 4))
def test_strata_closed_under_operations(seed, n):
    p = random_phase(seed, CatalogueSpec(n, max_defect=3))
    for i in range(p.k + 1):
        s = set(p.stratum(i))
        assert all(p.apply(0, (x, y)) in s for x in s for y in s)
