from __future__ import annotations

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from phaselab.catalogue import CatalogueSpec, random_phase, scramble
from phaselab.filtration import (analysis_report, closure, generated, invariants, rigid_core, rigid_core_elements,
                                 separated, separating_context, stratify)


def test_max3_strata_and_flags(fx):
    s = stratify(fx["max3"])
    assert s.k == 2
    assert [len(x) for x in s.strata] == [3, 2, 1]
    assert s.gen_flags == (False, False) and s.d_gen == 0
    # defect is injective on MAX3, so separation holds vacuously at every level
    assert s.sep_flags == (True, True) and s.d_sep == 2
    assert s.strongly_admissible("SEP") and not s.strongly_admissible("GEN")


def test_sep4_separates_where_pair4_does_not(fx):
    sep, pair = stratify(fx["sep4"]), stratify(fx["pair4"])
    assert sep.sep_flags == (True, True) and sep.d_sep == 2
    assert pair.sep_flags == (False, True) and pair.d_sep == 0
    assert separating_context(fx["sep4"], 1, 0, 1) == ("m", 0, (2,))
    assert separating_context(fx["pair4"], 1, 0, 1) is None
    assert pair.gen_flags == (True, True) and pair.d_gen == 2


def test_t1_is_trivial(fx):
    s = stratify(fx["t1"])
    assert (s.k, s.gen_flags, s.sep_flags, s.d_gen, s.d_sep) == (0, (), (), 0, 0)
    assert s.strongly_admissible("GEN") and s.strongly_admissible("SEP")
    assert rigid_core(fx["t1"]) is fx["t1"]


def test_rigid_cores(fx):
    assert rigid_core_elements(fx["max3"]) == (1, 2)
    assert rigid_core_elements(fx["pair4"]) == (2, 3)
    core = rigid_core(fx["pair4"])
    assert core.elements == ("y", "z") and core.defect == (1, 2)
    assert core.tables == ((1, 1, 1, 1),)


def test_closure(fx):
    p = fx["pair4"]
    assert closure(p, [0]) == frozenset({0, 2, 3})
    assert closure(p, []) == frozenset()
    assert generated(p, 1) and generated(p, 2)
    assert not generated(fx["max3"], 1)


def test_invariant_records(fx):
    assert invariants(fx["max3"]).to_json() == {"k": 2, "defect_rank": 1, "boundary_depth": 1,
                                                "signature_complexity": [1, [2]]}
    assert invariants(fx["pair4"]) == invariants(fx["max3"])
    t1 = invariants(fx["t1"])
    assert (t1.k, t1.defect_rank, t1.boundary_depth) == (0, 0, 0)


def test_analysis_report(fx):
    r = analysis_report(fx["pair4"])
    assert r["layers"] == [["a", "b"], ["y"], ["z"]]
    assert r["strata_sizes"] == [4, 2, 1]
    assert r["sep_flags"] == [False, True] and r["d_sep"] == 0


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**63 - 1), n=st.integers(1, 4), perm_seed=st.integers(0, 10**6))
def test_flags_and_invariants_survive_relabelling(seed, n, perm_seed):
    p = random_phase(seed, CatalogueSpec(n))
    perm = list(range(n))
    random.Random(perm_seed).shuffle(perm)
    q = scramble(p, perm)
    a, b = stratify(p), stratify(q)
    assert (a.k, a.gen_flags, a.sep_flags) == (b.k, b.gen_flags, b.sep_flags)
    assert invariants(p) == invariants(q)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**63 - 1), n=st.integers(1, 4))
def test_depths_are_prefix_lengths(seed, n):
    p = random_phase(seed, CatalogueSpec(n))
    s = stratify(p)
    for flags, d in ((s.gen_flags, s.d_gen), (s.sep_flags, s.d_sep)):
        assert all(flags[:d]) and (d == s.k or not flags[d])
    assert list(s.gen_flags) == [generated(p, i) for i in range(1, s.k + 1)]
    assert list(s.sep_flags) == [separated(p, i) for i in range(1, s.k + 1)]
