"""Executable theorem checks producing Verdicts with re-checkable witnesses."""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional, Sequence

import numpy as np

from .catalogue import catalogue, sweep_universe
from .dsl import dumps_report
from .equivalence import (PhaseStack, morita_profile, strict_profile_classes, weak_equivalent,
                          weak_equivalent_bruteforce, weak_witness_ok)
from .errors import BudgetExceeded, InducedMonotonicityError, InputError, UnknownTheorem
from .filtration import cached_stratify, closure, invariants, rigid_core_elements
from .morphism import (PhaseMorphism, as_mapping, enumerate_homs, factorization_check, find_isomorphism,
                       morphism_violations, restriction_collision, rigidity_check)
from .phase import Phase, flat_index
from .quotient import boundary, completion, greedy_maximal, is_complete, quotient_phase
from .twocat import OrderedPhase, check_two_category_laws, ordered_variants

SCHEMA_VERSION = 1
OUTCOMES = ("verified", "counterexample", "inapplicable")
GATES = ("SEP", "GEN", "NONE")


@dataclass(frozen=True)
class Verdict:
    theorem_id: str
    inputs: tuple[str, ...]
    gate: str
    outcome: str
    witness: Optional[dict] = None
    note: str = ""
    operationalization: str = ""

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "theorem_id": self.theorem_id,
            "inputs": list(self.inputs),
            "gate": self.gate,
            "outcome": self.outcome,
            "witness": self.witness,
            "note": self.note,
            "operationalization": self.operationalization,
        }

    def dumps(self) -> str:
        return dumps_report(self.to_json())


# -- helpers ----------------------------------------------------------------------

def _gate_failure(p: Phase, gate: str) -> Optional[str]:
    if gate == "NONE":
        return None
    st = cached_stratify(p)
    flags = st.sep_flags if gate == "SEP" else st.gen_flags
    for i, ok in enumerate(flags, 1):
        if not ok:
            return f"{gate.capitalize()}({i}) fails"
    return None


def _pair_gate_failure(p: Phase, q: Phase, gate: str) -> Optional[str]:
    bad = _gate_failure(p, gate)
    if bad:
        return bad
    bad = _gate_failure(q, gate)
    return f"target: {bad}" if bad else None


def _depth(p: Phase, gate: str) -> int:
    st = cached_stratify(p)
    return st.d_gen if gate == "GEN" else st.d_sep


def defect_rank(p: Phase) -> int:
    st = cached_stratify(p)
    return max((len(layer) for layer in st.layers[1:]), default=0)


def _names(p: Phase, xs) -> list[str]:
    return [p.elements[x] for x in xs]


def _map_json(p: Phase, q: Phase, mapping) -> dict:
    return {p.elements[x]: q.elements[y] for x, y in enumerate(mapping)}


def _pair_witness(p, q, f, g, domain) -> dict:
    return {"f": f.as_dict(), "g": g.as_dict(), "domain": _names(p, domain)}


def _pair_witness_ok(p, q, w) -> bool:
    f, g = as_mapping(p, q, w["f"]), as_mapping(p, q, w["g"])
    dom = [p.index(x) for x in w["domain"]]
    return (f != g and not morphism_violations(p, q, f, "strict") and not morphism_violations(p, q, g, "strict")
            and all(f[x] == g[x] for x in dom))


def _merged_pair(labels, f) -> Optional[tuple[int, int]]:
    """Two elements in one class of ``labels`` that ``f`` separates."""
    first = {}
    for x, c in enumerate(labels):
        if c in first and f[first[c]] != f[x]:
            return first[c], x
        first.setdefault(c, x)
    return None


# -- individual theorems --------------------------------------------------------------

@dataclass(frozen=True)
class Outcome:
    outcome: str
    witness: Optional[dict] = None
    note: str = ""


def _subphase(p: Phase, gate: str) -> Outcome:
    for i in range(p.k + 1):
        stratum = p.stratum(i)
        for op, table in zip(p.signature, p.tables):
            for args in product(stratum, repeat=op.arity):
                out = table[flat_index(args, p.n)]
                if p.defect[out] < i:
                    return Outcome("counterexample", {"stratum": i, "op": op.name, "args": _names(p, args),
                                                      "output": p.elements[out]})
    return Outcome("verified", note=f"{p.k + 1} strata closed")


def _subphase_recheck(ps, w) -> bool:
    p = ps[0]
    j = p.op_index(w["op"])
    out = p.tables[j][flat_index([p.index(a) for a in w["args"]], p.n)]
    return p.defect[out] < w["stratum"] and all(p.defect[p.index(a)] >= w["stratum"] for a in w["args"])


def _gen_layers(p: Phase, gate: str) -> Outcome:
    d = _depth(p, gate) if gate != "NONE" else p.k
    if d == 0:
        return Outcome("inapplicable", note="no controlled layers (depth 0)")
    for i in range(1, d + 1):
        hull = closure(p, [x for x in range(p.n) if p.defect[x] <= i - 1])
        missing = [x for x in range(p.n) if p.defect[x] == i and x not in hull]
        if missing:
            return Outcome("counterexample", {"layer": i, "element": p.elements[missing[0]],
                                              "closure": _names(p, sorted(hull))},
                           note=f"layer {i} is controlled under {gate} but not generated from below")
    return Outcome("verified", note=f"layers 1..{d} generated from below")


def _gen_layers_recheck(ps, w) -> bool:
    p = ps[0]
    i = w["layer"]
    hull = closure(p, [x for x in range(p.n) if p.defect[x] <= i - 1])
    x = p.index(w["element"])
    return p.defect[x] == i and x not in hull


def _rigidity(p: Phase, q: Phase, gate: str) -> Outcome:
    res = rigidity_check(p, q, "strict")
    core = rigid_core_elements(p)
    witness = _pair_witness(p, q, *res.witness, core) if res.witness else None
    blocked = _pair_gate_failure(p, q, gate)
    if blocked is None and defect_rank(p) != defect_rank(q):
        blocked = "defect ranks differ"
    if blocked:
        tail = "restriction map non-injective anyway (witness attached)" if witness else "restriction map injective"
        return Outcome("inapplicable", witness, f"{blocked}; {tail}")
    if witness:
        return Outcome("counterexample", witness, "two strict morphisms agree on the rigid core")
    return Outcome("verified", note=f"{res.hom_count} strict morphisms, restriction injective")


def _core_factor(p: Phase, q: Phase, gate: str) -> Outcome:
    if gate != "NONE" and not cached_stratify(q).strongly_admissible(gate):
        return Outcome("inapplicable", note=f"target not strongly admissible under {gate}")
    d = _depth(p, "GEN" if gate == "GEN" else "SEP")
    stratum = p.stratum(d)
    homs = enumerate_homs(p, q, "strict")
    sub = p.induced(stratum)
    for h in homs:
        restricted = [h.mapping[x] for x in stratum]
        bad = morphism_violations(sub, q, restricted, "strict")
        if bad:
            return Outcome("counterexample", {"f": h.as_dict(), "depth": d, "violations": bad[:5]},
                           "restriction to the core is not a morphism")
    pair = restriction_collision(homs, stratum)
    if pair:
        return Outcome("counterexample", _pair_witness(p, q, *pair, stratum),
                       f"two morphisms agree on P^({d})")
    return Outcome("verified", note=f"{len(homs)} strict morphisms determined by P^({d})")


def _core_factor_recheck(ps, w) -> bool:
    p, q = ps
    if "domain" in w:
        return _pair_witness_ok(p, q, w)
    f = as_mapping(p, q, w["f"])
    stratum = p.stratum(w["depth"])
    return bool(morphism_violations(p.induced(stratum), q, [f[x] for x in stratum], "strict"))


def _eq_reduction(p: Phase, q: Phase, gate: str) -> Outcome:
    w = weak_equivalent(p, q)
    oracle = weak_equivalent_bruteforce(p, q)
    d = cached_stratify(p).d_sep
    witness_ok = (not w.equivalent) or weak_witness_ok(p, q, w.witness, d)
    if w.equivalent != oracle or not witness_ok:
        bij = _map_json(p, q, w.witness) if w.witness else None
        return Outcome("counterexample", {"decider": w.equivalent, "oracle": oracle, "bijection": bij},
                       "decider disagrees with the exhaustive oracle")
    if w.equivalent:
        strong = find_isomorphism(p, q) is not None
        return Outcome("verified", {"bijection": _map_json(p, q, w.witness)},
                       "weakly equivalent" + ("" if strong else ", not strongly equivalent"))
    return Outcome("verified", note=f"not weakly equivalent: {w.reason}")


def _eq_reduction_recheck(ps, w) -> bool:
    p, q = ps
    w2 = weak_equivalent(p, q)
    if w2.equivalent != weak_equivalent_bruteforce(p, q):
        return True
    return w2.equivalent and not weak_witness_ok(p, q, w2.witness, cached_stratify(p).d_sep)


def _profile_sha(counts) -> str:
    return hashlib.sha256(json.dumps(counts).encode()).hexdigest()[:16]


def _morita(p: Phase, q: Phase, gate: str, battery_max_size: int = 3) -> Outcome:
    iso = find_isomorphism(p, q)
    sp, sq = morita_profile(p, battery_max_size), morita_profile(q, battery_max_size)
    equal = sp.strict_counts() == sq.strict_counts()
    w = {"profile_p": _profile_sha(sp.strict_counts()), "profile_q": _profile_sha(sq.strict_counts()),
         "battery_max_size": battery_max_size, "iso": iso.as_dict() if iso else None}
    if equal and iso is None:
        return Outcome("counterexample", {"kind": "completeness", **w}, "equal strict profiles, not isomorphic")
    if iso is not None and not equal:
        return Outcome("counterexample", {"kind": "soundness", **w}, "isomorphic, profiles differ")
    return Outcome("verified", note="isomorphic with equal profiles" if iso else "profiles differ, not isomorphic")


def _morita_recheck(ps, w) -> bool:
    p, q = ps
    sp, sq = morita_profile(p, w["battery_max_size"]), morita_profile(q, w["battery_max_size"])
    iso = find_isomorphism(p, q)
    if w["kind"] == "completeness":
        return sp.strict_counts() == sq.strict_counts() and iso is None
    return iso is not None and sp.strict_counts() != sq.strict_counts()


def _invariants(p: Phase, q: Phase, gate: str) -> Outcome:
    blocked = _pair_gate_failure(p, q, gate)
    if blocked:
        return Outcome("inapplicable", note=blocked)
    iso = find_isomorphism(p, q)
    if iso is None:
        return Outcome("inapplicable", note="not strongly equivalent")
    ip, iq = invariants(p), invariants(q)
    if ip != iq:
        return Outcome("counterexample", {"iso": iso.as_dict(), "p": ip.to_json(), "q": iq.to_json()},
                       "isomorphic phases with different invariants")
    return Outcome("verified", note="records agree")


def _invariants_recheck(ps, w) -> bool:
    p, q = ps
    f = as_mapping(p, q, w["iso"])
    return (not morphism_violations(p, q, f, "strict") and len(set(f)) == q.n
            and invariants(p) != invariants(q))


def _boundary_morita(p: Phase, q: Phase, gate: str) -> Outcome:
    blocked = _pair_gate_failure(p, q, gate)
    if blocked:
        return Outcome("inapplicable", note=blocked)
    iso = find_isomorphism(p, q)
    if iso is None:
        return Outcome("inapplicable", note="not equivalent")
    try:
        bp, bq = boundary(p), boundary(q)
    except InducedMonotonicityError as exc:
        return Outcome("inapplicable", note=f"boundary quotient is not a phase: {exc.message}")
    if find_isomorphism(bp, bq) is None:
        return Outcome("counterexample", {"iso": iso.as_dict(), "boundary_p": bp.digest, "boundary_q": bq.digest},
                       "equivalent phases with non-isomorphic boundaries")
    return Outcome("verified", note="boundaries isomorphic")


def _boundary_recheck(ps, w) -> bool:
    p, q = ps
    return find_isomorphism(p, q) is not None and find_isomorphism(boundary(p), boundary(q)) is None


def _localization(p: Phase, r: Phase, gate: str) -> Outcome:
    d = _depth(p, "GEN" if gate == "GEN" else "SEP")
    stratum = p.stratum(d)
    homs = enumerate_homs(p, r, "lax")
    constant = [h for h in homs if len({h.mapping[x] for x in stratum}) == 1]
    for h in constant:
        try:
            fc = factorization_check(p, d, h)
        except InducedMonotonicityError as exc:
            return Outcome("counterexample", {"f": h.as_dict(), "depth": d, "reason": "quotient",
                                              "detail": exc.message},
                           f"P/P^({d}) is not a phase, so f cannot factor")
        if fc.factored is None or morphism_violations(fc.factored.source, r, fc.factored.mapping, "lax"):
            return Outcome("counterexample", {"f": h.as_dict(), "depth": d, "reason": "factor"},
                           "induced map is not a morphism")
    return Outcome("verified", note=f"{len(constant)} of {len(homs)} lax morphisms constant on P^({d}); all factor")


def _localization_recheck(ps, w) -> bool:
    p, r = ps
    f = as_mapping(p, r, w["f"])
    d = w["depth"]
    if morphism_violations(p, r, f, "lax") or len({f[x] for x in p.stratum(d)}) != 1:
        return False
    try:
        fc = factorization_check(p, d, PhaseMorphism(p, r, f, "lax"))
    except InducedMonotonicityError:
        return True
    return fc.factored is None or bool(morphism_violations(fc.factored.source, r, fc.factored.mapping, "lax"))


def _complete_fix(p: Phase, gate: str) -> Outcome:
    res = completion(p)
    eta = res.unit
    bad = morphism_violations(p, res.completed, eta.mapping, "strict")
    if bad:
        return Outcome("counterexample", {"failure": "unit", "violations": bad[:5]}, "unit is not strict")
    if res.complete != eta.is_bijective:
        return Outcome("counterexample", {"failure": "fixed-point", "complete": res.complete,
                                          "partition": res.congruence.named_classes(p)},
                       "completeness disagrees with invertibility of the unit")
    again = completion(res.completed).completed
    if find_isomorphism(again, res.completed) is None:
        return Outcome("counterexample", {"failure": "idempotence", "comp": res.completed.digest,
                                          "comp2": again.digest}, "completion is not idempotent")
    return Outcome("verified", note="complete" if res.complete else "not complete, unit merges classes")


def _complete_fix_recheck(ps, w) -> bool:
    return _complete_fix(ps[0], "NONE").outcome == "counterexample"


def _comp_functor(p: Phase, q: Phase, gate: str) -> Outcome:
    rp, rq = completion(p), completion(q)
    if not (rp.unique_max and rq.unique_max):
        return Outcome("inapplicable", note="maximal admissible congruence not unique")
    lp, lq = rp.congruence.labels, rq.congruence.labels
    homs = enumerate_homs(p, q, "strict")
    for g in homs:
        pair = _merged_pair(lp, [lq[y] for y in g.mapping])
        if pair:
            return Outcome("counterexample", {"g": g.as_dict(), "pair": _names(p, pair)},
                           "g does not descend to the completions")
        lifted = [lq[g.mapping[cls[0]]] for cls in rp.congruence.classes]
        if morphism_violations(rp.completed, rq.completed, lifted, "strict"):
            return Outcome("counterexample", {"g": g.as_dict(), "pair": None}, "induced map is not strict")
    return Outcome("verified", note=f"{len(homs)} strict morphisms descend")


def _comp_functor_recheck(ps, w) -> bool:
    p, q = ps
    g = as_mapping(p, q, w["g"])
    if morphism_violations(p, q, g, "strict") or w["pair"] is None:
        return False
    x, y = (p.index(e) for e in w["pair"])
    lp, lq = greedy_maximal(p).labels, greedy_maximal(q).labels
    return lp[x] == lp[y] and lq[g[x]] != lq[g[y]]


def _adjunction(p: Phase, q: Phase, gate: str) -> Outcome:
    if not is_complete(q):
        return Outcome("inapplicable", note="target not complete")
    res = completion(p)
    direct = enumerate_homs(p, q, "strict")
    through = {h.mapping for h in enumerate_homs(res.completed, q, "strict")}
    composed = {tuple(h[c] for c in res.unit.mapping) for h in through}
    counts = [len(direct), len(through)]
    for f in direct:
        if f.mapping not in composed:
            pair = _merged_pair(res.unit.mapping, f.mapping)
            return Outcome("counterexample", {"f": f.as_dict(), "pair": _names(p, pair) if pair else None,
                                              "counts": counts},
                           "a morphism into a complete phase does not factor through the unit")
    return Outcome("verified", note=f"|Hom(p,q)| = |Hom(Comp p,q)| = {counts[0]}")


def _adjunction_recheck(ps, w) -> bool:
    p, q = ps
    f = as_mapping(p, q, w["f"])
    if morphism_violations(p, q, f, "strict") or not is_complete(q) or w["pair"] is None:
        return False
    x, y = (p.index(e) for e in w["pair"])
    labels = greedy_maximal(p).labels
    return labels[x] == labels[y] and f[x] != f[y]


def _twocat(phases: Sequence[Phase], gate: str) -> Outcome:
    report = check_two_category_laws([OrderedPhase.of(p) for p in phases])
    if report.violations:
        return Outcome("counterexample", {"violations": report.violations[:10], "checks": report.checks},
                       f"{len(report.violations)} law violations")
    note = report.note or ", ".join(f"{k}={v}" for k, v in sorted(report.checks.items()))
    return Outcome("verified", note=note)


def _twocat_recheck(ps, w) -> bool:
    return bool(check_two_category_laws([OrderedPhase.of(p) for p in ps]).violations)


@dataclass(frozen=True)
class Theorem:
    theorem_id: str
    arity: Optional[int]  # None = any number >= 1
    default_gate: str
    operationalization: str
    check: Callable = field(repr=False)
    recheck: Optional[Callable] = field(default=None, repr=False)


def _pair_recheck(ps, w) -> bool:
    return _pair_witness_ok(ps[0], ps[1], w)


THEOREMS: dict[str, Theorem] = {t.theorem_id: t for t in [
    Theorem("SUBPHASE", 1, "NONE", "every stratum P^(i) is closed under every operation",
            lambda ps, g: _subphase(ps[0], g), _subphase_recheck),
    Theorem("GEN-LAYERS", 1, "SEP", "layers 1..d (d = controlled depth under the gate) lie in the closure of lower layers",
            lambda ps, g: _gen_layers(ps[0], g), _gen_layers_recheck),
    Theorem("RIGIDITY", 2, "SEP",
            "strict Hom(p,q) -> maps(rigid core of p, q) is injective; gate: both strongly admissible, equal defect rank",
            lambda ps, g: _rigidity(*ps, g), _pair_recheck),
    Theorem("CORE-FACTOR", 2, "SEP",
            "for strongly admissible q, strict morphisms p -> q restrict to morphisms on P^(d) and are determined there",
            lambda ps, g: _core_factor(*ps, g), _core_factor_recheck),
    Theorem("EQ-REDUCTION", 2, "NONE",
            "weak equivalence decider (k, d_sep, core isomorphism, witness bijection) agrees with an exhaustive oracle",
            lambda ps, g: _eq_reduction(*ps, g), _eq_reduction_recheck),
    Theorem("MORITA-COLLAPSE", 2, "NONE",
            "strict hom-count profiles over the size <= 3 battery coincide iff the phases are isomorphic",
            lambda ps, g: _morita(*ps, g), _morita_recheck),
    Theorem("INVARIANTS", 2, "SEP", "isomorphic phases have equal invariant records",
            lambda ps, g: _invariants(*ps, g), _invariants_recheck),
    Theorem("BOUNDARY-MORITA", 2, "SEP",
            "equivalent (isomorphic, which equal profiles imply on the catalogue) phases have isomorphic boundaries",
            lambda ps, g: _boundary_morita(*ps, g), _boundary_recheck),
    Theorem("LOCALIZATION", 2, "SEP",
            "every lax morphism constant on P^(d) factors through P -> P/P^(d) by a lax morphism",
            lambda ps, g: _localization(*ps, g), _localization_recheck),
    Theorem("COMPLETE-FIX", 1, "NONE",
            "complete (no admissible merge) iff the unit is an isomorphism; completion idempotent up to isomorphism",
            lambda ps, g: _complete_fix(ps[0], g), _complete_fix_recheck),
    Theorem("COMP-FUNCTOR", 2, "NONE",
            "with unique maximal admissible congruences, every strict g: p -> q descends to Comp p -> Comp q",
            lambda ps, g: _comp_functor(*ps, g), _comp_functor_recheck),
    Theorem("ADJUNCTION", 2, "NONE",
            "for complete q, h -> h . eta is a bijection Hom(Comp p, q) -> Hom(p, q) of strict morphisms",
            lambda ps, g: _adjunction(*ps, g), _adjunction_recheck),
    Theorem("TWOCAT", None, "NONE",
            "proof-irrelevant pointwise-order cells satisfy the strict 2-category laws on the battery",
            lambda ps, g: _twocat(ps, g), _twocat_recheck),
]}


def theorem(theorem_id: str) -> Theorem:
    try:
        return THEOREMS[theorem_id.upper()]
    except KeyError:
        raise UnknownTheorem(f"unknown theorem {theorem_id!r}; known: {', '.join(THEOREMS)}") from None


def run_check(theorem_id: str, phases: Sequence[Phase], gate: Optional[str] = None) -> Verdict:
    t = theorem(theorem_id)
    phases = list(phases)
    if (t.arity is None and not phases) or (t.arity is not None and len(phases) != t.arity):
        raise InputError(f"{t.theorem_id} takes {t.arity or 'one or more'} phase(s), got {len(phases)}")
    gate = (gate or t.default_gate).upper()
    if gate not in GATES:
        raise InputError(f"gate must be one of {GATES}")
    out = t.check(phases, gate)
    return Verdict(t.theorem_id, tuple(p.digest for p in phases), gate, out.outcome, out.witness, out.note,
                   t.operationalization)


def recheck(verdict: Verdict, phases: Sequence[Phase]) -> bool:
    """Re-validate a counterexample (or an attached witness) independently of the check."""
    t = theorem(verdict.theorem_id)
    if tuple(p.digest for p in phases) != verdict.inputs:
        raise InputError("phases do not match the verdict inputs")
    if verdict.witness is None:
        return verdict.outcome != "counterexample"
    if t.theorem_id == "RIGIDITY":
        return _pair_recheck(phases, verdict.witness)
    if verdict.outcome != "counterexample":
        return True
    return t.recheck(phases, verdict.witness)


# -- sweeps -------------------------------------------------------------------------

@dataclass
class SearchReport:
    theorem_id: str
    universe: str
    summary: dict
    verdicts: list
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "theorem_id": self.theorem_id,
            "universe": self.universe,
            "summary": self.summary,
            "extras": self.extras,
            "verdicts": [v.to_json() for v in self.verdicts],
        }


def _summarize(verdicts) -> dict:
    out = dict.fromkeys(OUTCOMES, 0)
    for v in verdicts:
        out[v.outcome] += 1
    out["total"] = sum(out[o] for o in OUTCOMES)
    return out


def _morita_search(phases, battery_max_size, universe) -> SearchReport:
    verdicts = []
    classes = strict_profile_classes(phases, battery_max_size)
    consistent = 0
    for cls in classes:
        first = phases[cls[0]]
        bad = [i for i in cls[1:] if find_isomorphism(first, phases[i]) is None]
        if not bad:
            consistent += 1
        for i in bad:
            verdicts.append(Verdict("MORITA-COLLAPSE", (first.digest, phases[i].digest), "NONE", "counterexample",
                                    {"kind": "completeness", "battery_max_size": battery_max_size},
                                    "equal strict profiles, not isomorphic",
                                    THEOREMS["MORITA-COLLAPSE"].operationalization))
    summary = {"verified": consistent, "inapplicable": 0, "counterexample": len(verdicts),
               "total": consistent + len(verdicts)}
    return SearchReport("MORITA-COLLAPSE", universe, summary, verdicts,
                        {"phases": len(phases), "profile_classes": len(classes)})


def rigidity_pair_sweep(phases: Sequence[Phase], gate: str = "SEP", equal_rank: bool = True) -> SearchReport:
    """RIGIDITY over every ordered pair of ``phases``, vectorised over targets.

    Only sources with a nonempty layer below the rigid core can fail, so the
    others are counted as verified without search. Failing pairs are re-run
    through ``run_check`` to produce exact Verdicts. With ``equal_rank=False``
    the rank hypothesis is dropped; ``extras["rank_sensitive"]`` then counts
    failures it was hiding.
    """
    phases = list(phases)
    gated = np.array([_gate_failure(p, gate) is None for p in phases])
    ranks = np.array([defect_rank(p) for p in phases])
    sig_ids = {}
    sigs = np.array([sig_ids.setdefault(p.signature, len(sig_ids)) for p in phases])
    stack = PhaseStack(phases)
    verdicts = []
    pairs = 0
    for i, p in enumerate(phases):
        if not gated[i]:
            continue
        same = (ranks == ranks[i]) if equal_rank else True
        targets = np.flatnonzero(gated & same & (sigs == sigs[i]))
        pairs += len(targets)
        core = rigid_core_elements(p)
        if len(core) == p.n:
            continue
        failing = []
        for m, (tabs, defs) in stack.stacks.items():
            sel = targets[stack.sizes[targets] == m]
            if not len(sel):
                continue
            rows = stack.slot[sel]
            counts = _restriction_counts(p, core, tabs[rows], defs[rows], m)
            failing.extend(sel[(counts >= 2).any(axis=0)].tolist())
        for j in sorted(failing):
            verdicts.append(run_check("RIGIDITY", [p, phases[j]], gate))
    n = len(phases)
    bad = sum(v.outcome == "counterexample" for v in verdicts)
    hidden = sum(v.outcome == "inapplicable" for v in verdicts)
    summary = {"verified": pairs - bad - hidden, "inapplicable": n * n - pairs + hidden,
               "counterexample": bad, "total": n * n}
    extras = {"gated_pairs": pairs, "equal_rank": equal_rank}
    if not equal_rank:
        extras["rank_sensitive"] = hidden
    return SearchReport("RIGIDITY", f"all ordered pairs of {n} phases", summary,
                        [v for v in verdicts if v.outcome == "counterexample"], extras)


def _restriction_counts(p: Phase, core, tabs, defs, m) -> np.ndarray:
    """(restriction, target) -> number of strict morphisms p -> target with that restriction to ``core``."""
    nb = p.n
    offsets = np.cumsum([0] + [m**op.arity for op in p.signature])[:-1]
    pdef = np.array(p.defect, dtype=np.int16)
    cells = [(j, args) for j, op in enumerate(p.signature) for args in product(range(nb), repeat=op.arity)]
    src_out = np.array([p.tables[j][flat_index(args, nb)] for j, args in cells], dtype=np.int64)
    keys = {}
    for f in product(range(m), repeat=nb):
        farr = np.array(f, dtype=np.int64)
        ok = (defs[:, farr] == pdef).all(axis=1)
        if not ok.any():
            continue
        cols = [offsets[j] + flat_index([f[a] for a in args], m) for j, args in cells]
        ok &= (tabs[:, cols] == farr[src_out]).all(axis=1)
        key = tuple(f[c] for c in core)
        keys[key] = keys.get(key, 0) + ok
    if not keys:
        return np.zeros((1, len(tabs)), dtype=np.int64)
    return np.array([np.broadcast_to(v, len(tabs)) for v in keys.values()])


def search_counterexamples(theorem_id: str, phases: Optional[Sequence[Phase]] = None, *, max_size: int = 3,
                           sample: Optional[int] = 30, seed: int = 0, battery_max_size: int = 3,
                           workers: int = 1, gate: Optional[str] = None,
                           include_inapplicable: bool = False) -> SearchReport:
    """Run a theorem over a universe of phases (or pairs); keep the non-verified Verdicts.

    Default universes: the full catalogue up to ``max_size`` for one-phase
    theorems and profile classes; the sweep universe (smaller sizes in full,
    a seeded sample at ``max_size``, fixtures) for pairwise theorems.
    """
    t = theorem(theorem_id)
    if phases is None:
        if t.arity == 1 or t.theorem_id == "MORITA-COLLAPSE":
            phases = catalogue(max_size)
            universe = f"catalogue n<={max_size}"
        else:
            phases = sweep_universe(max_size, sample, seed)
            universe = f"sweep n<={max_size} (sample {sample}, seed {seed})"
    else:
        universe = f"{len(phases)} given phases"
    phases = list(phases)
    if t.theorem_id == "MORITA-COLLAPSE":
        return _morita_search(phases, battery_max_size, universe)

    if t.arity == 1:
        tasks = [(p,) for p in phases]
    elif t.arity == 2:
        tasks = [(p, q) for p in phases for q in phases if p.signature == q.signature]
    else:
        # one-object batteries: every valid order block with <= 2 generators
        tasks = [(v,) for p in phases for v in ordered_variants(p) if v.order]

    def job(ps):
        try:
            return run_check(t.theorem_id, ps, gate)
        except BudgetExceeded:
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, tasks))
    else:
        results = [job(ps) for ps in tasks]
    verdicts = [v for v in results if v is not None]

    extras = {"budget_skipped": len(results) - len(verdicts)}
    if t.theorem_id == "RIGIDITY":
        # pairs kept out only by the rank hypothesis whose restriction map is not injective
        extras["rank_sensitive"] = sum(1 for v in verdicts
                                       if v.outcome == "inapplicable" and v.note.startswith("defect ranks differ")
                                       and v.witness is not None)
        extras["rank_gated"] = sum(1 for v in verdicts if v.note.startswith("defect ranks differ"))
    keep = [v for v in verdicts if v.outcome == "counterexample" or (include_inapplicable and v.outcome == "inapplicable")]
    return SearchReport(t.theorem_id, universe, _summarize(verdicts), keep, extras)
