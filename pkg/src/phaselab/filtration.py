"""Canonical filtration, defect-control predicates, rigid core and invariants.

Two operational readings of "defect control" are computed side by side:

* GEN(i): every element of defect exactly ``i`` is generated, under the
  operations, by elements of defect ``<= i - 1``.
* SEP(i): every pair of distinct elements of the stratum ``P^(i-1)`` is
  ``i``-separated: their defects differ, or some operation slot with all
  other arguments in ``P^(i)`` sends them to distinct outputs inside ``P^(i)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable

from .phase import Phase, flat_index


@dataclass(frozen=True)
class Stratification:
    k: int
    layers: tuple[tuple[int, ...], ...]
    strata: tuple[tuple[int, ...], ...]
    gen_flags: tuple[bool, ...]
    sep_flags: tuple[bool, ...]

    @property
    def d_gen(self) -> int:
        return _depth(self.gen_flags)

    @property
    def d_sep(self) -> int:
        return _depth(self.sep_flags)

    @property
    def strongly_admissible_gen(self) -> bool:
        return self.d_gen == self.k

    @property
    def strongly_admissible_sep(self) -> bool:
        return self.d_sep == self.k

    def depth(self, gate: str) -> int:
        return {"GEN": self.d_gen, "SEP": self.d_sep}[gate]

    def strongly_admissible(self, gate: str) -> bool:
        return self.depth(gate) == self.k


def _depth(flags) -> int:
    d = 0
    for ok in flags:
        if not ok:
            break
        d += 1
    return d


def closure(p: Phase, seed: Iterable[int]) -> frozenset[int]:
    """Smallest subset containing ``seed`` and closed under every operation."""
    current = set(seed)
    n = p.n
    while True:
        new = set()
        for op, table in zip(p.signature, p.tables):
            for args in product(sorted(current), repeat=op.arity):
                out = table[flat_index(args, n)]
                if out not in current:
                    new.add(out)
        if not new:
            return frozenset(current)
        current |= new


def generated(p: Phase, i: int) -> bool:
    """GEN(i)."""
    base = [x for x in range(p.n) if p.defect[x] <= i - 1]
    hull = closure(p, base)
    return all(x in hull for x in range(p.n) if p.defect[x] == i)


def separating_context(p: Phase, i: int, x: int, y: int):
    """First (op, slot, args) whose outputs on x and y differ and both lie in ``P^(i)``."""
    upper = p.stratum(i)
    n = p.n
    for j, (op, table) in enumerate(zip(p.signature, p.tables)):
        for slot in range(op.arity):
            for ctx in product(upper, repeat=op.arity - 1):
                ax = ctx[:slot] + (x,) + ctx[slot:]
                ay = ctx[:slot] + (y,) + ctx[slot:]
                ox, oy = table[flat_index(ax, n)], table[flat_index(ay, n)]
                if ox != oy and p.defect[ox] >= i and p.defect[oy] >= i:
                    return op.name, slot, ctx
    return None


def separated(p: Phase, i: int) -> bool:
    """SEP(i)."""
    for x, y in combinations(p.stratum(i - 1), 2):
        if p.defect[x] != p.defect[y]:
            continue
        if separating_context(p, i, x, y) is None:
            return False
    return True


def stratify(p: Phase) -> Stratification:
    k = p.k
    layers = tuple(tuple(x for x in range(p.n) if p.defect[x] == i) for i in range(k + 1))
    strata = tuple(p.stratum(i) for i in range(k + 1))
    gen = tuple(generated(p, i) for i in range(1, k + 1))
    sep = tuple(separated(p, i) for i in range(1, k + 1))
    return Stratification(k, layers, strata, gen, sep)


def cached_stratify(p: Phase) -> Stratification:
    st = p.__dict__.get("_strat_cache")
    if st is None:
        st = stratify(p)
        object.__setattr__(p, "_strat_cache", st)
    return st


def rigid_core_elements(p: Phase) -> tuple[int, ...]:
    return p.stratum(max(p.k - 1, 0))


def rigid_core(p: Phase) -> Phase:
    """Induced phase on the penultimate stratum; ``p`` itself when k = 0."""
    if p.k == 0:
        return p
    return p.induced(rigid_core_elements(p), name=f"{p.name}_rig")


@dataclass(frozen=True)
class InvariantRecord:
    k: int
    defect_rank: int
    boundary_depth: int
    signature_complexity: tuple[int, tuple[int, ...]]

    def to_json(self) -> dict:
        ops, arities = self.signature_complexity
        return {
            "k": self.k,
            "defect_rank": self.defect_rank,
            "boundary_depth": self.boundary_depth,
            "signature_complexity": [ops, list(arities)],
        }


def invariants(p: Phase) -> InvariantRecord:
    from .quotient import boundary

    st = cached_stratify(p)
    rank = max((len(layer) for layer in st.layers[1:]), default=0)
    return InvariantRecord(
        k=st.k,
        defect_rank=rank,
        boundary_depth=boundary(p).k,
        signature_complexity=(len(p.signature), tuple(sorted(p.signature.arities))),
    )


def analysis_report(p: Phase) -> dict:
    """The ``analyze`` JSON payload."""
    st = cached_stratify(p)
    names = p.elements
    return {
        "name": p.name,
        "digest": p.digest,
        "n": p.n,
        "k": st.k,
        "layers": [[names[x] for x in layer] for layer in st.layers],
        "strata_sizes": [len(s) for s in st.strata],
        "gen_flags": list(st.gen_flags),
        "sep_flags": list(st.sep_flags),
        "d_gen": st.d_gen,
        "d_sep": st.d_sep,
        "strongly_admissible": {"GEN": st.strongly_admissible_gen, "SEP": st.strongly_admissible_sep},
        "rigid_core": [names[x] for x in rigid_core_elements(p)],
        "invariants": invariants(p).to_json(),
    }
