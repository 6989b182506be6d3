"""Preorder-enriched phases, pointwise 2-cells and strict 2-category law checks.

Cells are proof-irrelevant: there is at most one cell ``F => G`` and it
exists iff ``F(x) <= G(x)`` for every ``x``. The laws then reduce to
statements about existence, which are checked exhaustively.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Optional, Sequence

from .errors import BudgetExceeded, OrderError, OrderMissing, SignatureMismatch, default_budget
from .morphism import PhaseMorphism, enumerate_homs
from .phase import Phase, flat_index


def order_closure(n: int, generators: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    """Reflexive-transitive closure (Warshall)."""
    rel = [[x == y for y in range(n)] for x in range(n)]
    for a, b in generators:
        rel[a][b] = True
    for m in range(n):
        for x in range(n):
            if rel[x][m]:
                row_m = rel[m]
                row_x = rel[x]
                for y in range(n):
                    if row_m[y]:
                        row_x[y] = True
    return frozenset((x, y) for x in range(n) for y in range(n) if rel[x][y])


def order_violations(p: Phase, leq: frozenset) -> list[str]:
    out = []
    el = p.elements
    for x, y in sorted(leq):
        if p.defect[x] != p.defect[y]:
            out.append(f"{el[x]} <= {el[y]} relates defects {p.defect[x]} and {p.defect[y]}")
    strict_pairs = [(x, y) for x, y in sorted(leq) if x != y]
    for op, table in zip(p.signature, p.tables):
        for slot in range(op.arity):
            for ctx in product(range(p.n), repeat=op.arity - 1):
                for x, y in strict_pairs:
                    ox = table[flat_index(ctx[:slot] + (x,) + ctx[slot:], p.n)]
                    oy = table[flat_index(ctx[:slot] + (y,) + ctx[slot:], p.n)]
                    if (ox, oy) not in leq:
                        args = [el[c] for c in ctx]
                        out.append(f"{op.name} not monotone in slot {slot} at context {args}: "
                                   f"{el[x]} <= {el[y]} but {el[ox]} !<= {el[oy]}")
    return out


@dataclass(frozen=True)
class OrderedPhase:
    phase: Phase
    leq: frozenset = field(repr=False)

    @classmethod
    def of(cls, p: Phase) -> "OrderedPhase":
        """Close the order block of ``p`` (discrete if absent) and validate it."""
        leq = order_closure(p.n, p.order or ())
        bad = order_violations(p, leq)
        if bad:
            raise OrderError(bad[0], violations=bad)
        return cls(p, leq)

    def le(self, x: int, y: int) -> bool:
        return (x, y) in self.leq

    @property
    def discrete(self) -> bool:
        return all(x == y for x, y in self.leq)


def is_monotone(f: Sequence[int], src: OrderedPhase, dst: OrderedPhase) -> bool:
    return all(dst.le(f[x], f[y]) for x, y in src.leq)


def _cell(f: Sequence[int], g: Sequence[int], target: OrderedPhase) -> bool:
    return all(target.le(a, b) for a, b in zip(f, g))


def two_cell(F: PhaseMorphism, G: PhaseMorphism) -> bool:
    """Whether a (unique) cell ``F => G`` exists."""
    if F.source != G.source or F.target != G.target:
        raise SignatureMismatch("2-cells need parallel morphisms")
    if F.target.order is None:
        raise OrderMissing(f"{F.target.name} has no order block; only identity cells exist")
    return _cell(F.mapping, G.mapping, OrderedPhase.of(F.target))


def ordered_homs(src: OrderedPhase, dst: OrderedPhase, mode: str = "strict") -> list[tuple[int, ...]]:
    if src.phase.signature != dst.phase.signature:
        return []
    return [h.mapping for h in enumerate_homs(src.phase, dst.phase, mode) if is_monotone(h.mapping, src, dst)]


def _compose(f, g):
    """``g ∘ f`` on index tuples."""
    return tuple(g[y] for y in f)


@dataclass
class LawReport:
    phases: list[str]
    checks: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    discrete: bool = False
    note: str = ""

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "phases": self.phases,
            "checks": dict(sorted(self.checks.items())),
            "violations": self.violations,
            "discrete": self.discrete,
            "note": self.note,
            "ok": self.ok,
        }


def check_two_category_laws(phases: Sequence[OrderedPhase], mode: str = "strict",
                            budget: Optional[int] = None) -> LawReport:
    """Exhaustive law check over every composable configuration of the battery."""
    budget = budget or default_budget()
    obs = list(phases)
    idx = range(len(obs))
    homs = {(i, j): ordered_homs(obs[i], obs[j], mode) for i in idx for j in idx}
    # above[i, j][f] = every g with a cell f => g
    above = {key: {f: [g for g in hs if _cell(f, g, obs[key[1]])] for f in hs} for key, hs in homs.items()}
    cells = {key: [(f, g) for f in hs for g in above[key][f]] for key, hs in homs.items()}
    work = sum(len(hs) ** 3 for hs in homs.values())
    for i, j, l in product(idx, repeat=3):
        work += len(cells[i, j]) * len(cells[j, l]) * (1 + len(homs[i, j]) * len(homs[j, l]))
        for m in idx:
            work += len(homs[i, j]) * len(homs[j, l]) * len(homs[l, m])
            work += len(cells[i, j]) * len(cells[j, l]) * len(cells[l, m])
    if work > budget:
        raise BudgetExceeded(f"{work} law configurations exceed the budget of {budget}")

    report = LawReport([o.phase.name for o in obs])
    counts = dict.fromkeys(
        ["identity", "vertical_transitive", "vertical_unit", "no_mix",
         "whisker", "interchange", "horizontal_assoc", "composition_assoc"], 0)

    def fail(law, detail):
        report.violations.append({"law": law, **detail})

    for (i, j), hs in sorted(homs.items()):
        tgt = obs[j]
        up = above[i, j]
        for f in hs:
            counts["identity"] += 1
            if f not in up[f]:
                fail("identity", {"hom": [i, j], "F": list(f)})
        for f, g in cells[i, j]:
            counts["no_mix"] += 1
            if any(tgt.phase.defect[a] != tgt.phase.defect[b] for a, b in zip(f, g)):
                fail("no_mix", {"hom": [i, j], "F": list(f), "G": list(g)})
            # id_F . alpha and alpha . id_G are alpha itself: both endpoints must carry cells
            counts["vertical_unit"] += 1
            if f not in up[f] or g not in up[g]:
                fail("vertical_unit", {"hom": [i, j], "F": list(f), "G": list(g)})
            for h in up[g]:
                counts["vertical_transitive"] += 1
                if h not in up[f]:
                    fail("vertical_transitive", {"hom": [i, j], "F": list(f), "G": list(g), "H": list(h)})

    for i, j, l in product(idx, repeat=3):
        target = obs[l]
        for f1, f2 in cells[i, j]:
            for g1, g2 in cells[j, l]:
                counts["whisker"] += 1
                left, right = _compose(f1, g1), _compose(f2, g2)
                mid_a, mid_b = _compose(f2, g1), _compose(f1, g2)
                routes = (_cell(left, mid_a, target) and _cell(mid_a, right, target),
                          _cell(left, mid_b, target) and _cell(mid_b, right, target))
                if not (all(routes) and _cell(left, right, target)):
                    fail("whisker", {"objects": [i, j, l], "F": [list(f1), list(f2)], "G": [list(g1), list(g2)]})
                # interchange: extend the grid by one more column on each side
                for f3 in above[i, j][f2]:
                    far = None
                    for g3 in above[j, l][g2]:
                        counts["interchange"] += 1
                        far = _compose(f3, g3)
                        vertical_first = (f3 in above[i, j][f1] and g3 in above[j, l][g1]
                                          and _cell(left, far, target))
                        horizontal_first = _cell(left, right, target) and _cell(right, far, target)
                        if vertical_first != horizontal_first:
                            fail("interchange", {"objects": [i, j, l]})

    for i, j, l, m in product(idx, repeat=4):
        for f, g, h in product(homs[i, j], homs[j, l], homs[l, m]):
            counts["composition_assoc"] += 1
            if _compose(_compose(f, g), h) != _compose(f, _compose(g, h)):
                fail("composition_assoc", {"objects": [i, j, l, m]})
        for (f1, f2), (g1, g2), (h1, h2) in product(cells[i, j], cells[j, l], cells[l, m]):
            counts["horizontal_assoc"] += 1
            a = _cell(_compose(_compose(f1, g1), h1), _compose(_compose(f2, g2), h2), obs[m])
            b = _cell(_compose(f1, _compose(g1, h1)), _compose(f2, _compose(g2, h2)), obs[m])
            if not (a and b):
                fail("horizontal_assoc", {"objects": [i, j, l, m]})

    report.checks = counts
    report.discrete = all(o.discrete for o in obs)
    if report.discrete:
        report.note = "all orders discrete: only identity cells, the laws reduce to those of the underlying 1-category"
    return report


def ordered_variants(p: Phase, max_generators: int = 2) -> list[Phase]:
    """Every valid order block on ``p`` with at most ``max_generators`` generator pairs."""
    candidates = [(x, y) for x, y in product(range(p.n), repeat=2) if x != y and p.defect[x] == p.defect[y]]
    seen = set()
    out = []
    for r in range(max_generators + 1):
        for gens in combinations(candidates, r):
            leq = order_closure(p.n, gens)
            if leq in seen or order_violations(p, leq):
                continue
            seen.add(leq)
            out.append(Phase(p.name, p.elements, p.signature, p.tables, p.defect, tuple(gens)))
    return out
