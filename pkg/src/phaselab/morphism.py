"""Phase morphisms: verification, enumeration, rigidity and factorization checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Optional, Sequence, Union

from .errors import BudgetExceeded, IndexOutOfRange, InputError, SignatureMismatch, UnknownIdentifier, default_budget
from .filtration import cached_stratify, rigid_core_elements
from .phase import Phase, flat_index

MODES = ("lax", "strict")


@dataclass(frozen=True)
class PhaseMorphism:
    source: Phase = field(repr=False)
    target: Phase = field(repr=False)
    mapping: tuple[int, ...]
    mode: str = "strict"

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    def then(self, other: "PhaseMorphism") -> "PhaseMorphism":
        """``other ∘ self``; the result is strict only if both are."""
        mode = "strict" if self.mode == other.mode == "strict" else "lax"
        return PhaseMorphism(self.source, other.target, tuple(other.mapping[y] for y in self.mapping), mode)

    def as_dict(self) -> dict[str, str]:
        return {self.source.elements[x]: self.target.elements[y] for x, y in enumerate(self.mapping)}

    @property
    def is_bijective(self) -> bool:
        return self.source.n == self.target.n and len(set(self.mapping)) == self.target.n

    @property
    def preserves_k(self) -> bool:
        return self.source.k == self.target.k

    @property
    def preserves_d(self) -> bool:
        s, t = cached_stratify(self.source), cached_stratify(self.target)
        return s.d_gen == t.d_gen and s.d_sep == t.d_sep

    def to_json(self) -> dict:
        return {"source": self.source.digest, "target": self.target.digest,
                "map": self.as_dict(), "mode": self.mode}


def identity(p: Phase, mode: str = "strict") -> PhaseMorphism:
    return PhaseMorphism(p, p, tuple(range(p.n)), mode)


def _check_mode(mode: str):
    if mode not in MODES:
        raise InputError(f"mode must be one of {MODES}, got {mode!r}")


def _check_signatures(p: Phase, q: Phase):
    if p.signature != q.signature:
        raise SignatureMismatch(f"{p.name} and {q.name} have different signatures")


def as_mapping(p: Phase, q: Phase, f) -> tuple[int, ...]:
    """Accept a name->name dict, an index sequence or a PhaseMorphism."""
    if isinstance(f, PhaseMorphism):
        return f.mapping
    if isinstance(f, Mapping):
        missing = [e for e in p.elements if e not in f]
        if missing:
            raise UnknownIdentifier(f"map undefined on {missing}")
        return tuple(q.index(f[e]) for e in p.elements)
    f = tuple(f)
    if len(f) != p.n or any(not (0 <= y < q.n) for y in f):
        raise UnknownIdentifier("index map must send every source element into the target")
    return f


def morphism_violations(p: Phase, q: Phase, f, mode: str = "strict") -> list[str]:
    _check_mode(mode)
    _check_signatures(p, q)
    f = as_mapping(p, q, f)
    out = []
    for x in range(p.n):
        dp, dq = p.defect[x], q.defect[f[x]]
        if (mode == "strict" and dq != dp) or (mode == "lax" and dq < dp):
            out.append(f"defect: {p.elements[x]} ({dp}) -> {q.elements[f[x]]} ({dq})")
    for op, tp, tq in zip(p.signature, p.tables, q.tables):
        for args in p.tuples(op.arity):
            lhs = f[tp[flat_index(args, p.n)]]
            rhs = tq[flat_index([f[a] for a in args], q.n)]
            if lhs != rhs:
                names = tuple(p.elements[a] for a in args)
                out.append(f"{op.name}{names}: f(out) = {q.elements[lhs]} but out(f) = {q.elements[rhs]}")
    return out


def is_morphism(p: Phase, q: Phase, f, mode: str = "strict") -> tuple[bool, list[str]]:
    v = morphism_violations(p, q, f, mode)
    return not v, v


# -- search ---------------------------------------------------------------------

@dataclass
class SearchStats:
    nodes: int = 0


def _candidates(p: Phase, q: Phase, mode: str) -> list[list[int]]:
    if mode == "strict":
        return [[y for y in range(q.n) if q.defect[y] == p.defect[x]] for x in range(p.n)]
    return [[y for y in range(q.n) if q.defect[y] >= p.defect[x]] for x in range(p.n)]


def _backtrack(p: Phase, q: Phase, mode: str, var_order: Sequence[int], budget: int,
               stats: SearchStats, injective: bool = False, first_only: bool = False):
    """Assign elements in ``var_order`` with forward checking on every table row."""
    n = p.n
    pos = {x: i for i, x in enumerate(var_order)}
    # A row is checkable once its arguments and its output are all assigned.
    checks: list[list] = [[] for _ in range(n)]
    for op, tp, tq in zip(p.signature, p.tables, q.tables):
        for args in p.tuples(op.arity):
            out = tp[flat_index(args, n)]
            last = max([pos[a] for a in args] + [pos[out]])
            checks[last].append((tq, args, out))
    domains = _candidates(p, q, mode)
    f = [-1] * n
    used = set()
    results = []

    def consistent(level):
        for tq, args, out in checks[level]:
            if f[out] != tq[flat_index([f[a] for a in args], q.n)]:
                return False
        return True

    def rec(level):
        if level == n:
            results.append(tuple(f))
            return first_only
        x = var_order[level]
        for y in domains[x]:
            if injective and y in used:
                continue
            stats.nodes += 1
            if stats.nodes > budget:
                raise BudgetExceeded(f"hom search exceeded budget of {budget} nodes")
            f[x] = y
            if consistent(level):
                if injective:
                    used.add(y)
                stop = rec(level + 1)
                if injective:
                    used.discard(y)
                if stop:
                    return True
            f[x] = -1
        return False

    rec(0)
    return results


def _wrap(p, q, maps, mode):
    return [PhaseMorphism(p, q, m, mode) for m in sorted(maps)]


def enumerate_homs(p: Phase, q: Phase, mode: str = "strict", budget: Optional[int] = None,
                   stats: Optional[SearchStats] = None) -> list[PhaseMorphism]:
    """All morphisms ``p -> q``, sorted by map encoding (declaration-order backtracking)."""
    _check_mode(mode)
    _check_signatures(p, q)
    stats = stats if stats is not None else SearchStats()
    maps = _backtrack(p, q, mode, list(range(p.n)), budget or default_budget(), stats)
    return _wrap(p, q, maps, mode)


def core_seeded_order(p: Phase) -> list[int]:
    """Rigid core first, then strata outward from the deepest; declaration order inside."""
    core = set(rigid_core_elements(p))
    return sorted(range(p.n), key=lambda x: (x not in core, -p.defect[x], x))


def core_seeded_homs(p: Phase, q: Phase, mode: str = "strict", budget: Optional[int] = None,
                     stats: Optional[SearchStats] = None) -> list[PhaseMorphism]:
    """Same result as ``enumerate_homs``; searches the rigid core first."""
    _check_mode(mode)
    _check_signatures(p, q)
    stats = stats if stats is not None else SearchStats()
    maps = _backtrack(p, q, mode, core_seeded_order(p), budget or default_budget(), stats)
    return _wrap(p, q, maps, mode)


def brute_force_homs(p: Phase, q: Phase, mode: str = "strict",
                     stats: Optional[SearchStats] = None) -> list[PhaseMorphism]:
    """Filter every one of the ``|q|^|p|`` maps; counts the unpruned search tree."""
    _check_mode(mode)
    _check_signatures(p, q)
    if stats is not None:
        stats.nodes += sum(q.n**j for j in range(1, p.n + 1))
    maps = [f for f in product(range(q.n), repeat=p.n) if not morphism_violations(p, q, f, mode)]
    return _wrap(p, q, maps, mode)


def find_isomorphism(p: Phase, q: Phase, budget: Optional[int] = None) -> Optional[PhaseMorphism]:
    """First strict bijective morphism ``p -> q`` in map order, or None."""
    _check_signatures(p, q)
    if p.n != q.n or sorted(p.defect) != sorted(q.defect):
        return None
    maps = _backtrack(p, q, "strict", list(range(p.n)), budget or default_budget(), SearchStats(),
                      injective=True, first_only=True)
    return PhaseMorphism(p, q, maps[0], "strict") if maps else None


def automorphisms(p: Phase) -> list[PhaseMorphism]:
    maps = _backtrack(p, p, "strict", list(range(p.n)), default_budget(), SearchStats(), injective=True)
    return _wrap(p, p, maps, "strict")


# -- rigidity / factorization ------------------------------------------------------

@dataclass(frozen=True)
class RigidityResult:
    injective: bool
    witness: Optional[tuple[PhaseMorphism, PhaseMorphism]] = None
    hom_count: int = 0

    def to_json(self) -> dict:
        out = {"injective": self.injective, "hom_count": self.hom_count, "witness": None}
        if self.witness:
            out["witness"] = [m.as_dict() for m in self.witness]
        return out


def restriction_collision(homs: Sequence[PhaseMorphism], domain: Sequence[int]):
    """Two distinct morphisms that agree on ``domain``, or None.

    Takes the first restriction shared by several morphisms and prefers
    bijective members of that group (so automorphism witnesses come first).
    """
    groups: dict = {}
    for h in homs:
        groups.setdefault(tuple(h.mapping[x] for x in domain), []).append(h)
    for group in groups.values():
        if len(group) > 1:
            bij = [h for h in group if h.is_bijective]
            pick = bij if len(bij) > 1 else group
            return pick[0], pick[1]
    return None


def rigidity_check(p: Phase, q: Phase, mode: str = "strict", homs=None) -> RigidityResult:
    """Is restriction ``Hom(p, q) -> maps(core(p), q)`` injective?"""
    homs = enumerate_homs(p, q, mode) if homs is None else homs
    pair = restriction_collision(homs, rigid_core_elements(p))
    return RigidityResult(pair is None, pair, len(homs))


@dataclass(frozen=True)
class Factorization:
    constant_on_stratum: bool
    factored: Optional[PhaseMorphism] = None
    # class label of each source element; operation-equivariant, may lower defect
    projection: Optional[tuple[int, ...]] = None


def factorization_check(p: Phase, i: int, f: PhaseMorphism) -> Factorization:
    """Factor ``f`` through ``p -> collapse_stratum(p, i)`` when ``f`` is constant on ``P^(i)``.

    Raises InducedMonotonicityError when the collapsed quotient is not a phase.
    """
    from .quotient import collapse_congruence, quotient_phase

    if not 0 <= i <= p.k:
        raise IndexOutOfRange(f"depth {i} outside [0, {p.k}]")
    stratum = p.stratum(i)
    if len({f.mapping[x] for x in stratum}) > 1:
        return Factorization(False)
    c = collapse_congruence(p, i)
    for cls in c.classes:
        if len({f.mapping[x] for x in cls}) > 1:
            return Factorization(True)  # cannot happen: ker f is a congruence
    quotient = quotient_phase(p, c)
    mapping = tuple(f.mapping[cls[0]] for cls in c.classes)
    factored = PhaseMorphism(quotient, f.target, mapping, f.mode)
    return Factorization(True, factored, c.labels)
