"""Congruences, quotients, boundaries and completion."""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Optional, Sequence

from .errors import IndexOutOfRange, InducedMonotonicityError, NotACongruence, UnknownIdentifier
from .filtration import rigid_core_elements
from .morphism import PhaseMorphism
from .phase import Phase, Violation, flat_index

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
EXHAUSTIVE_COMPLETION_LIMIT = 5


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # keep the smaller index as root so representatives are canonical
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def labels(self) -> tuple[int, ...]:
        return normalize([self.find(x) for x in range(len(self.parent))])


def normalize(labels: Sequence) -> tuple[int, ...]:
    """Relabel classes 0, 1, ... in order of first occurrence."""
    seen = {}
    return tuple(seen.setdefault(c, len(seen)) for c in labels)


@dataclass(frozen=True)
class Congruence:
    """Partition of ``range(n)``; ``labels[x]`` is the class of x, classes numbered by least member."""

    labels: tuple[int, ...]

    @classmethod
    def from_classes(cls, n: int, classes: Iterable[Iterable[int]]) -> "Congruence":
        labels = list(range(n))
        for c in classes:
            c = list(c)
            for x in c:
                labels[x] = min(c)
        return cls(normalize(labels))

    @classmethod
    def diagonal(cls, n: int) -> "Congruence":
        return cls(tuple(range(n)))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def classes(self) -> tuple[tuple[int, ...], ...]:
        out: dict[int, list[int]] = {}
        for x, c in enumerate(self.labels):
            out.setdefault(c, []).append(x)
        return tuple(tuple(out[c]) for c in sorted(out))

    def representative(self, x: int) -> int:
        return self.classes[self.labels[x]][0]

    def related(self, x: int, y: int) -> bool:
        return self.labels[x] == self.labels[y]

    def refines(self, other: "Congruence") -> bool:
        """True when every class of self lies inside a class of ``other``."""
        return all(other.labels[x] == other.labels[cls[0]] for cls in self.classes for x in cls)

    def meet(self, other: "Congruence") -> "Congruence":
        return Congruence(normalize(list(zip(self.labels, other.labels))))

    @property
    def is_diagonal(self) -> bool:
        return len(set(self.labels)) == self.n

    @property
    def digest(self) -> str:
        return hashlib.sha256(",".join(map(str, self.labels)).encode()).hexdigest()[:16]

    def named_classes(self, p: Phase) -> list[list[str]]:
        return [[p.elements[x] for x in cls] for cls in self.classes]


def compatibility_violation(p: Phase, labels: Sequence[int]):
    """First (op, args1, args2) whose arguments are related but outputs are not."""
    n = p.n
    for op, table in zip(p.signature, p.tables):
        seen = {}
        for args in p.tuples(op.arity):
            key = tuple(labels[a] for a in args)
            out = labels[table[flat_index(args, n)]]
            if key in seen and seen[key][1] != out:
                return op.name, seen[key][0], args
            seen.setdefault(key, (args, out))
    return None


def is_congruence(p: Phase, c: Congruence) -> bool:
    return c.n == p.n and compatibility_violation(p, c.labels) is None


def _pairs_as_indices(p: Phase, seeds) -> list[tuple[int, int]]:
    out = []
    for a, b in seeds:
        a = p.index(a) if isinstance(a, str) else a
        b = p.index(b) if isinstance(b, str) else b
        if not (0 <= a < p.n and 0 <= b < p.n):
            raise UnknownIdentifier(f"seed ({a}, {b}) outside the carrier")
        out.append((a, b))
    return out


def congruence_closure(p: Phase, seeds: Iterable = ()) -> Congruence:
    """Smallest congruence containing ``seeds`` (union-find plus signature-table propagation)."""
    uf = UnionFind(p.n)
    for a, b in _pairs_as_indices(p, seeds):
        uf.union(a, b)
    n = p.n
    changed = True
    while changed:
        changed = False
        for op, table in zip(p.signature, p.tables):
            sig = {}
            for args in p.tuples(op.arity):
                key = tuple(uf.find(a) for a in args)
                out = table[flat_index(args, n)]
                other = sig.setdefault(key, out)
                if uf.union(other, out):
                    changed = True
    return Congruence(uf.labels())


def set_partitions(n: int):
    """Restricted growth strings of length n, i.e. every partition of ``range(n)``."""
    if n == 0:
        yield ()
        return

    def rec(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for c in range(top + 2):
            prefix.append(c)
            yield from rec(prefix, max(top, c))
            prefix.pop()

    yield from rec([0], 0)


def all_congruences(p: Phase) -> list[Congruence]:
    return [Congruence(rgs) for rgs in set_partitions(p.n) if compatibility_violation(p, rgs) is None]


def smallest_congruence_oracle(p: Phase, seeds: Iterable = ()) -> Congruence:
    """Meet of every congruence containing the seeds, by exhaustive enumeration."""
    seeds = _pairs_as_indices(p, seeds)
    result = None
    for c in all_congruences(p):
        if all(c.related(a, b) for a, b in seeds):
            result = c if result is None else result.meet(c)
    assert result is not None  # the total congruence always qualifies
    return result


def _class_names(p: Phase, c: Congruence) -> tuple[str, ...]:
    names = tuple("_".join(p.elements[x] for x in cls) for cls in c.classes)
    if len(set(names)) == len(names) and all(_IDENT.match(s) for s in names):
        return names
    return tuple(f"c{i}" for i in range(len(names)))


def induced_violations(p: Phase, c: Congruence) -> list[Violation]:
    classes = c.classes
    dbar = [min(p.defect[x] for x in cls) for cls in classes]
    out = []
    for op, table in zip(p.signature, p.tables):
        if op.arity == 0:
            continue
        for cargs in product(range(len(classes)), repeat=op.arity):
            rep_args = [classes[a][0] for a in cargs]
            res = c.labels[table[flat_index(rep_args, p.n)]]
            lo = min(dbar[a] for a in cargs)
            if dbar[res] < lo:
                out.append(Violation("InducedMonotonicityError",
                                     f"{op.name} on classes {cargs} lands in class {res} of defect {dbar[res]} < {lo}",
                                     tuple(rep_args), op.name))
    return out


def quotient_phase(p: Phase, c: Congruence, name: Optional[str] = None) -> Phase:
    """Induced tables on classes; class defect is the minimum over the class."""
    if not is_congruence(p, c):
        raise NotACongruence("partition is not compatible with the operations")
    bad = induced_violations(p, c)
    if bad:
        raise InducedMonotonicityError(bad[0].message, violations=bad, detail=bad[0].where)
    classes = c.classes
    m = len(classes)
    tables = []
    for op, table in zip(p.signature, p.tables):
        tables.append(tuple(
            c.labels[table[flat_index([classes[a][0] for a in cargs], p.n)]]
            for cargs in product(range(m), repeat=op.arity)
        ))
    return Phase(
        name or f"{p.name}_q",
        _class_names(p, c),
        p.signature,
        tuple(tables),
        tuple(min(p.defect[x] for x in cls) for cls in classes),
    )


def stratum_congruence(p: Phase, members: Sequence[int]) -> Congruence:
    members = list(members)
    return congruence_closure(p, [(members[0], y) for y in members[1:]])


def boundary_congruence(p: Phase) -> Congruence:
    return stratum_congruence(p, rigid_core_elements(p))


def boundary(p: Phase) -> Phase:
    """Quotient by the congruence generated by the rigid core."""
    return quotient_phase(p, boundary_congruence(p), name=f"{p.name}_bd")


def collapse_congruence(p: Phase, i: int) -> Congruence:
    if not 0 <= i <= p.k:
        raise IndexOutOfRange(f"depth {i} outside [0, {p.k}]")
    return stratum_congruence(p, p.stratum(i))


def collapse_stratum(p: Phase, i: int) -> Phase:
    return quotient_phase(p, collapse_congruence(p, i), name=f"{p.name}_c{i}")


# -- completion -------------------------------------------------------------------

def is_admissible(p: Phase, c: Congruence, core: Optional[Sequence[int]] = None) -> bool:
    """Identity on the rigid core and defect-constant on every class."""
    core = rigid_core_elements(p) if core is None else core
    if len({c.labels[x] for x in core}) != len(core):
        return False
    return all(len({p.defect[x] for x in cls}) == 1 for cls in c.classes)


def join_with(p: Phase, c: Congruence, pairs) -> Congruence:
    seeds = [(cls[0], x) for cls in c.classes for x in cls[1:]]
    return congruence_closure(p, seeds + list(pairs))


def greedy_maximal(p: Phase) -> Congruence:
    """Saturate admissible merges over lexicographically ordered candidate pairs."""
    core = rigid_core_elements(p)
    current = Congruence.diagonal(p.n)
    for x, y in combinations(range(p.n), 2):
        if current.related(x, y) or p.defect[x] != p.defect[y]:
            continue
        candidate = join_with(p, current, [(x, y)])
        if is_admissible(p, candidate, core):
            current = candidate
    return current


def admissible_pairs(p: Phase) -> list[tuple[int, int]]:
    """Pairs whose principal congruence is admissible."""
    core = rigid_core_elements(p)
    return [(x, y) for x, y in combinations(range(p.n), 2)
            if p.defect[x] == p.defect[y] and is_admissible(p, congruence_closure(p, [(x, y)]), core)]


def is_complete(p: Phase) -> bool:
    """No two elements can be merged admissibly."""
    return not admissible_pairs(p)


def admissible_join(p: Phase) -> Congruence:
    """Join of every admissible principal congruence; admissible iff the maximum is unique."""
    return congruence_closure(p, admissible_pairs(p))


def maximal_admissible(p: Phase) -> list[Congruence]:
    """All maximal admissible congruences by exhaustive enumeration."""
    core = rigid_core_elements(p)
    adm = [c for c in all_congruences(p) if is_admissible(p, c, core)]
    return [c for c in adm if not any(d != c and c.refines(d) for d in adm)]


@dataclass(frozen=True)
class CompletionResult:
    completed: Phase
    unit: PhaseMorphism
    congruence: Congruence
    complete: bool
    unique_max: bool
    all_maximal: Optional[tuple[str, ...]] = None

    def to_json(self) -> dict:
        src = self.unit.source
        return {
            "complete": self.complete,
            "unique_max": self.unique_max,
            "partition": self.congruence.named_classes(src),
            "completed_digest": self.completed.digest,
            "all_maximal": list(self.all_maximal) if self.all_maximal is not None else None,
        }


def completion(p: Phase) -> CompletionResult:
    c = greedy_maximal(p)
    pairs = admissible_pairs(p)
    unique = is_admissible(p, congruence_closure(p, pairs))
    all_max = None
    if p.n <= EXHAUSTIVE_COMPLETION_LIMIT:
        maxima = maximal_admissible(p)
        all_max = tuple(sorted(m.digest for m in maxima))
        assert unique == (len(maxima) == 1)
    completed = quotient_phase(p, c, name=f"{p.name}_cpl")
    unit = PhaseMorphism(p, completed, c.labels, "strict")
    return CompletionResult(completed, unit, c, not pairs, unique, all_max)
