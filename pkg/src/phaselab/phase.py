"""Phase data model: finite carrier, operation tables and a monotone defect grading."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    DuplicateIdentifier,
    MonotonicityError,
    SizeLimitExceeded,
    TotalityError,
    UnknownIdentifier,
    ValidationError,
)

MAX_DEFECT = 2**16
CANONICAL_SIZE_LIMIT = 8


@dataclass(frozen=True)
class Operation:
    name: str
    arity: int


@dataclass(frozen=True)
class Signature:
    operations: tuple[Operation, ...] = ()

    @classmethod
    def of(cls, *pairs) -> "Signature":
        return cls(tuple(Operation(str(name), int(arity)) for name, arity in pairs))

    def __iter__(self):
        return iter(self.operations)

    def __len__(self):
        return len(self.operations)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(op.name for op in self.operations)

    @property
    def arities(self) -> tuple[int, ...]:
        return tuple(op.arity for op in self.operations)

    def encode(self) -> list:
        return [[op.name, op.arity] for op in self.operations]


BINARY = Signature.of(("m", 2))


def flat_index(args: Sequence[int], n: int) -> int:
    """Row-major position of an argument tuple; lexicographic in element index."""
    i = 0
    for a in args:
        i = i * n + a
    return i


@dataclass(frozen=True)
class Phase:
    """A validated finite phase.

    Tables are stored flat, one tuple per operation, indexed by
    ``flat_index(args, n)``; entries and defects refer to element indices.
    ``order`` holds generator pairs of an optional preorder block (``None``
    when no block was given). Construct through ``validate`` unless the
    tables are already known to be valid.
    """

    name: str
    elements: tuple[str, ...]
    signature: Signature
    tables: tuple[tuple[int, ...], ...]
    defect: tuple[int, ...]
    order: Optional[tuple[tuple[int, int], ...]] = None

    @property
    def n(self) -> int:
        return len(self.elements)

    @property
    def k(self) -> int:
        return max(self.defect)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownIdentifier(f"unknown element {name!r} in phase {self.name}") from None

    @property
    def _index(self) -> dict:
        cache = self.__dict__.get("_index_cache")
        if cache is None:
            cache = {e: i for i, e in enumerate(self.elements)}
            object.__setattr__(self, "_index_cache", cache)
        return cache

    def op_index(self, op) -> int:
        if isinstance(op, int):
            return op
        try:
            return self.signature.names.index(op)
        except ValueError:
            raise UnknownIdentifier(f"unknown operation {op!r}") from None

    def apply(self, op, args: Sequence[int]) -> int:
        j = self.op_index(op)
        return self.tables[j][flat_index(args, self.n)]

    def tuples(self, arity: int):
        return product(range(self.n), repeat=arity)

    def stratum(self, i: int) -> tuple[int, ...]:
        return tuple(x for x in range(self.n) if self.defect[x] >= i)

    def induced(self, members: Iterable[int], name: Optional[str] = None) -> "Phase":
        """Subphase on ``members`` (must be closed under every operation)."""
        members = sorted(set(members))
        pos = {x: i for i, x in enumerate(members)}
        m = len(members)
        tables = []
        for op, table in zip(self.signature, self.tables):
            row = []
            for args in product(members, repeat=op.arity):
                out = table[flat_index(args, self.n)]
                if out not in pos:
                    raise ValueError(f"subset not closed under {op.name}")
                row.append(pos[out])
            tables.append(tuple(row))
        assert m > 0
        return Phase(
            name or self.name,
            tuple(self.elements[x] for x in members),
            self.signature,
            tuple(tables),
            tuple(self.defect[x] for x in members),
        )

    def reordered(self, order: Sequence[int], name: Optional[str] = None) -> "Phase":
        """Same phase with elements declared in ``order`` (new position i holds old ``order[i]``)."""
        n = self.n
        new_of_old = [0] * n
        for new, old in enumerate(order):
            new_of_old[old] = new
        tables = []
        for op, table in zip(self.signature, self.tables):
            tables.append(tuple(new_of_old[table[flat_index(args, n)]]
                                for args in product(order, repeat=op.arity)))
        new_order = None
        if self.order is not None:
            new_order = tuple((new_of_old[a], new_of_old[b]) for a, b in self.order)
        return Phase(
            name or self.name,
            tuple(self.elements[old] for old in order),
            self.signature,
            tuple(tables),
            tuple(self.defect[old] for old in order),
            new_order,
        )

    def to_raw(self) -> dict:
        """Name-based plain-data view, accepted back by ``validate``."""
        tables = {}
        for op, table in zip(self.signature, self.tables):
            tables[op.name] = {
                tuple(self.elements[a] for a in args): self.elements[table[flat_index(args, self.n)]]
                for args in self.tuples(op.arity)
            }
        raw = {
            "name": self.name,
            "elements": list(self.elements),
            "signature": [(op.name, op.arity) for op in self.signature],
            "tables": tables,
            "defect": {e: d for e, d in zip(self.elements, self.defect)},
        }
        if self.order is not None:
            raw["order"] = [(self.elements[a], self.elements[b]) for a, b in self.order]
        return raw

    @property
    def digest(self) -> str:
        return canonical_form(self).digest

    def __repr__(self) -> str:
        return f"Phase({self.name!r}, n={self.n}, k={self.k})"


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    where: Optional[tuple] = None
    op: Optional[str] = None


_KINDS = {
    "TotalityError": TotalityError,
    "MonotonicityError": MonotonicityError,
    "UnknownIdentifier": UnknownIdentifier,
    "DuplicateIdentifier": DuplicateIdentifier,
    "ValidationError": ValidationError,
}


def find_violations(raw: Mapping) -> list[Violation]:
    """Every axiom violation in ``raw`` (see ``validate`` for the layout)."""
    out: list[Violation] = []
    elements = list(raw.get("elements") or [])
    if not elements:
        out.append(Violation("ValidationError", "carrier must have at least one element"))
    seen = set()
    for e in elements:
        if e in seen:
            out.append(Violation("DuplicateIdentifier", f"element {e!r} declared twice", (e,)))
        seen.add(e)
    known = set(elements)

    signature = [(str(a), b) for a, b in raw.get("signature", ())]
    op_names = set()
    for name, arity in signature:
        if name in op_names:
            out.append(Violation("DuplicateIdentifier", f"operation {name!r} declared twice", (name,)))
        op_names.add(name)
        if not isinstance(arity, int) or arity < 0:
            out.append(Violation("ValidationError", f"operation {name!r} has invalid arity {arity!r}"))

    defect_raw = raw.get("defect", {})
    defect = {}
    for e, d in defect_raw.items():
        if e not in known:
            out.append(Violation("UnknownIdentifier", f"defect given for unknown element {e!r}", (e,)))
            continue
        if not isinstance(d, int) or isinstance(d, bool) or d < 0 or d > MAX_DEFECT:
            out.append(Violation("ValidationError", f"defect of {e!r} must be an integer in [0, {MAX_DEFECT}]", (e,)))
            continue
        defect[e] = d
    for e in elements:
        if e not in defect_raw:
            out.append(Violation("TotalityError", f"no defect value for {e!r}", (e,)))

    tables = raw.get("tables", {})
    for name in tables:
        if name not in op_names:
            out.append(Violation("UnknownIdentifier", f"table for undeclared operation {name!r}", (name,)))
    for name, arity in signature:
        if not isinstance(arity, int) or arity < 0:
            continue
        table = tables.get(name)
        if table is None:
            out.append(Violation("TotalityError", f"operation {name!r} has no table", (name,)))
            continue
        entries = {}
        for args, value in table.items():
            args = (args,) if isinstance(args, str) else tuple(args)
            if len(args) != arity:
                out.append(Violation("ValidationError", f"{name}: tuple {args} has wrong arity", args))
                continue
            bad = [a for a in (*args, value) if a not in known]
            if bad:
                out.append(Violation("UnknownIdentifier", f"{name}: unknown element(s) {bad} in row {args}", args, name))
                continue
            entries[args] = value
        if len(seen) != len(elements):
            continue
        for args in product(elements, repeat=arity):
            if args not in entries:
                out.append(Violation("TotalityError", f"{name}: missing entry for {args}", args, name))
                continue
            if arity == 0 or not all(a in defect for a in args) or entries[args] not in defect:
                continue
            lo = min(defect[a] for a in args)
            got = defect[entries[args]]
            if got < lo:
                out.append(Violation(
                    "MonotonicityError",
                    f"{name}{args} = {entries[args]} has defect {got} < {lo}",
                    args,
                    name,
                ))

    for pair in raw.get("order") or ():
        bad = [a for a in pair if a not in known]
        if bad or len(pair) != 2:
            out.append(Violation("UnknownIdentifier", f"order relation {tuple(pair)} names unknown element(s)", tuple(pair)))
    return out


def validate(raw: Mapping) -> Phase:
    """Check totality, monotonicity and identifier integrity; return a Phase.

    ``raw`` layout::

        {"name": str, "elements": [str, ...], "signature": [(op, arity), ...],
         "tables": {op: {(x1, ..., xm): y}}, "defect": {x: int},
         "order": [(x, y), ...] or None}

    Raises the error class of the first violation; ``.violations`` lists all of them.
    """
    violations = find_violations(raw)
    if violations:
        first = violations[0]
        cls = _KINDS[first.kind]
        msg = first.message if len(violations) == 1 else f"{first.message} (+{len(violations) - 1} more)"
        raise cls(msg, violations=violations, detail=first.where)

    elements = tuple(raw["elements"])
    pos = {e: i for i, e in enumerate(elements)}
    signature = Signature.of(*raw.get("signature", ()))
    tables = []
    for op in signature:
        table = {((k,) if isinstance(k, str) else tuple(k)): v for k, v in raw["tables"][op.name].items()}
        tables.append(tuple(pos[table[args]] for args in product(elements, repeat=op.arity)))
    order = raw.get("order")
    if order is not None:
        order = tuple((pos[a], pos[b]) for a, b in order)
    return Phase(
        str(raw.get("name", "P")),
        elements,
        signature,
        tuple(tables),
        tuple(raw["defect"][e] for e in elements),
        order,
    )


def check_phase(p: Phase) -> list[Violation]:
    """Re-run the axioms on an already constructed Phase."""
    return find_violations(p.to_raw())


# -- canonical labelling --------------------------------------------------------

@dataclass(frozen=True)
class CanonicalForm:
    phase: Phase
    digest: str
    # labeling[i] = index in the input phase of canonical element e{i}
    labeling: tuple[int, ...] = field(compare=False)


def _relabel_tables(n, arities, tables, perm, inv):
    out = []
    for arity, table in zip(arities, tables):
        out.append(tuple(inv[table[flat_index(args, n)]] for args in product(perm, repeat=arity)))
    return tuple(out)


def canonical_labeling(n: int, defect: Sequence[int], arities: Sequence[int], tables) -> tuple:
    """Return ``(perm, tables)`` minimising the flat table encoding.

    Elements are sorted by defect; only permutations inside defect fibers are
    tried, so the result is exact but exponential in the fiber sizes.
    """
    by_defect = sorted(range(n), key=lambda x: (defect[x], x))
    fibers = []
    for x in by_defect:
        if fibers and defect[fibers[-1][0]] == defect[x]:
            fibers[-1].append(x)
        else:
            fibers.append([x])
    best = None
    best_perm = None
    for choice in product(*(permutations(f) for f in fibers)):
        perm = [x for part in choice for x in part]
        inv = [0] * n
        for new, old in enumerate(perm):
            inv[old] = new
        enc = _relabel_tables(n, arities, tables, perm, inv)
        if best is None or enc < best:
            best, best_perm = enc, tuple(perm)
    return best_perm, best


def encode_digest(signature: Signature, defect: Sequence[int], tables) -> str:
    payload = json.dumps([signature.encode(), list(defect), [list(t) for t in tables]],
                         separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def canonical_form(p: Phase) -> CanonicalForm:
    """Canonical relabelling e0..e(n-1); equal for strictly isomorphic phases."""
    cached = p.__dict__.get("_canonical_cache")
    if cached is not None:
        return cached
    if p.n > CANONICAL_SIZE_LIMIT:
        raise SizeLimitExceeded(f"canonical form supports n <= {CANONICAL_SIZE_LIMIT}, got {p.n}")
    perm, tables = canonical_labeling(p.n, p.defect, p.signature.arities, p.tables)
    defect = tuple(p.defect[x] for x in perm)
    digest = encode_digest(p.signature, defect, tables)
    phase = Phase(f"p_{digest}", tuple(f"e{i}" for i in range(p.n)), p.signature, tables, defect)
    form = CanonicalForm(phase, digest, perm)
    object.__setattr__(p, "_canonical_cache", form)
    return form
