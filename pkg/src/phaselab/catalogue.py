"""Exhaustive and random generation of phases up to strict isomorphism."""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from math import prod
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, InvalidPermutation, RejectionBudgetExceeded, default_budget
from .phase import BINARY, CanonicalForm, Phase, Signature, encode_digest, flat_index

EXHAUSTIVE_SIZE_LIMIT = 4
REJECTION_LIMIT = 10**6


@dataclass(frozen=True)
class CatalogueSpec:
    n: int
    signature: Signature = BINARY
    max_defect: int = 2
    dedupe: bool = True


def _entries(n: int, signature: Signature):
    """(op index, argument tuple) for every table cell, in flat order."""
    return [(j, args) for j, op in enumerate(signature) for args in product(range(n), repeat=op.arity)]


def _allowed(n, defect, entries):
    out = []
    for _, args in entries:
        lo = min((defect[a] for a in args), default=0)
        out.append([z for z in range(n) if defect[z] >= lo])
    return out


def _defect_vectors(n, max_defect, sorted_only):
    for d in product(range(max_defect + 1), repeat=n):
        if sorted_only and any(d[i] > d[i + 1] for i in range(n - 1)):
            continue
        yield d


def raw_count(spec: CatalogueSpec, sorted_only: bool = False) -> int:
    """Number of valid labelled phases (product formula over allowed outputs)."""
    entries = _entries(spec.n, spec.signature)
    return sum(prod(len(a) for a in _allowed(spec.n, d, entries))
               for d in _defect_vectors(spec.n, spec.max_defect, sorted_only))


def _fiber_perms(defect):
    n = len(defect)
    fibers = []
    for x in range(n):
        if fibers and defect[fibers[-1][0]] == defect[x]:
            fibers[-1].append(x)
        else:
            fibers.append([x])
    for choice in product(*(permutations(f) for f in fibers)):
        perm = [x for part in choice for x in part]
        if perm != list(range(n)):
            yield perm


def _canonical_mask(tables: np.ndarray, n: int, signature: Signature, defect) -> np.ndarray:
    """Rows that are lexicographically minimal among their defect-fiber relabellings."""
    keep = np.ones(len(tables), dtype=bool)
    offsets = []
    base = 0
    for op in signature:
        offsets.append(base)
        base += n**op.arity
    for perm in _fiber_perms(defect):
        inv = np.empty(n, dtype=tables.dtype)
        inv[perm] = np.arange(n)
        src = [offsets[j] + flat_index([perm[a] for a in args], n)
               for j, op in enumerate(signature) for args in product(range(n), repeat=op.arity)]
        relabeled = inv[tables[:, src]]
        diff = relabeled != tables
        first = diff.argmax(axis=1)
        rows = np.arange(len(tables))
        smaller = diff.any(axis=1) & (relabeled[rows, first] < tables[rows, first])
        keep &= ~smaller
    return keep


@dataclass
class Block:
    """Catalogue phases of one carrier size as arrays (for vectorised sweeps)."""

    n: int
    signature: Signature
    defects: np.ndarray  # (N, n)
    tables: np.ndarray  # (N, cells)
    phases: list

    def __len__(self):
        return len(self.phases)


def _make_phase(name, n, signature, defect, row, digest=None) -> Phase:
    tables = []
    pos = 0
    for op in signature:
        size = n**op.arity
        tables.append(tuple(int(v) for v in row[pos:pos + size]))
        pos += size
    p = Phase(name, tuple(f"e{i}" for i in range(n)), signature, tuple(tables), tuple(int(d) for d in defect))
    if digest is not None:
        canon = Phase(f"p_{digest}", p.elements, signature, p.tables, p.defect)
        object.__setattr__(p, "_canonical_cache", CanonicalForm(canon, digest, tuple(range(n))))
    return p


def _check_budget(spec: CatalogueSpec, budget: Optional[int]):
    budget = budget or default_budget()
    if spec.n > EXHAUSTIVE_SIZE_LIMIT:
        raise BudgetExceeded(f"exhaustive enumeration is capped at n <= {EXHAUSTIVE_SIZE_LIMIT}")
    total = raw_count(spec, sorted_only=spec.dedupe)
    if total > budget:
        raise BudgetExceeded(f"{total} raw tables exceed the budget of {budget}")


@lru_cache(maxsize=32)
def _block(spec: CatalogueSpec) -> Block:
    n, sig = spec.n, spec.signature
    entries = _entries(n, sig)
    defects, tables, phases = [], [], []
    prefix = "c" if spec.dedupe else "r"
    for d in _defect_vectors(n, spec.max_defect, sorted_only=spec.dedupe):
        allowed = _allowed(n, d, entries)
        arr = np.array(list(product(*allowed)), dtype=np.int8).reshape(-1, len(entries))
        if spec.dedupe:
            arr = arr[_canonical_mask(arr, n, sig, d)]
        for row in arr:
            digest = encode_digest(sig, d, _split(row, n, sig)) if spec.dedupe else None
            phases.append(_make_phase(f"{prefix}{n}_{len(phases):05d}", n, sig, d, row, digest))
        defects.append(np.tile(np.array(d, dtype=np.int16), (len(arr), 1)))
        tables.append(arr)
    return Block(n, sig, np.concatenate(defects), np.concatenate(tables), phases)


def _split(row, n, sig):
    out, pos = [], 0
    for op in sig:
        size = n**op.arity
        out.append([int(v) for v in row[pos:pos + size]])
        pos += size
    return out


def block(spec: CatalogueSpec, budget: Optional[int] = None) -> Block:
    _check_budget(spec, budget)
    return _block(spec)


def enumerate_phases(spec: CatalogueSpec, budget: Optional[int] = None) -> Iterator[Phase]:
    """Every valid phase for ``spec`` in canonical order (deduplicated if requested)."""
    yield from block(spec, budget).phases


def catalogue(max_size: int, max_defect: int = 2, signature: Signature = BINARY,
              budget: Optional[int] = None) -> list[Phase]:
    """Deduplicated phases of every size 1..max_size."""
    out = []
    for n in range(1, max_size + 1):
        out.extend(enumerate_phases(CatalogueSpec(n, signature, max_defect), budget))
    return out


def random_phase(seed: int, spec: CatalogueSpec) -> Phase:
    """Deterministic per (seed, spec); rejection-samples until monotonicity holds."""
    rng = random.Random(seed)
    n, sig = spec.n, spec.signature
    entries = _entries(n, sig)
    for _ in range(REJECTION_LIMIT):
        d = [rng.randint(0, spec.max_defect) for _ in range(n)]
        row = [rng.randrange(n) for _ in entries]
        if all(d[out] >= min((d[a] for a in args), default=0) for (_, args), out in zip(entries, row)):
            return _make_phase(f"rand_{seed & 0xFFFFFFFF:08x}", n, sig, d, row)
    raise RejectionBudgetExceeded(f"no valid phase after {REJECTION_LIMIT} rejections")


def scramble(p: Phase, permutation: Sequence) -> Phase:
    """Isomorphic copy declaring elements in the given order (names or indices)."""
    order = [p.index(x) if isinstance(x, str) else x for x in permutation]
    if sorted(order) != list(range(p.n)):
        raise InvalidPermutation(f"{list(permutation)} is not a permutation of the carrier")
    return p.reordered(order)


def random_permutation(rng: random.Random, n: int) -> list[int]:
    perm = list(range(n))
    rng.shuffle(perm)
    return perm


def sweep_universe(max_size: int = 3, sample: Optional[int] = 30, seed: int = 0,
                   max_defect: int = 2, include_fixtures: bool = True) -> list[Phase]:
    """Universe for pairwise sweeps.

    Every catalogue phase of size < ``max_size``, a seeded sample of size
    ``max_size`` (all of them when ``sample`` is None) and the shipped fixtures.
    """
    out = catalogue(max_size - 1, max_defect) if max_size > 1 else []
    top = list(enumerate_phases(CatalogueSpec(max_size, BINARY, max_defect)))
    if sample is not None and sample < len(top):
        idx = sorted(random.Random(seed).sample(range(len(top)), sample))
        top = [top[i] for i in idx]
    out.extend(top)
    if include_fixtures:
        from .fixtures import load_fixture

        out.extend(load_fixture(name) for name in ("t1", "max3", "pair4", "sep4"))
    return out
