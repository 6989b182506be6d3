"""Strong, weak and profile (Morita-type) equivalence."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product
from typing import Optional, Sequence

import numpy as np

from .catalogue import Block, CatalogueSpec, block
from .errors import BudgetExceeded, SignatureMismatch, default_budget
from .filtration import cached_stratify
from .morphism import PhaseMorphism, enumerate_homs, find_isomorphism
from .phase import Phase, canonical_form, flat_index


def _same_signature(p: Phase, q: Phase):
    if p.signature != q.signature:
        raise SignatureMismatch(f"{p.name} and {q.name} have different signatures")


def strong_equivalent(p: Phase, q: Phase) -> Optional[PhaseMorphism]:
    """A strict isomorphism ``p -> q``, or None."""
    _same_signature(p, q)
    return find_isomorphism(p, q)


# -- weak equivalence ----------------------------------------------------------------

@dataclass(frozen=True)
class WeakResult:
    equivalent: bool
    witness: Optional[tuple[int, ...]] = None  # bijection p -> q by index
    reason: str = ""

    def __bool__(self):
        return self.equivalent


def weak_equivalent(p: Phase, q: Phase) -> WeakResult:
    """Equal k and d_sep, and a defect-preserving bijection that is a strict
    isomorphism between the ``d_sep`` strata; other layers are unconstrained."""
    _same_signature(p, q)
    sp, sq = cached_stratify(p), cached_stratify(q)
    if sp.k != sq.k:
        return WeakResult(False, reason="filtration lengths differ")
    if sp.d_sep != sq.d_sep:
        return WeakResult(False, reason="SEP control depths differ")
    if sorted(p.defect) != sorted(q.defect):
        return WeakResult(False, reason="layer cardinalities differ")
    d = sp.d_sep
    up, uq = p.stratum(d), q.stratum(d)
    core_iso = find_isomorphism(p.induced(up), q.induced(uq))
    if core_iso is None:
        return WeakResult(False, reason=f"strata P^({d}) are not isomorphic")
    phi = [-1] * p.n
    for i, x in enumerate(up):
        phi[x] = uq[core_iso.mapping[i]]
    rest_q = [y for y in range(q.n) if y not in set(uq)]
    for x in range(p.n):
        if phi[x] < 0:
            y = next(y for y in rest_q if q.defect[y] == p.defect[x])
            rest_q.remove(y)
            phi[x] = y
    return WeakResult(True, tuple(phi), reason=f"P^({d}) isomorphic")


def weak_witness_ok(p: Phase, q: Phase, phi: Sequence[int], depth: int) -> bool:
    """Independent check of a weak-equivalence witness."""
    if sorted(phi) != list(range(q.n)) or p.n != q.n:
        return False
    if any(p.defect[x] != q.defect[phi[x]] for x in range(p.n)):
        return False
    up = p.stratum(depth)
    for op, tp, tq in zip(p.signature, p.tables, q.tables):
        for args in product(up, repeat=op.arity):
            if phi[tp[flat_index(args, p.n)]] != tq[flat_index([phi[a] for a in args], q.n)]:
                return False
    return True


def weak_equivalent_bruteforce(p: Phase, q: Phase) -> bool:
    """Oracle: scan every defect-preserving bijection."""
    sp, sq = cached_stratify(p), cached_stratify(q)
    if sp.k != sq.k or sp.d_sep != sq.d_sep or p.n != q.n:
        return False
    for perm in permutations(range(q.n)):
        if weak_witness_ok(p, q, perm, sp.d_sep):
            return True
    return False


# -- Morita-type profiles ----------------------------------------------------------

@dataclass(frozen=True)
class ProfileEntry:
    digest: str
    strict: int
    lax: int


@dataclass(frozen=True)
class MoritaProfile:
    battery_max_size: int
    entries: tuple[ProfileEntry, ...]

    def strict_counts(self) -> tuple:
        return tuple((e.digest, e.strict) for e in self.entries)

    def to_json(self) -> dict:
        return {
            "battery_max_size": self.battery_max_size,
            "entries": [{"digest": e.digest, "strict": e.strict, "lax": e.lax} for e in self.entries],
        }


def battery(signature, max_size: int, max_defect: int, budget: Optional[int] = None) -> list[Block]:
    return [block(CatalogueSpec(n, signature, max_defect), budget) for n in range(1, max_size + 1)]


def _entry_cols(nb: int, signature):
    return [(j, args) for j, op in enumerate(signature) for args in product(range(nb), repeat=op.arity)]


def count_homs_into(b: Block, q: Phase, budget: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    """(strict, lax) hom counts from every phase of ``b`` into ``q``, vectorised over ``b``."""
    nb = b.n
    maps = q.n**nb
    if maps * max(len(b), 1) > (budget or default_budget()) * 10:
        raise BudgetExceeded(f"profile block of {len(b)} phases x {maps} maps exceeds budget")
    cols = _entry_cols(nb, b.signature)
    qdef = np.array(q.defect, dtype=np.int16)
    strict = np.zeros(len(b), dtype=np.int64)
    lax = np.zeros(len(b), dtype=np.int64)
    for f in product(range(q.n), repeat=nb):
        farr = np.array(f, dtype=np.int64)
        rhs = np.array([q.tables[j][flat_index([f[a] for a in args], q.n)] for j, args in cols], dtype=np.int64)
        eq = (farr[b.tables] == rhs).all(axis=1)
        img = qdef[farr]
        strict += eq & (img == b.defects).all(axis=1)
        lax += eq & (img >= b.defects).all(axis=1)
    return strict, lax


def morita_profile(p: Phase, battery_max_size: int = 3, budget: Optional[int] = None) -> MoritaProfile:
    """Hom counts from every catalogue phase of size <= battery_max_size and defect <= k(p) into p."""
    entries = []
    for b in battery(p.signature, battery_max_size, p.k, budget):
        strict, lax = count_homs_into(b, p, budget)
        for phase, s, l in zip(b.phases, strict, lax):
            entries.append(ProfileEntry(phase.digest, int(s), int(l)))
    entries.sort(key=lambda e: e.digest)
    return MoritaProfile(battery_max_size, tuple(entries))


def profile_entry(probe: Phase, p: Phase) -> ProfileEntry:
    """One profile entry recomputed through the backtracking enumerator."""
    return ProfileEntry(probe.digest, len(enumerate_homs(probe, p, "strict")), len(enumerate_homs(probe, p, "lax")))


def _strict_counts(probe: Phase, tabs: np.ndarray, defs: np.ndarray, m: int) -> np.ndarray:
    """Strict hom counts from ``probe`` into stacked targets of size ``m``."""
    nb = probe.n
    offsets = np.cumsum([0] + [m**op.arity for op in probe.signature])[:-1]
    out = np.zeros(len(tabs), dtype=np.int64)
    pdef = np.array(probe.defect, dtype=np.int16)
    cells = _entry_cols(nb, probe.signature)
    src_out = np.array([probe.tables[j][flat_index(args, nb)] for j, args in cells], dtype=np.int64)
    for f in product(range(m), repeat=nb):
        farr = np.array(f, dtype=np.int64)
        ok = (defs[:, farr] == pdef).all(axis=1)
        if not ok.any():
            continue
        cols = [offsets[j] + flat_index([f[a] for a in args], m) for j, args in cells]
        ok &= (tabs[:, cols] == farr[src_out]).all(axis=1)
        out += ok
    return out


class PhaseStack:
    """Phases stacked by carrier size as arrays, with partition refinement by hom counts."""

    def __init__(self, phases: list[Phase]):
        self.phases = phases
        self.sizes = np.array([p.n for p in phases])
        self.slot = np.zeros(len(phases), dtype=np.int64)
        self.stacks = {}
        for m in sorted(set(self.sizes.tolist())):
            idx = np.flatnonzero(self.sizes == m)
            self.slot[idx] = np.arange(len(idx))
            self.stacks[m] = (
                np.array([[v for t in phases[i].tables for v in t] for i in idx], dtype=np.int64),
                np.array([phases[i].defect for i in idx], dtype=np.int16),
            )

    def counts(self, probe: Phase, live: np.ndarray) -> np.ndarray:
        out = np.zeros(len(live), dtype=np.int64)
        for m, (tabs, defs) in self.stacks.items():
            sel = self.sizes[live] == m
            if sel.any():
                rows = self.slot[live[sel]]
                out[sel] = _strict_counts(probe, tabs[rows], defs[rows], m)
        return out

    def refine(self, live, probes, done: list) -> list[np.ndarray]:
        """Split ``live`` by each probe in turn; singletons go to ``done``."""
        live = np.asarray(live, dtype=np.int64)
        ids = np.zeros(len(live), dtype=np.int64)
        for probe in probes:
            if len(live) == 0:
                break
            counts = self.counts(probe, live)
            keys = ids * (int(counts.max()) + 1) + counts
            _, ids, freq = np.unique(keys, return_inverse=True, return_counts=True)
            ids = ids.reshape(-1)
            alone = freq[ids] == 1
            done.extend([int(i)] for i in live[alone])
            live, ids = live[~alone], ids[~alone]
        return [live[ids == c] for c in np.unique(ids)]


def strict_profile_classes(phases: list[Phase], battery_max_size: int = 3) -> list[list[int]]:
    """Partition ``phases`` (by index) into classes with equal strict profiles.

    Any battery probe with different counts separates two phases, so the
    cheap probes (size < battery_max_size) go first, then members of each
    surviving class are tried as probes, and only what is still unsplit
    sees the whole battery.
    """
    ref = PhaseStack(phases)
    by_key: dict = {}
    for i, p in enumerate(phases):
        by_key.setdefault((p.signature, p.k), []).append(i)
    done: list = []
    for (signature, k), members in by_key.items():
        blocks = battery(signature, battery_max_size, k)
        small = [q for b in blocks[:-1] for q in b.phases]
        for cell in ref.refine(members, small, done):
            own = [phases[i] for i in cell if phases[i].n <= battery_max_size]
            for rest in ref.refine(cell, own, done):
                full = (q for b in blocks for q in b.phases)
                done.extend(sorted(int(i) for i in c) for c in ref.refine(rest, full, done))
    return sorted(done)


def find_weak_not_strong(phases: list[Phase]) -> Optional[tuple[Phase, Phase, WeakResult]]:
    """First pair (in input order) that is weakly but not strongly equivalent."""
    groups: dict = {}
    for p in phases:
        st = cached_stratify(p)
        if st.d_sep == 0:
            continue
        key = (p.signature, st.k, st.d_sep, tuple(sorted(p.defect)),
               canonical_form(p.induced(p.stratum(st.d_sep))).digest)
        groups.setdefault(key, []).append(p)
    for p in phases:
        st = cached_stratify(p)
        if st.d_sep == 0:
            continue
        key = (p.signature, st.k, st.d_sep, tuple(sorted(p.defect)),
               canonical_form(p.induced(p.stratum(st.d_sep))).digest)
        for q in groups[key]:
            if q is p:
                continue
            if strong_equivalent(p, q) is None:
                w = weak_equivalent(p, q)
                if w:
                    return p, q, w
    return None
