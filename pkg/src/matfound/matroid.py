"""Exact finite matroids stored as a canonical basis family over bitmasks.

Ground sets are ordered label tuples of at most 31 elements; bit ``i`` of a
mask is the i-th label. That order drives every "first / least element"
choice elsewhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, permutations
from typing import Iterable

import numpy as np

from . import _kernels
from .bits import bits, from_indices, full, k_subsets, popcount
from .errors import (
    CorankOutOfRange,
    DuplicateLabel,
    ElementNotInGround,
    EmptyBasisFamily,
    ExchangeAxiomViolated,
    GroundSetTooLarge,
    NotAFlat,
    NotAHyperplane,
    UnequalCardinality,
)

MAX_ELEMENTS = 31
_RANK_TABLE_MAX_N = 16


@dataclass(frozen=True)
class Flat:
    members: int
    rank: int
    corank: int


@dataclass(frozen=True, eq=False)
class Matroid:
    labels: tuple[str, ...]
    bases: tuple[int, ...]
    name: str = ""
    # construction metadata (gluing data etc.); never part of equality
    provenance: object = field(default=None, repr=False)

    # -- identity -----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Matroid):
            return NotImplemented
        return self.labels == other.labels and self.bases == other.bases

    def __hash__(self):
        return hash((self.labels, self.bases))

    def __repr__(self):
        nm = f"{self.name!r}, " if self.name else ""
        return f"Matroid({nm}n={self.n}, rank={self.rank}, bases={len(self.bases)})"

    # -- basic data -----------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def full(self) -> int:
        return full(self.n)

    @cached_property
    def rank(self) -> int:
        return popcount(self.bases[0])

    @cached_property
    def index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @cached_property
    def basis_set(self) -> frozenset[int]:
        return frozenset(self.bases)

    @cached_property
    def basis_array(self) -> np.ndarray:
        return np.array(self.bases, dtype=np.uint64)

    def mask(self, s) -> int:
        """Convert labels / a Flat / an int mask to a validated mask."""
        if isinstance(s, Flat):
            s = s.members
        if isinstance(s, (int, np.integer)):
            s = int(s)
            if s & ~self.full:
                raise ElementNotInGround(f"mask {s:#x} outside ground set of size {self.n}")
            return s
        if isinstance(s, str):
            s = [s]
        m = 0
        for lab in s:
            try:
                m |= 1 << self.index[lab]
            except KeyError:
                raise ElementNotInGround(f"{lab!r} is not in the ground set") from None
        return m

    def labels_of(self, mask: int) -> tuple[str, ...]:
        return tuple(self.labels[i] for i in bits(mask))

    # -- rank and closure -----------------------------------------------------

    @cached_property
    def _rank_table(self):
        if self.n > _RANK_TABLE_MAX_N:
            return None
        return _kernels.rank_many(self.basis_array, np.arange(1 << self.n, dtype=np.uint64))

    @cached_property
    def _rank_cache(self) -> dict:
        return {}

    def rank_of(self, mask: int) -> int:
        table = self._rank_table
        if table is not None:
            return int(table[mask])
        cache = self._rank_cache
        r = cache.get(mask)
        if r is None:
            r = max(popcount(b & mask) for b in self.bases)
            cache[mask] = r
        return r

    def closure_of(self, mask: int) -> int:
        r = self.rank_of(mask)
        out = mask
        for e in range(self.n):
            bit = 1 << e
            if not mask & bit and self.rank_of(mask | bit) == r:
                out |= bit
        return out

    def is_flat_mask(self, mask: int) -> bool:
        return self.closure_of(mask) == mask

    # -- flats ------------------------------------------------------------------

    @cached_property
    def flats_by_rank(self) -> tuple[tuple[int, ...], ...]:
        """Flats grouped by rank, found by sweeping covers upward from cl(empty)."""
        level = {self.closure_of(0)}
        out = []
        while level:
            out.append(tuple(sorted(level)))
            nxt = set()
            for f in level:
                rest = self.full & ~f
                while rest:
                    low = rest & -rest
                    rest ^= low
                    nxt.add(self.closure_of(f | low))
            level = nxt
        return tuple(out)

    @cached_property
    def all_flats(self) -> tuple[int, ...]:
        return tuple(f for lvl in self.flats_by_rank for f in lvl)

    @cached_property
    def flat_set(self) -> frozenset[int]:
        return frozenset(self.all_flats)

    def flats_of_corank(self, k: int) -> tuple[int, ...]:
        r = self.rank - k
        if r < 0 or r >= len(self.flats_by_rank):
            return ()
        return self.flats_by_rank[r]

    @cached_property
    def hyperplanes(self) -> tuple[int, ...]:
        return self.flats_of_corank(1) if self.rank >= 1 else ()

    @cached_property
    def hyperplane_index(self) -> dict[int, int]:
        return {h: i for i, h in enumerate(self.hyperplanes)}

    @cached_property
    def corank2_flats(self) -> tuple[int, ...]:
        return self.flats_of_corank(2) if self.rank >= 2 else ()

    @cached_property
    def hyperplanes_over(self) -> dict[int, tuple[int, ...]]:
        """Corank-2 flat -> indices of the hyperplanes containing it."""
        out = {}
        for f in self.corank2_flats:
            out[f] = tuple(i for i, h in enumerate(self.hyperplanes) if h & f == f)
        return out

    @cached_property
    def modular_triples(self) -> tuple[tuple[int, int, int, int], ...]:
        """All (i, j, k, F) with hyperplane indices i<j<k forming a modular triple
        over the corank-2 flat F. Any three distinct hyperplanes through a
        corank-2 flat pairwise meet in exactly that flat."""
        out = []
        for f, hs in self.hyperplanes_over.items():
            for i, j, k in combinations(hs, 3):
                out.append((i, j, k, f))
        return tuple(out)

    @cached_property
    def modular_pairs(self) -> tuple[tuple[int, int], ...]:
        out = set()
        for hs in self.hyperplanes_over.values():
            out.update(combinations(hs, 2))
        return tuple(sorted(out))

    # -- circuits ---------------------------------------------------------------

    @cached_property
    def circuits(self) -> tuple[int, ...]:
        """Union of fundamental circuits over all bases (this is every circuit)."""
        bs = self.basis_set
        out = set()
        for b in self.bases:
            rest = self.full & ~b
            for e in bits(rest):
                c = 1 << e
                for x in bits(b):
                    if (b & ~(1 << x)) | (1 << e) in bs:
                        c |= 1 << x
                out.add(c)
        return tuple(sorted(out, key=lambda c: (popcount(c), c)))

    def is_independent_mask(self, mask: int) -> bool:
        return self.rank_of(mask) == popcount(mask)


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------

def _check_labels(labels) -> tuple[str, ...]:
    labels = tuple(str(x) for x in labels)
    if len(labels) > MAX_ELEMENTS:
        raise GroundSetTooLarge(f"{len(labels)} elements exceeds the {MAX_ELEMENTS}-element cap")
    if len(set(labels)) != len(labels):
        dup = sorted({x for x in labels if labels.count(x) > 1})
        raise DuplicateLabel(f"duplicate labels {dup}")
    return labels


def matroid_from_bases(ground, bases, name: str = "", *, check: bool = True,
                       provenance=None) -> Matroid:
    """Validate a basis family and return the canonical Matroid.

    ``bases`` may hold label iterables or int masks. With ``check`` the basis
    exchange axiom is verified exhaustively.
    """
    labels = _check_labels(ground)
    index = {lab: i for i, lab in enumerate(labels)}
    masks = set()
    for b in bases:
        if isinstance(b, (int, np.integer)):
            m = int(b)
            if m & ~full(len(labels)):
                raise ElementNotInGround(f"basis mask {m:#x} outside ground set")
        else:
            if isinstance(b, str):
                b = [b]
            m = 0
            for lab in b:
                if lab not in index:
                    raise ElementNotInGround(f"{lab!r} is not in the ground set")
                m |= 1 << index[lab]
        masks.add(m)
    if not masks:
        raise EmptyBasisFamily("basis family is empty")
    sizes = {popcount(m) for m in masks}
    if len(sizes) != 1:
        raise UnequalCardinality(f"bases have sizes {sorted(sizes)}")
    ordered = tuple(sorted(masks))
    if check:
        bad = _kernels.exchange_violation(np.array(ordered, dtype=np.uint64), len(labels))
        if bad is not None:
            i, j, x = bad
            b1, b2 = ordered[i], ordered[j]
            w = ([labels[t] for t in bits(b1)], [labels[t] for t in bits(b2)], labels[x])
            raise ExchangeAxiomViolated(
                f"no exchange for B1={w[0]}, B2={w[1]}, x={w[2]!r}", witness=w)
    return Matroid(labels, ordered, name, provenance)


def matroid_from_circuits(ground, circuits, name: str = "", provenance=None) -> Matroid:
    """Matroid whose independent sets avoid every given circuit mask.

    The circuit family is checked afterwards by the caller if needed; bases
    are the maximum-size circuit-free sets.
    """
    labels = _check_labels(ground)
    n = len(labels)
    circ = np.array(sorted(set(int(c) for c in circuits)), dtype=np.uint64)
    # greedy gives the rank when the family really is a circuit family
    ind = 0
    for e in range(n):
        trial = ind | (1 << e)
        if all((trial & int(c)) != int(c) for c in circ):
            ind = trial
    r = popcount(ind)
    cands = k_subsets(n, r)
    keep = _kernels.circuit_free(cands, circ) if len(circ) else np.ones(len(cands), bool)
    return matroid_from_bases(labels, [int(c) for c in cands[keep]], name,
                              provenance=provenance)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def rank(m: Matroid, s) -> int:
    return m.rank_of(m.mask(s))


def closure(m: Matroid, s) -> Flat:
    c = m.closure_of(m.mask(s))
    r = m.rank_of(c)
    return Flat(c, r, m.rank - r)


def flats_by_corank(m: Matroid, k: int, method: str = "lattice") -> set[Flat]:
    """All flats of rank ``rank(m) - k``.

    ``method="powerset"`` scans every subset with an independent brute-force
    rank; it is the cross-check oracle for small ground sets.
    """
    if not 0 <= k <= m.rank:
        raise CorankOutOfRange(f"corank {k} outside 0..{m.rank}")
    if method == "lattice":
        masks = m.flats_of_corank(k)
    elif method == "powerset":
        masks = [s for s in flats_powerset(m) if brute_rank(m, s) == m.rank - k]
    else:
        raise ValueError(f"unknown method {method!r}")
    return {Flat(f, m.rank - k, k) for f in masks}


def brute_rank(m: Matroid, s: int) -> int:
    """max |B & s| over bases, without caches or kernels."""
    return max(bin(b & s).count("1") for b in m.bases)


def flats_powerset(m: Matroid) -> list[int]:
    """Every closed subset, by scanning the powerset with ``brute_rank``."""
    out = []
    for s in range(1 << m.n):
        r = brute_rank(m, s)
        closed = True
        for e in range(m.n):
            if not s >> e & 1 and brute_rank(m, s | 1 << e) == r:
                closed = False
                break
        if closed:
            out.append(s)
    return out


def is_modular_flat(m: Matroid, t) -> bool:
    tm = m.mask(t)
    if not m.is_flat_mask(tm):
        raise NotAFlat(f"{m.labels_of(tm)} is not a flat")
    rt = m.rank_of(tm)
    return all(rt + m.rank_of(f) == m.rank_of(tm & f) + m.rank_of(tm | f) for f in m.all_flats)


def _hyperplane_mask(m: Matroid, h) -> int:
    hm = m.mask(h)
    if hm not in m.hyperplane_index:
        raise NotAHyperplane(f"{m.labels_of(hm)} is not a hyperplane")
    return hm


def is_modular_triple(m: Matroid, h1, h2, h3) -> bool:
    a, b, c = (_hyperplane_mask(m, h) for h in (h1, h2, h3))
    f = a & b & c
    if m.rank_of(f) != m.rank - 2 or not m.is_flat_mask(f):
        return False
    return a & b == f and a & c == f and b & c == f


def is_modular_pair(m: Matroid, h1, h2) -> bool:
    a, b = _hyperplane_mask(m, h1), _hyperplane_mask(m, h2)
    return a != b and m.rank_of(a & b) == m.rank - 2


def hyperplanes_containing(m: Matroid, f) -> list[Flat]:
    fm = m.mask(f)
    return [Flat(h, m.rank - 1, 1) for h in m.hyperplanes if h & fm == fm]


def circuits(m: Matroid) -> set[frozenset[str]]:
    return {frozenset(m.labels_of(c)) for c in m.circuits}


def is_coindependent(m: Matroid, x) -> bool:
    xm = m.mask(x)
    return m.rank_of(m.full & ~xm) == m.rank


def dual(m: Matroid) -> Matroid:
    f = m.full
    name = f"{m.name}*" if m.name else ""
    return Matroid(m.labels, tuple(sorted(f & ~b for b in m.bases)), name)


def _compress(mask: int, keep: list[int]) -> int:
    out = 0
    for new, old in enumerate(keep):
        if mask >> old & 1:
            out |= 1 << new
    return out


def delete(m: Matroid, s) -> Matroid:
    sm = m.mask(s)
    keep = [i for i in range(m.n) if not sm >> i & 1]
    cut = [b & ~sm for b in m.bases]
    best = max(popcount(b) for b in cut)
    bases = {_compress(b, keep) for b in cut if popcount(b) == best}
    return Matroid(tuple(m.labels[i] for i in keep), tuple(sorted(bases)), "")


def restrict(m: Matroid, s) -> Matroid:
    return delete(m, m.full & ~m.mask(s))


def contract(m: Matroid, s) -> Matroid:
    return dual(delete(dual(m), s))


def relabel(m: Matroid, mapping: dict[str, str], name: str | None = None) -> Matroid:
    labels = _check_labels(mapping.get(x, x) for x in m.labels)
    return Matroid(labels, m.bases, m.name if name is None else name)


def reorder(m: Matroid, labels) -> Matroid:
    """Same matroid with the ground set listed in a different order."""
    labels = tuple(labels)
    if sorted(labels) != sorted(m.labels):
        raise ElementNotInGround("reorder needs a permutation of the ground set")
    pos = [m.index[x] for x in labels]
    bases = tuple(sorted(_compress(b, pos) for b in m.bases))
    return Matroid(labels, bases, m.name)


def loops(m: Matroid) -> int:
    return m.closure_of(0)


def coloops(m: Matroid) -> int:
    out = m.full
    for b in m.bases:
        out &= b
    return out


def _parallel_classes(m: Matroid) -> list[list[int]]:
    lp = loops(m)
    seen = 0
    classes = []
    for e in range(m.n):
        if lp >> e & 1 or seen >> e & 1:
            continue
        cls = [f for f in range(e, m.n)
               if not lp >> f & 1 and m.rank_of((1 << e) | (1 << f)) == 1]
        for f in cls:
            seen |= 1 << f
        classes.append(cls)
    return classes


def simplify(m: Matroid) -> tuple[Matroid, dict[str, str | None]]:
    """Drop loops, keep the first element of each parallel class.

    The map sends each element to its representative (loops to ``None``).
    """
    classes = _parallel_classes(m)
    emap: dict[str, str | None] = {lab: None for lab in m.labels}
    reps = 0
    for cls in classes:
        reps |= 1 << cls[0]
        for f in cls:
            emap[m.labels[f]] = m.labels[cls[0]]
    return restrict(m, reps), emap


def cosimplify(m: Matroid) -> tuple[Matroid, dict[str, str | None]]:
    s, emap = simplify(dual(m))
    return dual(s), emap


def is_simple(m: Matroid) -> bool:
    return loops(m) == 0 and all(len(c) == 1 for c in _parallel_classes(m))


def components(m: Matroid) -> list[frozenset[str]]:
    parent = list(range(m.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in m.circuits:
        idx = bits(c)
        for a in idx[1:]:
            ra, rb = find(idx[0]), find(a)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for e in range(m.n):
        groups.setdefault(find(e), []).append(e)
    return [frozenset(m.labels[i] for i in g) for _, g in sorted(groups.items())]


# ---------------------------------------------------------------------------
# isomorphism
# ---------------------------------------------------------------------------

def _element_invariants(m: Matroid) -> list[tuple]:
    inv = []
    for e in range(m.n):
        bit = 1 << e
        nb = sum(1 for b in m.bases if b & bit)
        nh = sum(1 for h in m.hyperplanes if h & bit)
        cs = tuple(sorted(popcount(c) for c in m.circuits if c & bit))
        inv.append((nb, nh, cs))
    return inv


def are_isomorphic(m1: Matroid, m2: Matroid) -> dict[str, str] | None:
    """Lexicographically least basis-preserving bijection ``m1 -> m2``, or None.

    Elements of m1 are mapped in ground order; candidate images are tried in
    m2's ground order after filtering by per-element invariants (bases,
    hyperplanes and circuit sizes through the element). Partial maps are
    pruned by requiring circuits inside the mapped part to correspond.
    """
    if m1.n != m2.n or m1.rank != m2.rank or len(m1.bases) != len(m2.bases):
        return None
    if len(m1.circuits) != len(m2.circuits):
        return None
    n = m1.n
    inv1, inv2 = _element_invariants(m1), _element_invariants(m2)
    if sorted(inv1) != sorted(inv2):
        return None
    cands = [[j for j in range(n) if inv2[j] == inv1[i]] for i in range(n)]
    c2set = set(m2.circuits)
    c1set = set(m1.circuits)
    by_elem1 = [[c for c in m1.circuits if c >> i & 1] for i in range(n)]
    by_elem2 = [[c for c in m2.circuits if c >> j & 1] for j in range(n)]
    phi = [-1] * n
    inv_phi = [-1] * n

    def image(c):
        out = 0
        for t in bits(c):
            out |= 1 << phi[t]
        return out

    def preimage(c):
        out = 0
        for t in bits(c):
            out |= 1 << inv_phi[t]
        return out

    def extend(i, dom, img):
        if i == n:
            return True
        for j in cands[i]:
            if inv_phi[j] >= 0:
                continue
            phi[i], inv_phi[j] = j, i
            d2, g2 = dom | 1 << i, img | 1 << j
            ok = all(image(c) in c2set for c in by_elem1[i] if c & ~d2 == 0)
            if ok:
                ok = all(preimage(c) in c1set for c in by_elem2[j] if c & ~g2 == 0)
            if ok and extend(i + 1, d2, g2):
                return True
            phi[i], inv_phi[j] = -1, -1
        return False

    if not extend(0, 0, 0):
        return None
    return {m1.labels[i]: m2.labels[phi[i]] for i in range(n)}


def is_isomorphism_map(m1: Matroid, m2: Matroid, mapping: dict[str, str]) -> bool:
    """Check that ``mapping`` carries the bases of m1 exactly onto those of m2."""
    if sorted(mapping) != sorted(m1.labels) or sorted(mapping.values()) != sorted(m2.labels):
        return False
    pos = [m2.index[mapping[x]] for x in m1.labels]
    img = {from_indices(pos[i] for i in bits(b)) for b in m1.bases}
    return img == m2.basis_set


def brute_isomorphic(m1: Matroid, m2: Matroid) -> bool:
    """Permutation scan; only for tiny ground sets (oracle)."""
    if m1.n != m2.n:
        return False
    for perm in permutations(range(m1.n)):
        img = {from_indices(perm[i] for i in bits(b)) for b in m1.bases}
        if img == m2.basis_set:
            return True
    return False
