"""Finite pastures: unit group tables, the zero element, epsilon and a fully
expanded null set, plus morphism enumeration.

Elements are coded as small ints: 0 is zero and 1..k are the units, with
code 1 always the identity. Lookups in the hot search loops go through the
``mul``, ``inv`` and ``null`` arrays directly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from itertools import permutations, product

import numpy as np

from .errors import (
    NotAGroup,
    NotPrimePower,
    P1Violated,
    P2ClosureContradiction,
    P3Missing,
    P3NotUnique,
    SourceTargetMismatch,
    UnknownName,
)

ZERO = "0"


@dataclass(frozen=True, eq=False)
class Pasture:
    name: str
    units: tuple[str, ...]
    mul: np.ndarray      # (k+1, k+1) over codes, row/col 0 is zero
    inv: np.ndarray      # (k+1,), inv[0] = 0
    eps: int
    null: np.ndarray     # (k+1, k+1, k+1) bool, closed under permutation and scaling

    def __eq__(self, other):
        if not isinstance(other, Pasture):
            return NotImplemented
        return (self.units == other.units and np.array_equal(self.mul, other.mul)
                and np.array_equal(self.null, other.null))

    def __hash__(self):
        return hash((self.units, self.null.tobytes()))

    def __repr__(self):
        return f"Pasture({self.name!r}, units={list(self.units)}, eps={self.label(self.eps)!r})"

    @property
    def k(self) -> int:
        return len(self.units)

    @property
    def one(self) -> int:
        return 1

    @cached_property
    def _codes(self) -> dict[str, int]:
        d = {lab: i + 1 for i, lab in enumerate(self.units)}
        d[ZERO] = 0
        return d

    def code(self, label: str) -> int:
        try:
            return self._codes[str(label)]
        except KeyError:
            raise KeyError(f"{label!r} is not an element of pasture {self.name!r}") from None

    def label(self, code: int) -> str:
        return ZERO if code == 0 else self.units[code - 1]

    def is_null(self, a: int, b: int, c: int) -> bool:
        return bool(self.null[a, b, c])

    def times(self, a: int, b: int) -> int:
        return int(self.mul[a, b])

    def div(self, a: int, b: int) -> int:
        return int(self.mul[a, self.inv[b]])

    @cached_property
    def null_triples(self) -> tuple[tuple[int, int, int], ...]:
        """Null triples as sorted code tuples (one per unordered triple)."""
        out = set()
        for a, b, c in zip(*np.nonzero(self.null)):
            out.add(tuple(sorted((int(a), int(b), int(c)))))
        return tuple(sorted(out))

    @cached_property
    def unit_order(self) -> tuple[int, ...]:
        """Multiplicative order of each unit code 1..k (index 0 unused)."""
        out = [0]
        for u in range(1, self.k + 1):
            x, n = u, 1
            while x != 1:
                x = int(self.mul[x, u])
                n += 1
            out.append(n)
        return tuple(out)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _closure(gens: set, mul: np.ndarray, k: int) -> set:
    out = set()
    for t in gens:
        for d in range(1, k + 1):
            s = tuple(int(mul[x, d]) for x in t)
            for p in permutations(s):
                out.add(p)
    return out


def validate_pasture(units, mul, null_generators, name: str = "") -> Pasture:
    """Build a Pasture from labels, checking the group and null-set axioms.

    ``mul`` is a list of ``[a, b, ab]`` label triples. ``null_generators`` are label
    triples over units and ``"0"``; they are closed under permutation and
    unit scaling. ``0+0+0`` is always added, since scaling any null triple
    by zero yields it.
    """
    units = tuple(str(u) for u in units)
    k = len(units)
    if k == 0 or len(set(units)) != k or ZERO in units:
        raise NotAGroup("unit labels must be nonempty, distinct and differ from '0'")
    pos = {u: i for i, u in enumerate(units)}
    table = np.full((k, k), -1, dtype=np.int64)
    entries = [tuple(r) for r in mul]
    for ent in entries:
        if len(ent) != 3:
            raise NotAGroup(f"multiplication entry {ent!r} is not a triple")
        a, b, c = (str(x) for x in ent)
        for x in (a, b, c):
            if x not in pos:
                raise NotAGroup(f"multiplication uses unknown unit {x!r}")
        i, j = pos[a], pos[b]
        if table[i, j] >= 0 and table[i, j] != pos[c]:
            raise NotAGroup(f"product {a}*{b} given twice with different values")
        table[i, j] = pos[c]
    if (table < 0).any():
        i, j = np.argwhere(table < 0)[0]
        raise NotAGroup(f"product {units[i]}*{units[j]} missing")
    ident = [e for e in range(k) if all(table[e, x] == x and table[x, e] == x for x in range(k))]
    if not ident:
        raise NotAGroup("no identity element")
    e = ident[0]
    if not np.array_equal(table, table.T):
        raise NotAGroup("multiplication is not commutative")
    for a in range(k):
        if e not in table[a]:
            raise NotAGroup(f"{units[a]!r} has no inverse")
    for a in range(k):
        for b in range(k):
            ab = table[a, b]
            if not np.array_equal(table[ab], table[a][table[b]]):
                raise NotAGroup("multiplication is not associative")

    # recode so that the identity is code 1
    order = [e] + [x for x in range(k) if x != e]
    new_of = {old: new + 1 for new, old in enumerate(order)}
    labels = tuple(units[x] for x in order)
    mt = np.zeros((k + 1, k + 1), dtype=np.int64)
    for a in range(k):
        for b in range(k):
            mt[new_of[a], new_of[b]] = new_of[int(table[a, b])]
    inv = np.zeros(k + 1, dtype=np.int64)
    for a in range(1, k + 1):
        inv[a] = int(np.flatnonzero(mt[a] == 1)[0])

    codes = {lab: i + 1 for i, lab in enumerate(labels)}
    codes[ZERO] = 0
    gens = set()
    for t in null_generators:
        t = tuple(str(x) for x in t)
        if len(t) != 3:
            raise P1Violated(f"null generator {t!r} is not a triple")
        for x in t:
            if x not in codes:
                raise P1Violated(f"null generator uses unknown element {x!r}")
        gens.add(tuple(codes[x] for x in t))

    def p1_bad(ts):
        return [t for t in ts if sorted(t)[:2] == [0, 0] and max(t) != 0]

    def eps_candidates(ts):
        out = set()
        for t in ts:
            s = list(t)
            if 0 in s and 1 in s:
                s.remove(0)
                s.remove(1)
                if s[0] != 0:
                    out.add(s[0])
        return out

    given_expanded = {p for t in gens for p in permutations(t)}
    bad = p1_bad(given_expanded)
    if bad:
        raise P1Violated(f"{[labels[x - 1] if x else ZERO for x in bad[0]]} is null")
    given_eps = eps_candidates(given_expanded)
    if len(given_eps) > 1:
        raise P3NotUnique(f"several units x with 1+x+0 null: {sorted(labels[x - 1] for x in given_eps)}")

    closed = _closure(gens, mt, k)
    closed.add((0, 0, 0))
    if p1_bad(closed):
        raise P2ClosureContradiction("scaling closure makes a+0+0 null for a unit a")
    eps_set = eps_candidates(closed)
    if not eps_set:
        raise P3Missing("no unit x with 1+x+0 null")
    if len(eps_set) > 1:
        raise P2ClosureContradiction(
            f"scaling closure yields several epsilons {sorted(labels[x - 1] for x in eps_set)}")
    eps = eps_set.pop()
    null = np.zeros((k + 1,) * 3, dtype=np.bool_)
    for a, b, c in closed:
        null[a, b, c] = True
    p = Pasture(name, labels, mt, inv, int(eps), null)
    _check_derived_rule(p)
    return p


def _check_derived_rule(p: Pasture) -> None:
    for a in range(1, p.k + 1):
        for b in range(1, p.k + 1):
            if bool(p.null[a, b, 0]) != (b == p.times(p.eps, a)):
                raise P2ClosureContradiction(
                    f"{p.label(a)}+{p.label(b)}+0 null status contradicts b = eps*a")


def derived_rule_holds(p: Pasture) -> bool:
    try:
        _check_derived_rule(p)
    except P2ClosureContradiction:
        return False
    return True


# ---------------------------------------------------------------------------
# built-ins
# ---------------------------------------------------------------------------

def _cyclic_table(labels):
    n = len(labels)
    return [[labels[i], labels[j], labels[(i + j) % n]] for i in range(n) for j in range(n)]


# (p, r) means x^d = r0 + r1 x + ... with d = len(r): x^2 = x + 1 over GF(2),
# x^3 = x + 1 over GF(2), x^2 = -1 over GF(3)
_IRREDUCIBLE = {4: (2, (1, 1)), 8: (2, (1, 1, 0)), 9: (3, (2, 0))}


def _prime_power(q: int):
    if q < 2:
        return None
    for p in range(2, q + 1):
        if q % p == 0:
            d, r = 0, q
            while r % p == 0:
                r //= p
                d += 1
            return (p, d) if r == 1 else None
    return None


def field_tables(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Addition and multiplication tables of GF(q) on 0..q-1.

    Element ``v`` has base-p digits as polynomial coefficients in the
    adjoined root (for prime q this is plain integers mod q).
    """
    pp = _prime_power(q)
    if pp is None:
        raise NotPrimePower(f"{q} is not a prime power")
    p, d = pp
    if d == 1:
        a = np.arange(q)
        return (a[:, None] + a[None, :]) % q, (a[:, None] * a[None, :]) % q
    if q not in _IRREDUCIBLE:
        raise UnknownName(f"GF({q}) is not built in")
    _, red = _IRREDUCIBLE[q]

    def digits(v):
        return [(v // p ** i) % p for i in range(d)]

    def value(ds):
        return sum(c * p ** i for i, c in enumerate(ds))

    def polymul(u, v):
        prod_ = [0] * (2 * d - 1)
        for i, x in enumerate(u):
            for j, y in enumerate(v):
                prod_[i + j] = (prod_[i + j] + x * y) % p
        for t in range(2 * d - 2, d - 1, -1):
            c = prod_[t]
            if c:
                prod_[t] = 0
                for i, r in enumerate(red):
                    prod_[t - d + i] = (prod_[t - d + i] + c * r) % p
        return prod_[:d]

    add = np.zeros((q, q), dtype=np.int64)
    mul = np.zeros((q, q), dtype=np.int64)
    for u in range(q):
        for v in range(q):
            du, dv = digits(u), digits(v)
            add[u, v] = value([(x + y) % p for x, y in zip(du, dv)])
            mul[u, v] = value(polymul(du, dv))
    return add, mul


def _gf(q: int) -> Pasture:
    add, mul = field_tables(q)
    pp = _prime_power(q)
    if pp[1] == 1:
        elems = list(range(1, q))
        labels = [str(v) for v in elems]
    else:
        # powers of the least primitive element
        gen = None
        for g in range(2, q):
            x, seen = 1, set()
            for _ in range(q - 1):
                x = int(mul[x, g])
                seen.add(x)
            if len(seen) == q - 1:
                gen = g
                break
        elems = [1]
        for _ in range(q - 2):
            elems.append(int(mul[elems[-1], gen]))
        labels = ["1", "w"] + [f"w^{i}" for i in range(2, q - 1)]
    lab = {v: labels[i] for i, v in enumerate(elems)}
    lab[0] = ZERO
    table = [[lab[a], lab[b], lab[int(mul[a, b])]] for a in elems for b in elems]
    nulls = [(lab[a], lab[b], lab[c]) for a in range(q) for b in range(q) for c in range(q)
             if add[int(add[a, b]), c] == 0]
    return validate_pasture(labels, table, nulls, name=f"gf{q}")


def builtin(name: str) -> Pasture:
    """Named pastures: f1pm, krasner, sign and gf(q) for prime powers q <= 9."""
    key = name.strip().lower().replace(" ", "")
    if key in ("f1pm", "f1+-", "f1±", "regular"):
        return validate_pasture(["1", "-1"], _cyclic_table(["1", "-1"]),
                                [("1", "-1", "0")], name="f1pm")
    if key in ("krasner", "k"):
        return validate_pasture(["1"], [["1", "1", "1"]],
                                [("1", "1", "0"), ("1", "1", "1")], name="krasner")
    if key in ("sign", "s"):
        return validate_pasture(["1", "-1"], _cyclic_table(["1", "-1"]),
                                [("1", "-1", "0"), ("1", "1", "-1"), ("1", "-1", "-1")],
                                name="sign")
    m = re.fullmatch(r"gf[(_]?(\d+)\)?|f(\d+)", key)
    if m:
        q = int(m.group(1) or m.group(2))
        if _prime_power(q) is None:
            raise NotPrimePower(f"{q} is not a prime power")
        if q > 9:
            raise UnknownName(f"gf({q}) is not built in (q must be at most 9)")
        return _gf(q)
    raise UnknownName(f"unknown pasture {name!r}")


BUILTIN_NAMES = ("f1pm", "krasner", "sign", "gf2", "gf3", "gf4", "gf5", "gf7", "gf8", "gf9")


def all_builtins() -> list[Pasture]:
    return [builtin(n) for n in BUILTIN_NAMES]


# ---------------------------------------------------------------------------
# morphisms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PastureMorphism:
    source: Pasture
    target: Pasture
    unit_map: tuple[int, ...]   # code map; entry 0 is 0, entry 1 is 1

    def __call__(self, code: int) -> int:
        return self.unit_map[code]

    def as_labels(self) -> dict[str, str]:
        return {self.source.label(c): self.target.label(self.unit_map[c])
                for c in range(1, self.source.k + 1)}

    @cached_property
    def lut(self) -> np.ndarray:
        return np.array(self.unit_map, dtype=np.int64)


def _generators(p: Pasture) -> list[int]:
    gens, span = [], {1}
    for u in range(1, p.k + 1):
        if u in span:
            continue
        gens.append(u)
        frontier = list(span)
        span = set(span)
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = int(p.mul[x, g])
                if y not in span:
                    span.add(y)
                    frontier.append(y)
    return gens


def preserves_nulls(src: Pasture, tgt: Pasture, unit_map) -> bool:
    f = unit_map
    return all(tgt.null[f[a], f[b], f[c]] for a, b, c in src.null_triples)


def is_homomorphism(src: Pasture, tgt: Pasture, unit_map) -> bool:
    f = unit_map
    if f[0] != 0 or f[1] != 1:
        return False
    for a in range(1, src.k + 1):
        for b in range(1, src.k + 1):
            if f[int(src.mul[a, b])] != int(tgt.mul[f[a], f[b]]):
                return False
    return True


def all_morphisms(p: Pasture, q: Pasture) -> list[PastureMorphism]:
    """Every pasture morphism ``p -> q``, sorted by unit map.

    Candidate group maps come from choosing images of a generating set of
    the unit group; inconsistent choices and maps that do not preserve the
    null set are dropped.
    """
    gens = _generators(p)
    out = set()
    for imgs in product(range(1, q.k + 1), repeat=len(gens)):
        f = [0] * (p.k + 1)
        f[1] = 1
        frontier = [1]
        ok = True
        while frontier and ok:
            x = frontier.pop()
            for g, ig in zip(gens, imgs):
                y, fy = int(p.mul[x, g]), int(q.mul[f[x], ig])
                if f[y] == 0:
                    f[y] = fy
                    frontier.append(y)
                elif f[y] != fy:
                    ok = False
                    break
        if ok and is_homomorphism(p, q, f) and preserves_nulls(p, q, f):
            out.add(tuple(f))
    return [PastureMorphism(p, q, f) for f in sorted(out)]


def identity_morphism(p: Pasture) -> PastureMorphism:
    return PastureMorphism(p, p, tuple(range(p.k + 1)))


def compose(g: PastureMorphism, f: PastureMorphism) -> PastureMorphism:
    """``g o f``."""
    if f.target != g.source:
        raise SourceTargetMismatch("cannot compose: target of f is not the source of g")
    return PastureMorphism(f.source, g.target, tuple(g.unit_map[x] for x in f.unit_map))


def is_isomorphism(f: PastureMorphism) -> bool:
    m = f.unit_map
    if f.source.k != f.target.k or len(set(m[1:])) != f.source.k:
        return False
    inverse = [0] * (f.target.k + 1)
    for a in range(1, f.source.k + 1):
        inverse[m[a]] = a
    return preserves_nulls(f.target, f.source, inverse)


def check_surjective_endo(p: Pasture, f: PastureMorphism) -> bool:
    if f.source != p or f.target != p:
        raise SourceTargetMismatch("expected an endomorphism of the given pasture")
    return is_isomorphism(f)
