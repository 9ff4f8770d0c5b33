"""Gluing constructions: direct sum, generalized parallel connection, 2-sum,
the matroids Theta_n and segment-cosegment exchange.

Every construction validates its output. Generalized parallel connections
are built from their flat family and carry a :class:`GpcInfo` in
``provenance`` so representations can later be restricted to each side.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import _kernels
from .bits import bits, k_subsets, popcount
from .errors import (
    BasepointLoopOrColoop,
    CircuitAxiomViolated,
    ConstructionError,
    LabelCollision,
    NotAFlat,
    NotCoindependent,
    NotModularInRight,
    RestrictionMismatch,
    RestrictionNotUniform,
    ValidationError,
)
from .matroid import (
    Matroid,
    coloops,
    delete,
    dual,
    is_coindependent,
    is_modular_flat,
    loops,
    matroid_from_bases,
    matroid_from_circuits,
    reorder,
    restrict,
)


@dataclass(frozen=True)
class Gluing:
    left: Matroid
    right: Matroid
    identification: tuple[tuple[str, str], ...]   # (left label, right label) pairs

    def __init__(self, left, right, identification):
        pairs = tuple(identification.items()) if isinstance(identification, dict) \
            else tuple(tuple(p) for p in identification)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "identification", pairs)
        lefts = [a for a, _ in pairs]
        rights = [b for _, b in pairs]
        if len(set(lefts)) != len(lefts) or len(set(rights)) != len(rights):
            raise ValidationError("identification must be injective")
        left.mask(lefts)
        right.mask(rights)

    @property
    def t_left(self) -> int:
        return self.left.mask([a for a, _ in self.identification])

    @property
    def t_right(self) -> int:
        return self.right.mask([b for _, b in self.identification])


@dataclass(frozen=True, eq=False)
class GpcInfo:
    """Where each side sits inside a generalized parallel connection."""
    gluing: Gluing
    left_pos: tuple[int, ...]    # left index -> index in the glued matroid
    right_pos: tuple[int, ...]   # right index -> index in the glued matroid
    e1: int
    e2: int
    t: int

    def to_left(self, mask: int) -> int:
        return sum(1 << i for i, p in enumerate(self.left_pos) if mask >> p & 1)

    def to_right(self, mask: int) -> int:
        return sum(1 << i for i, p in enumerate(self.right_pos) if mask >> p & 1)

    def from_left(self, mask: int) -> int:
        return sum(1 << self.left_pos[i] for i in bits(mask))

    def from_right(self, mask: int) -> int:
        return sum(1 << self.right_pos[i] for i in bits(mask))


@dataclass(frozen=True, eq=False)
class TwoSumInfo:
    m1: Matroid
    m2: Matroid
    p: str
    parallel: Matroid | None    # P_p(m1, m2) when both sides are simple


@dataclass(frozen=True)
class ThetaSpec:
    n: int
    x_labels: tuple[str, ...] = ()
    y_labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("Theta_n needs n >= 2")
        xs = tuple(self.x_labels) or tuple(f"x{i}" for i in range(1, self.n + 1))
        ys = tuple(self.y_labels) or tuple(f"y{i}" for i in range(1, self.n + 1))
        if len(xs) != self.n or len(ys) != self.n:
            raise ValidationError("x_labels and y_labels must have length n")
        if len(set(xs) | set(ys)) != 2 * self.n:
            raise ValidationError("Theta labels must be distinct")
        object.__setattr__(self, "x_labels", xs)
        object.__setattr__(self, "y_labels", ys)


def _merge_labels(left: tuple, extra: list, rename: str | None) -> list[str]:
    taken = set(left)
    out = []
    for lab in extra:
        new = lab
        if new in taken:
            if rename is None:
                raise LabelCollision(f"label {lab!r} occurs on both sides")
            new = rename + lab
            while new in taken:
                new = rename + new
        taken.add(new)
        out.append(new)
    return out


def direct_sum(m1: Matroid, m2: Matroid, rename: str | None = None, name: str = "") -> Matroid:
    labels2 = _merge_labels(m1.labels, list(m2.labels), rename)
    shift = m1.n
    bases = {b1 | (b2 << shift) for b1 in m1.bases for b2 in m2.bases}
    return matroid_from_bases(list(m1.labels) + labels2, bases, name, check=False)


# ---------------------------------------------------------------------------
# generalized parallel connection
# ---------------------------------------------------------------------------

def _flat_pairs(g: Gluing):
    """(A, B) pairs of flats of left/right that agree on T, with ``B``'s
    T-part translated to left indices for the match."""
    left, right = g.left, g.right
    r2l = {right.index[b]: left.index[a] for a, b in g.identification}
    t1, t2 = g.t_left, g.t_right
    by_key: dict[int, list[int]] = {}
    for b in right.all_flats:
        key = sum(1 << r2l[i] for i in bits(b & t2))
        by_key.setdefault(key, []).append(b)
    for a in left.all_flats:
        for b in by_key.get(a & t1, ()):
            yield a, b


def generalized_parallel_connection(g: Gluing, rename: str | None = None, name: str = "",
                                    *, check_flat: bool = True) -> Matroid:
    """P_T(left, right): the matroid whose flats are the sets meeting each side
    in a flat. The result lists left's ground set, then right's elements
    outside T; identified elements keep their left label.

    ``check_flat=False`` skips the flatness and modularity checks on T; it is
    used only for the Theta_2 gluing, where T spans the right side.
    """
    left, right = g.left, g.right
    t1, t2 = g.t_left, g.t_right
    ident = dict(g.identification)
    lr = restrict(left, t1)
    rr = restrict(right, t2)
    to_right = reorder(Matroid(tuple(ident[x] for x in lr.labels), lr.bases), rr.labels)
    if to_right.bases != rr.bases:
        raise RestrictionMismatch("the two restrictions to T differ under the identification")
    if check_flat:
        if not left.is_flat_mask(t1):
            raise NotAFlat(f"{left.labels_of(t1)} is not a flat of the left matroid")
        if not right.is_flat_mask(t2):
            raise NotAFlat(f"{right.labels_of(t2)} is not a flat of the right matroid")
        if not is_modular_flat(right, t2):
            raise NotModularInRight(f"{right.labels_of(t2)} is not modular in the right matroid")

    r2l = {right.index[b]: left.index[a] for a, b in g.identification}
    extra_idx = [i for i in range(right.n) if not t2 >> i & 1]
    extra = _merge_labels(left.labels, [right.labels[i] for i in extra_idx], rename)
    labels = list(left.labels) + extra
    n = len(labels)
    left_pos = tuple(range(left.n))
    rpos = {}
    for i in range(right.n):
        rpos[i] = r2l[i] if t2 >> i & 1 else left.n + extra_idx.index(i)
    right_pos = tuple(rpos[i] for i in range(right.n))

    def lift_right(mask):
        return sum(1 << right_pos[i] for i in bits(mask))

    r_t = left.rank_of(t1)
    flats, ranks = [], []
    for a, b in _flat_pairs(g):
        flats.append(a | lift_right(b))
        ranks.append(left.rank_of(a) + right.rank_of(b) - left.rank_of(a & t1))
    r = left.rank + right.rank - r_t
    cands = k_subsets(n, r)
    keep = _kernels.independent_filter(cands, np.array(flats, dtype=np.uint64),
                                       np.array(ranks, dtype=np.int64))
    bases = [int(c) for c in cands[keep]]
    e1 = (1 << left.n) - 1
    e2 = lift_right(right.full)
    t = t1
    info = GpcInfo(g, left_pos, right_pos, e1, e2, t)
    m = matroid_from_bases(labels, bases, name, provenance=info)
    expected = dict(zip(flats, ranks))
    if set(m.all_flats) != set(expected):
        raise ConstructionError("flat family of the result differs from the gluing criterion")
    for f, rf in expected.items():
        if m.rank_of(f) != rf:
            raise ConstructionError("flat rank disagrees with the gluing rank formula")
    return m


def gpc(left: Matroid, right: Matroid, identification, **kw) -> Matroid:
    return generalized_parallel_connection(Gluing(left, right, identification), **kw)


# ---------------------------------------------------------------------------
# Theta_n
# ---------------------------------------------------------------------------

def theta(spec: ThetaSpec | int, name: str | None = None) -> Matroid:
    """Theta_n on X then Y, with bases Y, Y - y_i + x_j (i != j) and
    Y - {two y} + {two x}."""
    if isinstance(spec, int):
        spec = ThetaSpec(spec)
    n = spec.n
    x = [1 << i for i in range(n)]
    y = [1 << (n + i) for i in range(n)]
    yall = sum(y)
    bases = {yall}
    for i in range(n):
        for j in range(n):
            if i != j:
                bases.add((yall & ~y[i]) | x[j])
    for yi, yj in combinations(range(n), 2):
        for xi, xj in combinations(range(n), 2):
            bases.add((yall & ~y[yi] & ~y[yj]) | x[xi] | x[xj])
    return matroid_from_bases(list(spec.x_labels) + list(spec.y_labels), bases,
                              name or f"Theta{n}")


def theta_basis_count(n: int) -> int:
    return 1 + n * (n - 1) + (n * (n - 1) // 2) ** 2


def theta_predicted_hyperplanes(n: int) -> dict[str, set[int]]:
    """Hyperplanes of Theta_n by type, as masks over X then Y."""
    x = [1 << i for i in range(n)]
    y = [1 << (n + i) for i in range(n)]
    yall, xall = sum(y), sum(x)
    out = {"1": set(), "2": set(), "3": set()}
    for i in range(n):
        out["1"].add((yall & ~y[i]) | x[i])
    for i, j in combinations(range(n), 2):
        for k in range(n):
            if k not in (i, j):
                out["2"].add((yall & ~y[i] & ~y[j]) | x[k])
    for i, j, k in combinations(range(n), 3):
        out["3"].add((xall | yall) & ~(y[i] | y[j] | y[k]))
    return out


def theta_predicted_corank2(n: int) -> dict[str, set[int]]:
    x = [1 << i for i in range(n)]
    y = [1 << (n + i) for i in range(n)]
    yall, xall = sum(y), sum(x)
    out = {"1": set(), "2": set(), "3": set(), "4": set()}
    for c in combinations(range(n), 4):
        out["1"].add((xall | yall) & ~sum(y[i] for i in c))
    for trio in combinations(range(n), 3):
        rest = yall & ~sum(y[i] for i in trio)
        for l in range(n):
            if l not in trio:
                out["2"].add(rest | x[l])
        for i in trio:
            out["3"].add(rest | x[i])
    for i, j in combinations(range(n), 2):
        out["4"].add(yall & ~(y[i] | y[j]))
    return out


# ---------------------------------------------------------------------------
# predicted flat lists of a generalized parallel connection
# ---------------------------------------------------------------------------

def _pairs_with_data(m: Matroid):
    info: GpcInfo = m.provenance
    if not isinstance(info, GpcInfo):
        raise ValidationError("matroid was not built by generalized_parallel_connection")
    g = info.gluing
    left, right = g.left, g.right
    for a, b in _flat_pairs(g):
        f = a | info.from_right(b)
        yield f, a, b, left, right, g.t_left


def _corank(mat: Matroid, f: int) -> int:
    return mat.rank - mat.rank_of(f)


def predicted_hyperplanes_modular(m: Matroid) -> dict[str, set[int]]:
    """Hyperplanes of P_T(M1, M2) by case, for T modular on both sides."""
    out = {"1": set(), "2": set(), "3": set()}
    for f, a, b, left, right, t in _pairs_with_data(m):
        ca, cb = _corank(left, a), _corank(right, b)
        if ca == 1 and a & t == t and b == right.full:
            out["1"].add(f)
        if cb == 1 and a == left.full:
            out["2"].add(f)
        if ca == 1 and cb == 1 and a & t != t:
            out["3"].add(f)
    return out


def predicted_corank2_modular(m: Matroid) -> dict[str, set[int]]:
    out = {str(i): set() for i in range(1, 5)}
    for f, a, b, left, right, t in _pairs_with_data(m):
        ca, cb = _corank(left, a), _corank(right, b)
        drop = left.rank_of(t) - left.rank_of(a & t)
        if a & t == t:
            if (a == left.full and cb == 2) or (b == right.full and ca == 2):
                out["1"].add(f)
            if ca == 1 and cb == 1:
                out["2"].add(f)
        if drop == 1 and {ca, cb} == {1, 2}:
            out["3"].add(f)
        if drop == 2 and ca == 2 and cb == 2:
            out["4"].add(f)
    return out


def predicted_hyperplanes_rank2(m: Matroid) -> dict[str, set[int]]:
    """Hyperplanes of P_X(M1, M2) by case, for M2|X a line and X modular in M2."""
    out = {str(i): set() for i in range(1, 5)}
    for f, a, b, left, right, x in _pairs_with_data(m):
        ca, cb = _corank(left, a), _corank(right, b)
        meet = popcount(a & x)
        if a == left.full and cb == 1 and a & x == x:
            out["1"].add(f)
        if b == right.full and ca == 1 and a & x == x:
            out["2"].add(f)
        if ca == 1 and cb == 1 and meet == 1:
            out["3"].add(f)
        if ca == 1 and cb == 2 and meet == 0:
            out["4"].add(f)
    return out


def predicted_corank2_rank2(m: Matroid) -> dict[str, set[int]]:
    out = {str(i): set() for i in range(1, 8)}
    for f, a, b, left, right, x in _pairs_with_data(m):
        ca, cb = _corank(left, a), _corank(right, b)
        meet = popcount(a & x)
        full_x = a & x == x
        if a == left.full and cb == 2 and full_x:
            out["1"].add(f)
        if b == right.full and ca == 2 and full_x:
            out["2"].add(f)
        if ca == 1 and cb == 1 and full_x:
            out["3"].add(f)
        if meet == 1 and ca == 1 and cb == 2:
            out["4"].add(f)
        if meet == 1 and ca == 2 and cb == 1:
            out["5"].add(f)
        if meet == 0 and ca == 1 and cb == 3:
            out["6"].add(f)
        if meet == 0 and ca == 2 and cb == 2:
            out["7"].add(f)
    return out


def union_of_cases(cases: dict[str, set[int]]) -> set[int]:
    out = set()
    for s in cases.values():
        out |= s
    return out


# ---------------------------------------------------------------------------
# 2-sum
# ---------------------------------------------------------------------------

def two_sum(m1: Matroid, m2: Matroid, p: str, rename: str | None = None,
            name: str = "") -> Matroid:
    """M1 (+)_p M2 on (E1 - p) then (E2 - p), built from its circuits."""
    for side, m in (("first", m1), ("second", m2)):
        if p not in m.index:
            raise ValidationError(f"basepoint {p!r} missing from the {side} matroid")
        pb = 1 << m.index[p]
        if loops(m) & pb or coloops(m) & pb:
            raise BasepointLoopOrColoop(f"{p!r} is a loop or coloop of the {side} matroid")
    i1, i2 = m1.index[p], m2.index[p]
    keep1 = [i for i in range(m1.n) if i != i1]
    keep2 = [i for i in range(m2.n) if i != i2]
    extra = _merge_labels(tuple(m1.labels[i] for i in keep1),
                          [m2.labels[i] for i in keep2], rename)
    labels = [m1.labels[i] for i in keep1] + extra
    pos1 = {old: new for new, old in enumerate(keep1)}
    pos2 = {old: len(keep1) + new for new, old in enumerate(keep2)}

    def lift(c, pos, skip):
        return sum(1 << pos[i] for i in bits(c) if i != skip)

    fam = set()
    with1, with2 = [], []
    for c in m1.circuits:
        if c >> i1 & 1:
            with1.append(lift(c, pos1, i1))
        else:
            fam.add(lift(c, pos1, i1))
    for c in m2.circuits:
        if c >> i2 & 1:
            with2.append(lift(c, pos2, i2))
        else:
            fam.add(lift(c, pos2, i2))
    for a in with1:
        for b in with2:
            fam.add(a | b)

    simple = _is_simple(m1) and _is_simple(m2)
    par = gpc(m1, m2, {p: p}, rename=rename) if simple else None
    info = TwoSumInfo(m1, m2, p, par)
    m = matroid_from_circuits(labels, fam, name, provenance=info)
    if set(m.circuits) != fam:
        raise CircuitAxiomViolated("circuit family of the 2-sum is not a matroid circuit family")
    if par is not None:
        cut = delete(par, [p])
        if cut.labels != m.labels or cut.bases != m.bases:
            raise ConstructionError("circuit route and parallel-connection route disagree")
    return m


def _is_simple(m: Matroid) -> bool:
    if loops(m):
        return False
    return all(m.rank_of((1 << a) | (1 << b)) == 2 for a, b in combinations(range(m.n), 2))


# ---------------------------------------------------------------------------
# segment-cosegment exchange
# ---------------------------------------------------------------------------

def _fresh(labels, taken):
    out = []
    for lab in labels:
        while lab in taken:
            lab = lab + "'"
        taken.add(lab)
        out.append(lab)
    return out


def theta_gluing(m: Matroid, x, spec: ThetaSpec | None = None) -> tuple[Gluing, ThetaSpec]:
    """The gluing of Theta_n onto m along X, with Theta's x_i named as the
    elements of X in ground order. Y labels avoid m's labels."""
    xm = m.mask(x)
    xs = m.labels_of(xm)
    n = len(xs)
    if n < 2:
        raise RestrictionNotUniform("X needs at least two elements")
    ys = list(spec.y_labels) if spec is not None else [f"y{i}" for i in range(1, n + 1)]
    if spec is not None and spec.n != n:
        raise ValidationError(f"Theta spec has n={spec.n} but |X|={n}")
    ys = _fresh(ys, set(m.labels) | set(xs))
    tspec = ThetaSpec(n, xs, tuple(ys))
    th = theta(tspec)
    return Gluing(m, th, {a: a for a in xs}), tspec


def check_segment(m: Matroid, x) -> int:
    xm = m.mask(x)
    n = popcount(xm)
    sub = restrict(m, xm)
    if n < 2 or sub.rank != 2 or len(sub.bases) != n * (n - 1) // 2:
        raise RestrictionNotUniform(f"restriction to {m.labels_of(xm)} is not U(2,{n})")
    if not is_coindependent(m, xm):
        raise NotCoindependent(f"{m.labels_of(xm)} is not co-independent")
    if n >= 3 and not m.is_flat_mask(xm):
        raise NotAFlat(f"{m.labels_of(xm)} is not a flat")
    return xm


def parallel_with_theta(m: Matroid, x, spec: ThetaSpec | None = None, name: str = "") -> Matroid:
    """P_X(m, Theta_n)."""
    xm = m.mask(x)
    n = popcount(xm)
    sub = restrict(m, xm)
    if n < 2 or sub.rank != 2 or len(sub.bases) != n * (n - 1) // 2:
        raise RestrictionNotUniform(f"restriction to {m.labels_of(xm)} is not U(2,{n})")
    g, _ = theta_gluing(m, xm, spec)
    return generalized_parallel_connection(g, name=name, check_flat=n >= 3)


def segment_cosegment_exchange(m: Matroid, x, spec: ThetaSpec | None = None,
                               name: str = "") -> Matroid:
    """P_X(m, Theta_n) with X deleted; ground set (E - X) then Y."""
    xm = check_segment(m, x)
    big = parallel_with_theta(m, xm, spec)
    return _renamed(delete(big, m.labels_of(xm)), name)


def _renamed(m: Matroid, name: str) -> Matroid:
    return Matroid(m.labels, m.bases, name, m.provenance)


def delta_wye(m: Matroid, t, name: str = "") -> Matroid:
    if popcount(m.mask(t)) != 3:
        raise RestrictionNotUniform("Delta-Wye needs a triangle")
    return segment_cosegment_exchange(m, t, ThetaSpec(3), name)


def cosegment_segment_exchange(m: Matroid, y, spec: ThetaSpec | None = None,
                               name: str = "") -> Matroid:
    return _renamed(dual(segment_cosegment_exchange(dual(m), y, spec)), name)
