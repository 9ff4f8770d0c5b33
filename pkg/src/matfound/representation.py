"""Representations of matroids over finite pastures as modular systems of
hyperplane functions, their censuses, and the restriction / gluing /
extension maps between systems of glued matroids.

A system stores one row of pasture codes per hyperplane (in the matroid's
sorted hyperplane order) and one column per ground element.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from . import _kernels
from .bits import bits, from_indices, lex_key, popcount
from .constructions import (
    GpcInfo,
    ThetaSpec,
    TwoSumInfo,
    check_segment,
    parallel_with_theta,
    segment_cosegment_exchange,
)
from .errors import (
    ExtensionAmbiguous,
    HarmonizationFailed,
    NMustBeAtLeast3,
    NoAdmissibleH0,
    NoDisjointCorank2Flat,
    NormalizationImpossible,
    NotAFlat,
    NotAGpcMatroid,
    NotModularSystem,
    RepresentationError,
    RestrictionNotUniform,
    SearchBudgetExceeded,
    SupportViolation,
    TRestrictionsNotIsomorphic,
)
from .matroid import Matroid, restrict
from .pasture import Pasture, PastureMorphism, builtin

DEFAULT_BUDGET = 10 ** 8


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HyperplaneSystem:
    matroid: Matroid
    pasture: Pasture
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.int8).reshape(len(self.matroid.hyperplanes),
                                                          self.matroid.n)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __eq__(self, other):
        if not isinstance(other, HyperplaneSystem):
            return NotImplemented
        return (self.matroid == other.matroid and self.pasture == other.pasture
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.matroid, self.values.tobytes()))

    def __repr__(self):
        return (f"HyperplaneSystem({self.matroid.name or self.matroid.n!r} over "
                f"{self.pasture.name}, {len(self.matroid.hyperplanes)} hyperplanes)")

    def key(self) -> bytes:
        return self.values.tobytes()

    def value(self, h: int, e: int) -> int:
        return int(self.values[h, e])

    def function(self, hyperplane) -> dict[str, str]:
        """f_H as a label dict; ``hyperplane`` is a mask, labels or a Flat."""
        h = self.matroid.hyperplane_index[self.matroid.mask(hyperplane)]
        return {lab: self.pasture.label(int(v)) for lab, v in zip(self.matroid.labels,
                                                                   self.values[h])}

    def scaled(self, rows=None, cols=None) -> "HyperplaneSystem":
        """Multiply row h by ``rows[h]`` and column e by ``cols[e]`` (unit codes)."""
        mul = self.pasture.mul
        v = self.values.astype(np.int64)
        if rows is not None:
            v = mul[np.asarray(rows, dtype=np.int64)[:, None], v]
        if cols is not None:
            v = mul[v, np.asarray(cols, dtype=np.int64)[None, :]]
        return HyperplaneSystem(self.matroid, self.pasture, v)


def system_from_functions(m: Matroid, p: Pasture, funcs) -> HyperplaneSystem:
    """Build a system from ``{hyperplane: {element label: value label}}``;
    hyperplanes may be masks or label collections, missing values are 0."""
    vals = np.zeros((len(m.hyperplanes), m.n), dtype=np.int64)
    seen = set()
    for hyp, fn in dict(funcs).items():
        hm = m.mask(hyp)
        if hm not in m.hyperplane_index:
            raise RepresentationError(f"{m.labels_of(hm)} is not a hyperplane")
        h = m.hyperplane_index[hm]
        seen.add(h)
        for lab, val in fn.items():
            vals[h, m.index[lab]] = p.code(val)
    if len(seen) != len(m.hyperplanes):
        raise RepresentationError("every hyperplane needs a function")
    sys = HyperplaneSystem(m, p, vals)
    check_support(sys)
    return sys


def check_support(sys: HyperplaneSystem) -> None:
    m = sys.matroid
    for h, hm in enumerate(m.hyperplanes):
        for e in range(m.n):
            if (sys.values[h, e] == 0) != bool(hm >> e & 1):
                raise SupportViolation(
                    f"f_H({m.labels[e]!r}) has the wrong support for H={list(m.labels_of(hm))}")


def _forced_constants(sys, i, j, k, a, b):
    """c_i, c_k (with c_j = 1) forced by the zero of f_i at a and of f_j at b."""
    p, v = sys.pasture, sys.values
    ck = p.times(p.eps, p.div(int(v[j, a]), int(v[k, a])))
    ci = p.times(p.eps, p.times(ck, p.div(int(v[k, b]), int(v[i, b]))))
    return ci, ck


def modular_failure(sys: HyperplaneSystem):
    """First (triple, element) at which the forced linear dependency fails,
    or None."""
    m, p, v = sys.matroid, sys.pasture, sys.values
    hyps = m.hyperplanes
    for i, j, k, f in m.modular_triples:
        a = (hyps[i] & ~f).bit_length() - 1
        b = (hyps[j] & ~f).bit_length() - 1
        ci, ck = _forced_constants(sys, i, j, k, a, b)
        for e in range(m.n):
            if f >> e & 1:
                continue
            x = p.times(ci, int(v[i, e]))
            z = p.times(ck, int(v[k, e]))
            if not p.null[x, int(v[j, e]), z]:
                return (i, j, k, f), e
    return None


def is_modular_system(sys: HyperplaneSystem):
    """``(ok, witness)``; the witness names the failing triple and element."""
    check_support(sys)
    fail = modular_failure(sys)
    if fail is None:
        return True, None
    (i, j, k, f), e = fail
    m = sys.matroid
    return False, {
        "hyperplanes": [list(m.labels_of(m.hyperplanes[t])) for t in (i, j, k)],
        "flat": list(m.labels_of(f)),
        "element": m.labels[e],
    }


def require_modular(sys: HyperplaneSystem, what: str) -> HyperplaneSystem:
    ok, wit = is_modular_system(sys)
    if not ok:
        raise NotModularSystem(f"{what} is not a modular system", witness=wit)
    return sys


# ---------------------------------------------------------------------------
# canonical forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gauge:
    """A spanning forest of the hyperplane/element support graph.

    Pinning every forest edge to 1 picks exactly one system from each
    rescaling class. ``steps`` replays the forest in BFS order as
    ``(kind, vertex, h, e)`` with kind "h" or "e" for the vertex reached
    through edge (h, e); roots have h = e = -1.
    """
    steps: tuple
    edges: frozenset
    element_components: int


@lru_cache(maxsize=256)
def gauge(m: Matroid) -> Gauge:
    hyps = m.hyperplanes
    seen_e, seen_h = set(), set()
    steps, edges = [], set()
    comps = 0
    for e0 in range(m.n):
        if e0 in seen_e:
            continue
        comps += 1
        seen_e.add(e0)
        steps.append(("e", e0, -1, -1))
        queue = [("e", e0)]
        while queue:
            kind, v = queue.pop(0)
            if kind == "e":
                for h, hm in enumerate(hyps):
                    if h not in seen_h and not hm >> v & 1:
                        seen_h.add(h)
                        steps.append(("h", h, h, v))
                        edges.add((h, v))
                        queue.append(("h", h))
            else:
                for e in range(m.n):
                    if e not in seen_e and not hyps[v] >> e & 1:
                        seen_e.add(e)
                        steps.append(("e", e, v, e))
                        edges.add((v, e))
                        queue.append(("e", e))
    return Gauge(tuple(steps), frozenset(edges), comps)


def canonical_form(sys: HyperplaneSystem):
    """``(canon, rows, cols)`` with canon = rows x cols rescaling of sys and
    every gauge edge equal to 1; canon is the same for the whole rescaling
    class."""
    m, p, v = sys.matroid, sys.pasture, sys.values
    rows = np.ones(len(m.hyperplanes), dtype=np.int64)
    cols = np.ones(m.n, dtype=np.int64)
    for kind, x, h, e in gauge(m).steps:
        if h < 0:
            continue
        if kind == "h":
            rows[x] = p.inv[p.times(int(cols[e]), int(v[h, e]))]
        else:
            cols[x] = p.inv[p.times(int(rows[h]), int(v[h, e]))]
    return sys.scaled(rows, cols), rows, cols


def iso_canonical(sys: HyperplaneSystem) -> HyperplaneSystem:
    """Row-scale so f_H(first element outside H) = 1."""
    m, p = sys.matroid, sys.pasture
    rows = [p.inv[int(sys.values[h, (m.full & ~hm & -(m.full & ~hm)).bit_length() - 1])]
            for h, hm in enumerate(m.hyperplanes)]
    return sys.scaled(np.array(rows, dtype=np.int64).reshape(-1))


def rescaling_equivalent(s1: HyperplaneSystem, s2: HyperplaneSystem) -> bool:
    return canonical_form(s1)[0] == canonical_form(s2)[0]


def isomorphic(s1: HyperplaneSystem, s2: HyperplaneSystem) -> bool:
    return iso_canonical(s1) == iso_canonical(s2)


def pushforward(sys: HyperplaneSystem, phi: PastureMorphism) -> HyperplaneSystem:
    if phi.source != sys.pasture:
        raise RepresentationError("morphism source is not the system's pasture")
    return HyperplaneSystem(sys.matroid, phi.target, phi.lut[sys.values.astype(np.int64)])


# ---------------------------------------------------------------------------
# search plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SearchPlan:
    matroid: Matroid
    hyperplane_order: tuple[int, ...]
    var_cells: np.ndarray           # (nvars, 2): (h, e) per variable
    template: np.ndarray            # (nH, n) with 0 / 1 filled, -1 at variables
    checks: np.ndarray              # (nchecks, 7) refs
    check_ptr: np.ndarray           # (nvars + 1,)
    const_checks: np.ndarray        # (c, 7) refs with no variables

    @property
    def nvars(self) -> int:
        return len(self.var_cells)


def _hyperplane_order(m: Matroid) -> list[int]:
    """Greedy order: start with the hyperplane in most modular triples, then
    repeatedly take the one completing the most triples with those chosen."""
    nh = len(m.hyperplanes)
    if nh == 0:
        return []
    part = [0] * nh
    by_h = [[] for _ in range(nh)]
    for t in m.modular_triples:
        for h in t[:3]:
            part[h] += 1
            by_h[h].append(t[:3])
    chosen: list[int] = []
    inset = [False] * nh
    while len(chosen) < nh:
        best, best_key = -1, None
        for h in range(nh):
            if inset[h]:
                continue
            done = half = 0
            for t in by_h[h]:
                c = sum(inset[x] for x in t if x != h)
                if c == 2:
                    done += 1
                elif c == 1:
                    half += 1
            key = (done, half, part[h], -h)
            if best_key is None or key > best_key:
                best, best_key = h, key
        chosen.append(best)
        inset[best] = True
    return chosen


def build_plan(m: Matroid, pinned) -> SearchPlan:
    """Variables are the support cells not in ``pinned`` (pinned cells hold 1),
    ordered by the greedy hyperplane order then ground order."""
    hyps = m.hyperplanes
    nh, n = len(hyps), m.n
    order = _hyperplane_order(m)
    template = np.zeros((nh, n), dtype=np.int64)
    varidx = np.full((nh, n), -1, dtype=np.int64)
    cells = []
    for h in order:
        for e in range(n):
            if hyps[h] >> e & 1:
                continue
            if (h, e) in pinned:
                template[h, e] = 1
            else:
                template[h, e] = -1
                varidx[h, e] = len(cells)
                cells.append((h, e))

    def ref(h, e):
        if varidx[h, e] >= 0:
            return int(varidx[h, e])
        return -(int(template[h, e]) + 1)

    def pos(r):
        return r if r >= 0 else -1

    by_pos: dict[int, set] = {}
    consts = set()
    for t in m.modular_triples:
        f = t[3]
        best = None
        for i, j, k in ((t[0], t[1], t[2]), (t[0], t[2], t[1]), (t[1], t[0], t[2]),
                        (t[1], t[2], t[0]), (t[2], t[0], t[1]), (t[2], t[1], t[0])):
            a_opts = bits(hyps[i] & ~f)
            b_opts = bits(hyps[j] & ~f)
            a = min(a_opts, key=lambda x: (max(pos(ref(j, x)), pos(ref(k, x))), x))
            b = min(b_opts, key=lambda x: (max(pos(ref(i, x)), pos(ref(k, x))), x))
            cost = max(pos(ref(j, a)), pos(ref(k, a)), pos(ref(i, b)), pos(ref(k, b)))
            if best is None or cost < best[0]:
                best = (cost, i, j, k, a, b)
        _, i, j, k, a, b = best
        for e in range(n):
            if f >> e & 1 or e == a or e == b:
                continue
            refs = (ref(i, b), ref(k, b), ref(j, a), ref(k, a), ref(i, e), ref(j, e), ref(k, e))
            fire = max(pos(r) for r in refs)
            if fire < 0:
                consts.add(refs)
            else:
                by_pos.setdefault(fire, set()).add(refs)
    nvars = len(cells)
    checks, ptr = [], [0]
    for p in range(nvars):
        checks.extend(sorted(by_pos.get(p, ())))
        ptr.append(len(checks))
    return SearchPlan(
        m, tuple(order),
        np.array(cells, dtype=np.int64).reshape(-1, 2),
        template,
        np.array(checks, dtype=np.int64).reshape(-1, 7),
        np.array(ptr, dtype=np.int64),
        np.array(sorted(consts), dtype=np.int64).reshape(-1, 7),
    )


@lru_cache(maxsize=128)
def gauge_plan(m: Matroid) -> SearchPlan:
    return build_plan(m, gauge(m).edges)


@lru_cache(maxsize=128)
def normalized_plan(m: Matroid) -> SearchPlan:
    pinned = set()
    for h, hm in enumerate(m.hyperplanes):
        rest = m.full & ~hm
        pinned.add((h, (rest & -rest).bit_length() - 1))
    return build_plan(m, pinned)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("MF_THREADS", "1")))
    except ValueError:
        return 1


def run_plan(plan: SearchPlan, p: Pasture, budget: int = DEFAULT_BUDGET,
             threads: int | None = None):
    """All assignments of the plan's variables passing every check.

    The tree is split by the value of the first variable; each part runs
    with the full budget and the node counts are summed, so results and
    counts do not depend on ``threads``.
    """
    threads = threads or default_threads()
    mul = np.ascontiguousarray(p.mul, dtype=np.int64)
    inv = np.ascontiguousarray(p.inv, dtype=np.int64)
    null = np.ascontiguousarray(p.null)
    for refs in plan.const_checks:
        v = [-r - 1 for r in refs]
        ck = mul[p.eps, mul[v[2], inv[v[3]]]]
        ci = mul[p.eps, mul[ck, mul[v[1], inv[v[0]]]]]
        if not null[mul[ci, v[4]], v[5], mul[ck, v[6]]]:
            return np.zeros((0, plan.nvars), dtype=np.int8), 0
    if plan.nvars == 0:
        return np.zeros((1, 0), dtype=np.int8), 0

    def task(v):
        cap = 1024
        while True:
            sols, nodes, status = _kernels.search(
                plan.nvars, p.k, mul, inv, p.eps, null, plan.checks, plan.check_ptr,
                np.array([v], dtype=np.int64), cap, budget)
            if status != _kernels.SEARCH_FULL:
                return sols, nodes + 1, status
            cap *= 4

    values = range(1, p.k + 1)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(task, values))
    else:
        results = [task(v) for v in values]
    nodes = sum(r[1] for r in results)
    if any(r[2] == _kernels.SEARCH_BUDGET for r in results) or nodes > budget:
        raise SearchBudgetExceeded(
            f"search on {plan.matroid!r} over {p.name} exceeded {budget} nodes", nodes=nodes)
    sols = np.concatenate([r[0] for r in results]) if results else np.zeros((0, plan.nvars))
    return sols.astype(np.int8), nodes


def _systems_from(plan: SearchPlan, p: Pasture, sols) -> list[HyperplaneSystem]:
    out = []
    cells = plan.var_cells
    for row in sols:
        v = plan.template.copy()
        if len(cells):
            v[cells[:, 0], cells[:, 1]] = row
        out.append(HyperplaneSystem(plan.matroid, p, v))
    return out


# ---------------------------------------------------------------------------
# census
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ClassCensus:
    matroid: Matroid
    pasture: Pasture
    iso_count: int
    rescaling_count: int
    representatives: tuple[HyperplaneSystem, ...]
    nodes: int = 0
    _index: dict = field(default=None, repr=False)

    def index_of(self, sys: HyperplaneSystem) -> int | None:
        """Position of the rescaling class of ``sys`` among the representatives."""
        idx = self._index
        if idx is None:
            idx = {r.key(): i for i, r in enumerate(self.representatives)}
            object.__setattr__(self, "_index", idx)
        return idx.get(canonical_form(sys)[0].key())


def _sort_key(sys: HyperplaneSystem):
    return tuple(sys.values.reshape(-1).tolist())


def iso_per_rescaling(m: Matroid, p: Pasture) -> int:
    """Isomorphism classes in each rescaling class: |P^x|^(|E| - c), with c
    the number of support-graph components containing elements."""
    if m.rank == 0:
        return 1
    return p.k ** (m.n - gauge(m).element_components)


def enumerate_census(m: Matroid, p: Pasture, budget: int = DEFAULT_BUDGET,
                     threads: int | None = None) -> ClassCensus:
    """Rescaling classes of modular systems of ``m`` over ``p``.

    The search runs over gauge-fixed systems (a spanning forest of the
    support graph pinned to 1), so each solution is the canonical form of a
    distinct rescaling class. Isomorphism classes follow from the size of
    the residual element-scaling orbits.
    """
    if m.rank == 0:
        rep = HyperplaneSystem(m, p, np.zeros((0, m.n)))
        return ClassCensus(m, p, 1, 1, (rep,), 0)
    plan = gauge_plan(m)
    sols, nodes = run_plan(plan, p, budget, threads)
    reps = sorted(_systems_from(plan, p, sols), key=_sort_key)
    n = len(reps)
    return ClassCensus(m, p, n * iso_per_rescaling(m, p), n, tuple(reps), nodes)


def census_by_normalization(m: Matroid, p: Pasture, budget: int = DEFAULT_BUDGET,
                            threads: int | None = None) -> ClassCensus:
    """Second route: search isomorphism classes with f_H(first element
    outside H) = 1, then merge them into rescaling classes by canonical form."""
    if m.rank == 0:
        rep = HyperplaneSystem(m, p, np.zeros((0, m.n)))
        return ClassCensus(m, p, 1, 1, (rep,), 0)
    plan = normalized_plan(m)
    sols, nodes = run_plan(plan, p, budget, threads)
    systems = _systems_from(plan, p, sols)
    canon = {}
    for s in systems:
        c = canonical_form(s)[0]
        canon.setdefault(c.key(), c)
    reps = sorted(canon.values(), key=_sort_key)
    return ClassCensus(m, p, len(systems), len(reps), tuple(reps), nodes)


def census_bruteforce(m: Matroid, p: Pasture, limit: int = 2_000_000) -> ClassCensus:
    """Unpruned scan of all row-normalized systems; tiny cases only."""
    if m.rank == 0:
        rep = HyperplaneSystem(m, p, np.zeros((0, m.n)))
        return ClassCensus(m, p, 1, 1, (rep,), 0)
    cells = []
    base = np.zeros((len(m.hyperplanes), m.n), dtype=np.int64)
    for h, hm in enumerate(m.hyperplanes):
        rest = bits(m.full & ~hm)
        base[h, rest[0]] = 1
        cells.extend((h, e) for e in rest[1:])
    if p.k ** len(cells) > limit:
        raise SearchBudgetExceeded("brute-force census too large", nodes=p.k ** len(cells))
    iso = 0
    canon = {}
    for vals in product(range(1, p.k + 1), repeat=len(cells)):
        v = base.copy()
        for (h, e), x in zip(cells, vals):
            v[h, e] = x
        s = HyperplaneSystem(m, p, v)
        if modular_failure(s) is None:
            iso += 1
            c = canonical_form(s)[0]
            canon.setdefault(c.key(), c)
    reps = sorted(canon.values(), key=_sort_key)
    return ClassCensus(m, p, iso, len(reps), tuple(reps), 0)


def is_orientable(m: Matroid, budget: int = DEFAULT_BUDGET, threads: int | None = None) -> bool:
    return enumerate_census(m, builtin("sign"), budget, threads).iso_count > 0


# ---------------------------------------------------------------------------
# restriction
# ---------------------------------------------------------------------------

def pull(sys: HyperplaneSystem, target: Matroid, pos) -> HyperplaneSystem:
    """System on ``target`` whose element i is element ``pos[i]`` of sys.

    Each hyperplane K of target takes the function of the first hyperplane H
    of sys.matroid with H meeting the image exactly in K.
    """
    src = sys.matroid
    pos = list(pos)
    image = from_indices(pos)
    rows = []
    for k in target.hyperplanes:
        ks = sum(1 << pos[i] for i in bits(k))
        h = next((i for i, hm in enumerate(src.hyperplanes) if hm & image == ks), None)
        if h is None:
            raise RepresentationError(
                f"no hyperplane of the source meets {target.labels_of(k)} correctly")
        rows.append(sys.values[h, pos])
    return HyperplaneSystem(target, sys.pasture,
                            np.array(rows, dtype=np.int64).reshape(len(rows), target.n))


def restrict_to(sys: HyperplaneSystem, subset) -> HyperplaneSystem:
    m = sys.matroid
    s = m.mask(subset)
    return pull(sys, restrict(m, s), bits(s))


def _gpc_info(m: Matroid) -> GpcInfo:
    info = m.provenance
    if not isinstance(info, GpcInfo):
        raise NotAGpcMatroid("matroid was not built as a generalized parallel connection")
    return info


def restrict_system(sys: HyperplaneSystem, side: int) -> HyperplaneSystem:
    """Restriction of a system on P_T(M1, M2) to M1 (side 1) or M2 (side 2)."""
    info = _gpc_info(sys.matroid)
    if side == 1:
        return pull(sys, info.gluing.left, info.left_pos)
    if side == 2:
        return pull(sys, info.gluing.right, info.right_pos)
    raise ValueError("side must be 1 or 2")


def _t_positions(info: GpcInfo):
    g = info.gluing
    left, right = g.left, g.right
    ident = dict(g.identification)
    pos_l = bits(g.t_left)
    pos_r = [right.index[ident[left.labels[i]]] for i in pos_l]
    return restrict(left, g.t_left), pos_l, pos_r


def t_restrictions(sys1: HyperplaneSystem, sys2: HyperplaneSystem, info: GpcInfo):
    """Both sides' systems restricted to T, on the same copy of M|T."""
    tm, pos_l, pos_r = _t_positions(info)
    return pull(sys1, tm, pos_l), pull(sys2, tm, pos_r)


# ---------------------------------------------------------------------------
# gluing
# ---------------------------------------------------------------------------

def _proportional(p: Pasture, row, ref):
    """Unit lam with lam*row == ref, or None."""
    nz = np.flatnonzero(ref)
    if len(nz) == 0:
        return 1 if not np.any(row) else None
    lam = p.div(int(ref[nz[0]]), int(row[nz[0]])) if row[nz[0]] else None
    if lam is None:
        return None
    if np.array_equal(p.mul[lam, np.asarray(row, dtype=np.int64)], np.asarray(ref)):
        return lam
    return None


def _harmonize(sys: HyperplaneSystem, pos, tm: Matroid, ref: dict) -> np.ndarray:
    """Row-scale sys so every f_H with H not containing T agrees on T with
    the reference function of the hyperplane H & T of M|T."""
    m, p = sys.matroid, sys.pasture
    image = from_indices(pos)
    v = sys.values.astype(np.int64).copy()
    for h, hm in enumerate(m.hyperplanes):
        if hm & image == image:
            continue
        k = sum(1 << i for i, e in enumerate(pos) if hm >> e & 1)
        lam = _proportional(p, v[h, pos], ref[k])
        if lam is None:
            raise HarmonizationFailed(
                f"f_H for H={list(m.labels_of(hm))} is not proportional to the T-reference")
        v[h] = p.mul[lam, v[h]]
    return v


def glue_gpc(sys1: HyperplaneSystem, sys2: HyperplaneSystem, target) -> HyperplaneSystem:
    """System on P_T(M1, M2) restricting to sys1 and sys2 (up to isomorphism).

    ``target`` is the glued matroid (or a Gluing to build it from). The
    T-restrictions of both inputs must be isomorphic.
    """
    if not isinstance(target, Matroid):
        from .constructions import generalized_parallel_connection
        target = generalized_parallel_connection(target)
    info = _gpc_info(target)
    g = info.gluing
    if sys1.matroid != g.left or sys2.matroid != g.right:
        raise RepresentationError("systems do not live on the glued matroids")
    p = sys1.pasture
    tm, pos_l, pos_r = _t_positions(info)
    st1, st2 = pull(sys1, tm, pos_l), pull(sys2, tm, pos_r)
    ref = {}
    for r, k in enumerate(tm.hyperplanes):
        if _proportional(p, st2.values[r].astype(np.int64), st1.values[r].astype(np.int64)) is None:
            raise TRestrictionsNotIsomorphic(
                f"restrictions to T differ at the T-hyperplane {list(tm.labels_of(k))}")
        ref[k] = st1.values[r].astype(np.int64)
    v1 = _harmonize(sys1, pos_l, tm, ref)
    v2 = _harmonize(sys2, pos_r, tm, ref)
    left, right = g.left, g.right
    lp = np.array(info.left_pos, dtype=np.int64)
    rp = np.array(info.right_pos, dtype=np.int64)
    out = np.zeros((len(target.hyperplanes), target.n), dtype=np.int64)
    for h, hm in enumerate(target.hyperplanes):
        a, b = info.to_left(hm), info.to_right(hm)
        row = np.zeros(target.n, dtype=np.int64)
        if b != right.full:
            row[rp] = v2[right.hyperplane_index[b]]
        if a != left.full:
            va = v1[left.hyperplane_index[a]]
            if b != right.full and not np.array_equal(row[lp[pos_l]], va[pos_l]):
                raise HarmonizationFailed("harmonized sides disagree on T")
            row[lp] = va
        out[h] = row
    glued = HyperplaneSystem(target, p, out)
    return require_modular(glued, "glued system")


def align_on_t(sys1: HyperplaneSystem, sys2: HyperplaneSystem, info: GpcInfo) -> HyperplaneSystem:
    """Rescale sys2's T-elements so its T-restriction becomes isomorphic to
    sys1's; needs the two restrictions to be rescaling equivalent."""
    tm, pos_l, pos_r = _t_positions(info)
    st1, st2 = pull(sys1, tm, pos_l), pull(sys2, tm, pos_r)
    c1, _, b1 = canonical_form(st1)
    c2, _, b2 = canonical_form(st2)
    if c1 != c2:
        raise TRestrictionsNotIsomorphic("T-restrictions are not rescaling equivalent")
    p = sys2.pasture
    cols = np.ones(sys2.matroid.n, dtype=np.int64)
    for i, e in enumerate(pos_r):
        cols[e] = p.div(int(b2[i]), int(b1[i]))
    return sys2.scaled(cols=cols)


# ---------------------------------------------------------------------------
# 2-sums
# ---------------------------------------------------------------------------

def _two_sum_info(m: Matroid) -> TwoSumInfo:
    info = m.provenance
    if not isinstance(info, TwoSumInfo):
        raise NotAGpcMatroid("matroid was not built by two_sum")
    if info.parallel is None:
        raise NotAGpcMatroid("2-sum maps need simple summands")
    return info


def _two_sum_parts(m2s: Matroid):
    info = _two_sum_info(m2s)
    par = info.parallel
    pos = [par.index[lab] for lab in m2s.labels]
    pinfo = _gpc_info(par)
    p_idx = par.index[info.p]
    e1 = sum(1 << i for i, q in enumerate(pos) if pinfo.e1 >> q & 1)
    e2 = sum(1 << i for i, q in enumerate(pos) if pinfo.e2 >> q & 1)
    return info, par, pos, p_idx, e1, e2


def two_sum_phi(sys: HyperplaneSystem, m2s: Matroid) -> HyperplaneSystem:
    """Restrict a system on P_p(M1, M2) to the 2-sum (delete p)."""
    info, par, pos, _, _, _ = _two_sum_parts(m2s)
    if sys.matroid != par:
        raise RepresentationError("system does not live on the parallel connection")
    return pull(sys, m2s, pos)


def admissible_h0(m2s: Matroid) -> list[int]:
    """Hyperplanes of the 2-sum containing neither side, lexicographic order."""
    _, _, _, _, e1, e2 = _two_sum_parts(m2s)
    out = [h for h in m2s.hyperplanes if h & e1 != e1 and h & e2 != e2]
    return sorted(out, key=lex_key)


def two_sum_psi(sys: HyperplaneSystem, h0=None, side: int = 1) -> HyperplaneSystem:
    """Extend a system on M1 (+)_p M2 to P_p(M1, M2).

    Hyperplanes containing one side get f(p) = 0. Otherwise f_H(p) is the
    unique c such that a multiple of f_H|E1' * c f_H0|E2' is in the system
    (``side=2`` swaps the roles of the two sides).
    """
    m2s = sys.matroid
    info, par, pos, p_idx, e1, e2 = _two_sum_parts(m2s)
    p = sys.pasture
    adm = admissible_h0(m2s)
    if not adm:
        raise NoAdmissibleH0("every hyperplane of the 2-sum contains a side")
    h0m = adm[0] if h0 is None else m2s.mask(h0)
    if h0m not in adm:
        raise NoAdmissibleH0(f"{m2s.labels_of(h0m)} is not an admissible reference hyperplane")
    own, other = (e1, e2) if side == 1 else (e2, e1)
    hidx = m2s.hyperplane_index
    v = sys.values.astype(np.int64)
    f0 = v[hidx[h0m]]
    out = np.zeros((len(par.hyperplanes), par.n), dtype=np.int64)
    posarr = np.array(pos, dtype=np.int64)
    for ph, phm in enumerate(par.hyperplanes):
        hm = sum(1 << i for i, q in enumerate(pos) if phm >> q & 1)
        fh = v[hidx[hm]]
        row = np.zeros(par.n, dtype=np.int64)
        row[posarr] = fh
        if not phm >> p_idx & 1:
            kmask = (hm & own) | (h0m & other)
            if kmask not in hidx:
                raise ExtensionAmbiguous(f"{m2s.labels_of(kmask)} is not a hyperplane")
            fk = v[hidx[kmask]]
            a = bits(own & ~hm)[0]
            lam = p.div(int(fk[a]), int(fh[a]))
            b = bits(other & ~h0m)[0]
            c = p.div(int(fk[b]), p.times(lam, int(f0[b])))
            expect = np.zeros(m2s.n, dtype=np.int64)
            for e in range(m2s.n):
                src = fh[e] if own >> e & 1 else p.times(c, int(f0[e]))
                expect[e] = p.times(lam, int(src))
            if not np.array_equal(expect, fk):
                raise ExtensionAmbiguous(
                    f"no scalar c extends f_H for H={list(m2s.labels_of(hm))}")
            row[p_idx] = c
        out[ph] = row
    return HyperplaneSystem(par, p, out)


def two_sum_restrict(sys: HyperplaneSystem, h0=None):
    """(system on M1, system on M2) from a system on the 2-sum."""
    ext = two_sum_psi(sys, h0)
    return restrict_system(ext, 1), restrict_system(ext, 2)


def two_sum_extend(sys1: HyperplaneSystem, sys2: HyperplaneSystem, m2s: Matroid) -> HyperplaneSystem:
    """System on the 2-sum from systems on the summands."""
    info = _two_sum_info(m2s)
    return two_sum_phi(glue_gpc(sys1, sys2, info.parallel), m2s)


# ---------------------------------------------------------------------------
# lines, triangles and Theta extensions
# ---------------------------------------------------------------------------

def _line_check(sys: HyperplaneSystem) -> int:
    m = sys.matroid
    n = m.n
    if m.rank != 2 or len(m.bases) != n * (n - 1) // 2:
        raise RestrictionNotUniform("system does not live on a uniform rank-2 matroid")
    return n


def normalize_line_system(sys: HyperplaneSystem) -> HyperplaneSystem:
    """Row-rescale a system on U(2,n) so that f_i(x_j) = eps f_j(x_i) and
    the three-term identities hold (f_i is the function of hyperplane {x_i})."""
    n = _line_check(sys)
    m, p = sys.matroid, sys.pasture
    hrow = [m.hyperplane_index[1 << i] for i in range(n)]
    v = sys.values.astype(np.int64)
    scale = np.ones(len(m.hyperplanes), dtype=np.int64)
    for j in range(1, n):
        # c_1 f_1(x_j) = eps c_j f_j(x_1) with c_1 = 1
        scale[hrow[j]] = p.times(p.eps, p.div(int(v[hrow[0], j]), int(v[hrow[j], 0])))
    out = sys.scaled(scale)
    if not line_identities_hold(out):
        raise NormalizationImpossible("line system admits no normalization; input not modular")
    return out


def line_identities_hold(sys: HyperplaneSystem) -> bool:
    n = _line_check(sys)
    m, p = sys.matroid, sys.pasture
    hrow = [m.hyperplane_index[1 << i] for i in range(n)]
    f = [[int(sys.values[hrow[i], e]) for e in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j and f[i][j] != p.times(p.eps, f[j][i]):
                return False
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                for e in range(n):
                    t = (p.times(f[j][k], f[i][e]), p.times(f[k][i], f[j][e]),
                         p.times(f[i][j], f[k][e]))
                    if not p.null[t]:
                        return False
    return True


def admissible_triangle_flats(m: Matroid, t: int) -> list[int]:
    """Corank-2 flats L disjoint from cl(t) with L and t spanning."""
    ct = m.closure_of(t)
    out = [f for f in m.corank2_flats if f & ct == 0 and m.rank_of(f | t) == m.rank]
    return sorted(out, key=lex_key)


def triangle_normalize(sys: HyperplaneSystem, t) -> HyperplaneSystem:
    """Rescale so each hyperplane meeting the triangle t = {x, y, z} in one
    point reads (0, 1, eps) cyclically on t, and each hyperplane missing t
    has f(x) + f(y) + f(z) null."""
    m, p = sys.matroid, sys.pasture
    tm = m.mask(t)
    if popcount(tm) != 3 or m.rank_of(tm) != 2:
        raise RepresentationError(f"{m.labels_of(tm)} is not a triangle")
    x, y, z = bits(tm)
    flats = admissible_triangle_flats(m, tm)
    if not flats:
        raise NoDisjointCorank2Flat(f"no corank-2 flat avoids cl({list(m.labels_of(tm))})")
    lf = flats[0]
    v = sys.values.astype(np.int64)
    hx = m.hyperplane_index[m.closure_of(lf | 1 << x)]
    hy = m.hyperplane_index[m.closure_of(lf | 1 << y)]
    # column scalings making the cyclic normalization consistent on H_x, H_y
    rho = p.div(int(v[hx, z]), int(v[hx, y]))
    sigma = p.div(int(v[hy, x]), int(v[hy, z]))
    cols = np.ones(m.n, dtype=np.int64)
    cols[z] = p.div(p.eps, rho)
    cols[x] = p.div(p.times(p.eps, int(cols[z])), sigma)
    s = sys.scaled(cols=cols)
    v = s.values.astype(np.int64)
    nxt = {x: y, y: z, z: x}
    rows = np.ones(len(m.hyperplanes), dtype=np.int64)
    for h, hm in enumerate(m.hyperplanes):
        meet = bits(hm & tm)
        if len(meet) == 1:
            rows[h] = p.inv[int(v[h, nxt[meet[0]]])]
    out = s.scaled(rows)
    if not triangle_conditions_hold(out, tm):
        raise NormalizationImpossible("triangle normalization failed; input not modular")
    return out


def triangle_conditions_hold(sys: HyperplaneSystem, t: int) -> bool:
    m, p = sys.matroid, sys.pasture
    x, y, z = bits(t)
    nxt = {x: (y, z), y: (z, x), z: (x, y)}
    for h, hm in enumerate(m.hyperplanes):
        meet = bits(hm & t)
        vals = sys.values[h]
        if len(meet) == 1:
            a, b = nxt[meet[0]]
            if vals[a] != 1 or vals[b] != p.eps:
                return False
        elif not meet:
            if not p.null[int(vals[x]), int(vals[y]), int(vals[z])]:
                return False
    return True


def _line_functions(sys1: HyperplaneSystem, xm: int):
    """Normalized line functions g[i][j] = f_{x_i}(x_j) on X (indices in X order)."""
    m = sys1.matroid
    xs = bits(xm)
    line = pull(sys1, restrict(m, xm), xs)
    line = normalize_line_system(line)
    lm = line.matroid
    n = len(xs)
    g = [[int(line.values[lm.hyperplane_index[1 << i], j]) for j in range(n)] for i in range(n)]
    return xs, g


def harmonize_on_line(sys1: HyperplaneSystem, xm: int):
    """Row-scale sys1 so each f_H with H meeting X in {x_i} equals the
    normalized line function g_i on X. Returns (values, xs, g)."""
    m, p = sys1.matroid, sys1.pasture
    xs, g = _line_functions(sys1, xm)
    v = sys1.values.astype(np.int64).copy()
    for h, hm in enumerate(m.hyperplanes):
        meet = [i for i, e in enumerate(xs) if hm >> e & 1]
        if len(meet) != 1:
            continue
        ref = np.array(g[meet[0]], dtype=np.int64)
        lam = _proportional(p, v[h, xs], ref)
        if lam is None:
            raise HarmonizationFailed(
                f"f_H for H={list(m.labels_of(hm))} is not proportional to its line function")
        v[h] = p.mul[lam, v[h]]
    return v, xs, g


def theta_extend(sys1: HyperplaneSystem, x, spec: ThetaSpec | None = None,
                 target: Matroid | None = None) -> HyperplaneSystem:
    """Extend a system on M1 to P_X(M1, Theta_n) by the five hyperplane-type
    formulas (n >= 3). The output is re-verified to be modular."""
    m1, p = sys1.matroid, sys1.pasture
    xm = m1.mask(x)
    n = popcount(xm)
    if n < 3:
        raise NMustBeAtLeast3("use theta2_extend for n = 2")
    if not m1.is_flat_mask(xm):
        raise NotAFlat(f"{m1.labels_of(xm)} is not a flat")
    big = target if target is not None else parallel_with_theta(m1, xm, spec)
    info = _gpc_info(big)
    v1, xs, g = harmonize_on_line(sys1, xm)
    eps = p.eps
    left = info.gluing.left
    ypos = [info.right_pos[n + i] for i in range(n)]
    xtheta = (1 << n) - 1
    out = np.zeros((len(big.hyperplanes), big.n), dtype=np.int64)
    for h, hm in enumerate(big.hyperplanes):
        a = info.to_left(hm)
        b = info.to_right(hm)
        row = np.zeros(big.n, dtype=np.int64)
        missing = [i for i in range(n) if not b >> (n + i) & 1]
        bx = [i for i in range(n) if b >> i & 1]
        if a == left.full:
            # E1 plus X and all but three y's
            i, j, k = missing
            row[ypos[i]] = g[j][k]
            row[ypos[j]] = g[k][i]
            row[ypos[k]] = g[i][j]
        else:
            fa = v1[left.hyperplane_index[a]]
            row[list(info.left_pos)] = fa
            if not missing:
                pass
            elif len(missing) == 1:
                (i,) = missing
                row[ypos[i]] = 1
            elif len(missing) == 2 and len(bx) == 1:
                i, j = missing
                (k,) = bx
                row[ypos[i]] = p.div(p.times(eps, g[j][k]), g[i][j])
                row[ypos[j]] = p.div(g[i][k], g[i][j])
            elif len(missing) == 2 and not bx:
                i, j = missing
                row[ypos[i]] = p.div(int(fa[xs[j]]), g[i][j])
                row[ypos[j]] = p.div(int(fa[xs[i]]), g[j][i])
            else:
                raise RepresentationError(
                    f"unexpected hyperplane type {list(big.labels_of(hm))}")
        out[h] = row
    ext = HyperplaneSystem(big, p, out)
    return require_modular(ext, "Theta extension")


def theta2_extend(sys1: HyperplaneSystem, x, spec: ThetaSpec | None = None,
                  target: Matroid | None = None) -> HyperplaneSystem:
    """n = 2: each y is parallel to an element of X, so f_H(y) copies that value."""
    m1, p = sys1.matroid, sys1.pasture
    xm = m1.mask(x)
    if popcount(xm) != 2:
        raise RepresentationError("theta2_extend needs |X| = 2")
    big = target if target is not None else parallel_with_theta(m1, xm, spec)
    info = _gpc_info(big)
    lp = list(info.left_pos)
    twin = {}
    for e in range(big.n):
        if e in lp:
            continue
        twin[e] = next(x for x in bits(info.from_left(xm)) if big.rank_of((1 << x) | (1 << e)) == 1)
    out = np.zeros((len(big.hyperplanes), big.n), dtype=np.int64)
    for h, hm in enumerate(big.hyperplanes):
        a = info.to_left(hm)
        row = np.zeros(big.n, dtype=np.int64)
        row[lp] = sys1.values[m1.hyperplane_index[a]]
        for e, x in twin.items():
            row[e] = row[x]
        out[h] = row
    return require_modular(HyperplaneSystem(big, p, out), "Theta_2 extension")


def extend_with_theta(sys1: HyperplaneSystem, x, spec=None, target=None) -> HyperplaneSystem:
    if popcount(sys1.matroid.mask(x)) == 2:
        return theta2_extend(sys1, x, spec, target)
    return theta_extend(sys1, x, spec, target)


def theta_restrict(sys: HyperplaneSystem) -> HyperplaneSystem:
    return restrict_system(sys, 1)


# ---------------------------------------------------------------------------
# fiber products
# ---------------------------------------------------------------------------

def verify_fiber_product(target, p: Pasture, budget: int = DEFAULT_BUDGET,
                         threads: int | None = None) -> dict:
    """Check that restriction is a bijection from the rescaling classes of
    P_T(M1, M2) onto pairs of classes of M1 and M2 that agree on T.

    ``target`` is the glued matroid or a Gluing. Surjectivity is shown by
    gluing each compatible pair and restricting back.
    """
    if not isinstance(target, Matroid):
        from .constructions import generalized_parallel_connection
        target = generalized_parallel_connection(target)
    info = _gpc_info(target)
    g = info.gluing
    tm, _, _ = _t_positions(info)
    cm = enumerate_census(target, p, budget, threads)
    c1 = enumerate_census(g.left, p, budget, threads)
    c2 = enumerate_census(g.right, p, budget, threads)
    ct = enumerate_census(tm, p, budget, threads)
    witnesses = []
    images = {}
    for idx, s in enumerate(cm.representatives):
        r1, r2 = restrict_system(s, 1), restrict_system(s, 2)
        pair = (c1.index_of(r1), c2.index_of(r2))
        if None in pair:
            witnesses.append({"kind": "restriction not modular", "class": idx})
            continue
        if pair in images:
            witnesses.append({"kind": "not injective", "classes": [images[pair], idx]})
        images[pair] = idx
    fiber = []
    for i, a in enumerate(c1.representatives):
        for j, b in enumerate(c2.representatives):
            ta, tb = t_restrictions(a, b, info)
            if canonical_form(ta)[0] == canonical_form(tb)[0]:
                fiber.append((i, j))
    for i, j in fiber:
        if (i, j) not in images:
            witnesses.append({"kind": "not surjective", "pair": [i, j]})
        a = c1.representatives[i]
        try:
            glued = glue_gpc(a, align_on_t(a, c2.representatives[j], info), target)
        except RepresentationError as exc:
            witnesses.append({"kind": "gluing failed", "pair": [i, j], "error": str(exc)})
            continue
        back = (c1.index_of(restrict_system(glued, 1)), c2.index_of(restrict_system(glued, 2)))
        if back != (i, j) or images.get((i, j)) != cm.index_of(glued):
            witnesses.append({"kind": "gluing does not invert restriction", "pair": [i, j]})
    for pair in images:
        if pair not in set(fiber):
            witnesses.append({"kind": "restriction leaves the fiber product", "pair": list(pair)})
    return {
        "pasture": p.name,
        "M": cm.rescaling_count,
        "M1": c1.rescaling_count,
        "M2": c2.rescaling_count,
        "T": ct.rescaling_count,
        "fiber": len(fiber),
        "bijective": not witnesses,
        "witnesses": witnesses,
    }
