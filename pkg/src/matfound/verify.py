"""One-shot verification suites behind ``matfound verify`` and the census
commands. Each returns a Report; the outcome is pass iff no witnesses."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .constructions import (
    Gluing,
    ThetaSpec,
    check_segment,
    generalized_parallel_connection,
    parallel_with_theta,
    two_sum,
)
from .errors import (
    BasepointLoopOrColoop,
    ConstructionError,
    HypothesisFailed,
    NotAFlat,
    NotCoindependent,
    RestrictionNotUniform,
)
from .matroid import Matroid, are_isomorphic, components, delete, is_modular_flat, simplify
from .io import load_pasture
from .pasture import Pasture, builtin
from .representation import (
    DEFAULT_BUDGET,
    admissible_h0,
    align_on_t,
    enumerate_census,
    extend_with_theta,
    pull,
    rescaling_equivalent,
    theta_restrict,
    two_sum_extend,
    two_sum_phi,
    two_sum_psi,
    two_sum_restrict,
    verify_fiber_product,
)

# built-ins with at most four units
DEFAULT_PASTURES = ("f1pm", "krasner", "sign", "gf2", "gf3", "gf4", "gf5")


@dataclass
class Report:
    command: str
    inputs: dict
    counts: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def outcome(self) -> str:
        return "fail" if self.witnesses else "pass"

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def as_dict(self, timing: bool = True) -> dict:
        d = {
            "command": self.command,
            "inputs": self.inputs,
            "outcome": self.outcome,
            "counts": self.counts,
            "witnesses": self.witnesses,
        }
        if timing:
            d["wall_time"] = round(self.wall_time, 3)
        return d

    def to_text(self, timing: bool = True) -> str:
        return json.dumps(self.as_dict(timing), indent=2) + "\n"

    def counts_text(self) -> str:
        lines = []
        for row in self.counts:
            lines.append(" ".join(f"{k}={v}" for k, v in row.items()))
        return "\n".join(lines) + ("\n" if lines else "")


def _pastures(names) -> list[Pasture]:
    return [load_pasture(n) for n in (names or DEFAULT_PASTURES)]


def _timed(report: Report, start: float) -> Report:
    report.wall_time = time.perf_counter() - start
    return report


# -- census-type commands -------------------------------------------------------

def census_report(m: Matroid, pastures, classes: str = "rescaling",
                  budget: int = DEFAULT_BUDGET, threads: int | None = None,
                  inputs: dict | None = None) -> Report:
    start = time.perf_counter()
    rep = Report("census", inputs or {"matroid": m.name})
    for p in _pastures(pastures):
        c = enumerate_census(m, p, budget, threads)
        row = {"pasture": p.name}
        if classes in ("rescaling", "both"):
            row["rescaling"] = c.rescaling_count
        if classes in ("iso", "both"):
            row["iso"] = c.iso_count
        rep.counts.append(row)
    return _timed(rep, start)


def orientable_report(m: Matroid, budget: int = DEFAULT_BUDGET,
                      threads: int | None = None, inputs: dict | None = None) -> Report:
    start = time.perf_counter()
    rep = Report("orientable", inputs or {"matroid": m.name})
    c = enumerate_census(m, builtin("sign"), budget, threads)
    rep.counts.append({"pasture": "sign", "iso": c.iso_count, "orientable": c.iso_count > 0})
    return _timed(rep, start)


# -- bijection suites -----------------------------------------------------------

def _hypothesis(cond: bool, name: str, msg: str) -> None:
    if not cond:
        raise HypothesisFailed(f"{name}: {msg}")


def verify_gluing(g: Gluing, pastures=None, budget: int = DEFAULT_BUDGET,
                  threads: int | None = None, rename: str | None = "R.",
                  inputs: dict | None = None) -> Report:
    """Classes of P_T(M1, M2) versus the fiber product over T, per pasture."""
    start = time.perf_counter()
    _hypothesis(g.left.is_flat_mask(g.t_left), "T-flat-left", "T is not a flat of M1")
    _hypothesis(g.right.is_flat_mask(g.t_right), "T-flat-right", "T is not a flat of M2")
    _hypothesis(is_modular_flat(g.left, g.t_left), "T-modular-left", "T is not modular in M1")
    _hypothesis(is_modular_flat(g.right, g.t_right), "T-modular-right", "T is not modular in M2")
    try:
        m = generalized_parallel_connection(g, rename=rename)
    except ConstructionError as exc:
        raise HypothesisFailed(f"gluing: {exc}") from exc
    rep = Report("verify a", inputs or {"m1": g.left.name, "m2": g.right.name})
    for p in _pastures(pastures):
        res = verify_fiber_product(m, p, budget, threads)
        rep.counts.append({k: res[k] for k in ("pasture", "M", "M1", "M2", "T", "fiber")})
        for w in res["witnesses"]:
            rep.witnesses.append({"pasture": p.name, **w})
    return _timed(rep, start)


def _two_sum_hyperplanes_match(m2s: Matroid) -> bool:
    """Hyperplanes of the 2-sum are exactly H - p for H in P_p(M1, M2)."""
    par = m2s.provenance.parallel
    cut = {sum(1 << m2s.index[lab] for lab in par.labels_of(h) if lab in m2s.index)
           for h in par.hyperplanes}
    return cut == set(m2s.hyperplanes)


def verify_two_sum(m1: Matroid, m2: Matroid, p: str, pastures=None,
                   budget: int = DEFAULT_BUDGET, threads: int | None = None,
                   rename: str | None = "R.", inputs: dict | None = None) -> Report:
    """Census product equality and the extension/restriction maps of a 2-sum."""
    start = time.perf_counter()
    _hypothesis(p in m1.index and p in m2.index, "basepoint", f"{p!r} must lie in both matroids")
    for tag, m in (("M1", m1), ("M2", m2)):
        _hypothesis(simplify(m)[0].n == m.n, f"{tag}-simple", f"{tag} is not simple")
    try:
        m2s = two_sum(m1, m2, p, rename=rename)
    except BasepointLoopOrColoop as exc:
        raise HypothesisFailed(f"basepoint: {exc}") from exc
    par = m2s.provenance.parallel
    rep = Report("verify b", inputs or {"m1": m1.name, "m2": m2.name, "p": p})
    if not _two_sum_hyperplanes_match(m2s):
        rep.witnesses.append({"kind": "hyperplanes of the 2-sum are not H - p"})
    h0s = admissible_h0(m2s)
    for pa in _pastures(pastures):
        c = enumerate_census(m2s, pa, budget, threads)
        c1 = enumerate_census(m1, pa, budget, threads)
        c2 = enumerate_census(m2, pa, budget, threads)
        cp = enumerate_census(par, pa, budget, threads)
        rep.counts.append({"pasture": pa.name, "M": c.rescaling_count,
                           "M1": c1.rescaling_count, "M2": c2.rescaling_count})

        def bad(kind, **kw):
            rep.witnesses.append({"pasture": pa.name, "kind": kind, **kw})

        if c.rescaling_count != c1.rescaling_count * c2.rescaling_count:
            bad("census product fails")
        seen = {}
        for idx, s in enumerate(c.representatives):
            ext = two_sum_psi(s)
            if two_sum_phi(ext, m2s) != s:
                bad("phi(psi(x)) != x", cls=idx)
            if cp.index_of(ext) is None:
                bad("psi(x) is not modular", cls=idx)
            for h0 in h0s:
                alt = two_sum_psi(s, h0)
                if not rescaling_equivalent(alt, ext):
                    bad("reference hyperplane changes the class", cls=idx,
                        h0=list(m2s.labels_of(h0)))
                if two_sum_psi(s, h0, side=2) != alt:
                    bad("side symmetry fails", cls=idx, h0=list(m2s.labels_of(h0)))
            r1, r2 = two_sum_restrict(s)
            pair = (c1.index_of(r1), c2.index_of(r2))
            if pair in seen:
                bad("restriction not injective", classes=[seen[pair], idx])
            seen[pair] = idx
        for idx, s in enumerate(cp.representatives):
            if not rescaling_equivalent(two_sum_psi(two_sum_phi(s, m2s)), s):
                bad("psi(phi(x)) not rescaling equivalent to x", cls=idx)
        for i, a in enumerate(c1.representatives):
            for j, b in enumerate(c2.representatives):
                s = two_sum_extend(a, align_on_t(a, b, par.provenance), m2s)
                if c.index_of(s) is None or seen.get((i, j)) != c.index_of(s):
                    bad("extension does not invert restriction", pair=[i, j])
    return _timed(rep, start)


def verify_exchange(m: Matroid, x, pastures=None, budget: int = DEFAULT_BUDGET,
                    threads: int | None = None, spec: ThetaSpec | None = None,
                    inputs: dict | None = None) -> Report:
    """Classes of M, P_X(M, Theta_n) and the exchange M' agree, with the
    extension and deletion maps bijective; also n = 2 and component checks."""
    start = time.perf_counter()
    try:
        xm = check_segment(m, x)
    except RestrictionNotUniform as exc:
        raise HypothesisFailed(f"segment: {exc}") from exc
    except NotCoindependent as exc:
        raise HypothesisFailed(f"coindependent: {exc}") from exc
    except NotAFlat as exc:
        raise HypothesisFailed(f"flat: {exc}") from exc
    big = parallel_with_theta(m, xm, spec)
    xs = m.labels_of(xm)
    mp = delete(big, xs)
    keep = [big.index[lab] for lab in mp.labels]
    rep = Report("verify c", inputs or {"m": m.name, "x": list(xs)})
    if len(xs) == 2 and are_isomorphic(mp, m) is None:
        rep.witnesses.append({"kind": "n = 2 exchange is not isomorphic to M"})
    if len(components(mp)) != len(components(m)):
        rep.witnesses.append({"kind": "component count changed",
                              "before": len(components(m)), "after": len(components(mp))})
    for p in _pastures(pastures):
        c = enumerate_census(m, p, budget, threads)
        cb = enumerate_census(big, p, budget, threads)
        cm = enumerate_census(mp, p, budget, threads)
        rep.counts.append({"pasture": p.name, "M": c.rescaling_count,
                           "P": cb.rescaling_count, "M'": cm.rescaling_count})

        def bad(kind, **kw):
            rep.witnesses.append({"pasture": p.name, "kind": kind, **kw})

        if not c.rescaling_count == cb.rescaling_count == cm.rescaling_count:
            bad("census counts differ")
        hit = set()
        for idx, s in enumerate(c.representatives):
            e = extend_with_theta(s, xm, target=big)
            j = cb.index_of(e)
            if j is None or j in hit:
                bad("extension not injective", cls=idx)
            hit.add(j)
            if not rescaling_equivalent(theta_restrict(e), s):
                bad("restriction does not invert extension", cls=idx)
        hit = set()
        for idx, s in enumerate(cb.representatives):
            j = cm.index_of(pull(s, mp, keep))
            if j is None or j in hit:
                bad("deleting X is not injective on classes", cls=idx)
            hit.add(j)
        if len(hit) != cm.rescaling_count:
            bad("deleting X is not surjective on classes")
    return _timed(rep, start)
