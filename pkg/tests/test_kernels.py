import json
import os
import subprocess
import sys

import numpy as np
import pytest

from matfound import _kernels, catalog
from matfound.bits import all_subsets, k_subsets
from matfound.pasture import builtin
from matfound.representation import enumerate_census, gauge_plan

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def _bases(name):
    m = catalog.named(name)
    return m, np.array(sorted(m.bases), dtype=np.uint64)


@needs_numba
@pytest.mark.parametrize("name", ["fano", "mk4", "u36", "nonfano"])
def test_rank_many_parity(name):
    m, b = _bases(name)
    subs = all_subsets(m.n)
    assert np.array_equal(_kernels.rank_many_np(b, subs), _kernels.rank_many_nb(b, subs))


@needs_numba
def test_independent_filter_parity():
    m = catalog.mk4()
    flats = np.array(m.all_flats, dtype=np.uint64)
    ranks = np.array([m.rank_of(f) for f in m.all_flats], dtype=np.int64)
    cands = k_subsets(m.n, m.rank)
    assert np.array_equal(_kernels.independent_filter_np(cands, flats, ranks),
                          _kernels.independent_filter_nb(cands, flats, ranks))


@needs_numba
def test_circuit_free_parity():
    m = catalog.fano()
    circ = np.array(m.circuits, dtype=np.uint64)
    cands = k_subsets(m.n, 3)
    assert np.array_equal(_kernels.circuit_free_np(cands, circ),
                          _kernels.circuit_free_nb(cands, circ))


@needs_numba
def test_exchange_violation_parity():
    m, b = _bases("u24")
    assert _kernels.exchange_violation_np(b, m.n) is None
    assert _kernels.exchange_violation_nb(b, m.n) is None
    bad = np.array(sorted([0b0011, 0b1100]), dtype=np.uint64)
    r1 = _kernels.exchange_violation_np(bad, 4)
    r2 = _kernels.exchange_violation_nb(bad, 4)
    assert r1 is not None and tuple(r1) == tuple(r2)


@needs_numba
@pytest.mark.parametrize("mname,pname", [("u24", "gf4"), ("fano", "gf2"), ("u36", "gf5"),
                                         ("nonfano", "sign"), ("mk4", "gf3")])
def test_search_parity(mname, pname):
    m, p = catalog.named(mname), builtin(pname)
    plan = gauge_plan(m)
    args = (plan.nvars, p.k, p.mul.astype(np.int64), p.inv.astype(np.int64), p.eps, p.null,
            plan.checks, plan.check_ptr, np.zeros(0, dtype=np.int64), 1 << 16, 10 ** 8)
    s1, n1, st1 = _kernels.search_py(*args)
    s2, n2, st2 = _kernels.search_nb(*args)
    assert (n1, st1) == (n2, st2)
    assert np.array_equal(s1, s2)


def test_search_full_and_budget_status():
    m, p = catalog.named("u36"), builtin("gf7")
    plan = gauge_plan(m)
    base = (plan.nvars, p.k, p.mul.astype(np.int64), p.inv.astype(np.int64), p.eps, p.null,
            plan.checks, plan.check_ptr, np.zeros(0, dtype=np.int64))
    sols, _, status = _kernels.search(*base, 3, 10 ** 8)
    assert status == _kernels.SEARCH_FULL and len(sols) == 3
    _, nodes, status = _kernels.search(*base, 1 << 16, 50)
    assert status == _kernels.SEARCH_BUDGET and nodes > 50


def test_fallback_backend_in_subprocess():
    code = (
        "import json\n"
        "from matfound import _kernels, catalog\n"
        "from matfound.pasture import builtin\n"
        "from matfound.representation import enumerate_census\n"
        "c = enumerate_census(catalog.named('u36'), builtin('gf5'))\n"
        "print(json.dumps([_kernels.BACKEND, c.rescaling_count, c.nodes,"
        " [r.key().hex() for r in c.representatives]]))\n"
    )
    env = dict(os.environ, MATFOUND_JIT="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True)
    backend, count, nodes, keys = json.loads(out.stdout)
    assert backend == "numpy"
    c = enumerate_census(catalog.named("u36"), builtin("gf5"))
    assert count == c.rescaling_count == 6
    assert nodes == c.nodes
    assert keys == [r.key().hex() for r in c.representatives]
