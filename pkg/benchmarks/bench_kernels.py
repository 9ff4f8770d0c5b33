"""Time the numba kernels against the numpy fallback.

Kernel rows call both implementations in one process. Census rows run
the whole pipeline in fresh subprocesses with MATFOUND_JIT=1 and =0, so
they include import and (for numba) cached-compile overhead.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--no-census]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from matfound import _kernels, catalog
from matfound.constructions import theta

CENSUS_CASES = [("u36", "sign"), ("u36", "gf5"), ("nonfano", "gf9")]

_CENSUS_SNIPPET = """
import time
from matfound import _kernels, catalog
from matfound.pasture import builtin
from matfound.representation import enumerate_census
m, p = catalog.named({m!r}), builtin({p!r})
enumerate_census(catalog.named("u23"), p)  # warm-up / compile
t = time.perf_counter()
c = enumerate_census(m, p, threads=1)
print(_kernels.BACKEND, c.rescaling_count, c.nodes, time.perf_counter() - t)
"""


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_rows(repeat: int):
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable; kernel comparison skipped")
        return
    m = theta(6)
    bases = np.array(m.bases, dtype=np.uint64)
    subsets = np.arange(1 << m.n, dtype=np.uint64)
    sorted_bases = np.sort(bases)
    cases = [
        ("rank_many theta6 all subsets",
         lambda: _kernels.rank_many_nb(bases, subsets),
         lambda: _kernels.rank_many_np(bases, subsets)),
        ("exchange_violation theta6",
         lambda: _kernels.exchange_violation_nb(sorted_bases, m.n),
         lambda: _kernels.exchange_violation_np(sorted_bases, m.n)),
    ]
    u = catalog.uniform(4, 10)
    ub = np.array(u.bases, dtype=np.uint64)
    cases.append(("exchange_violation U(4,10)",
                  lambda: _kernels.exchange_violation_nb(ub, u.n),
                  lambda: _kernels.exchange_violation_np(ub, u.n)))
    print(f"{'kernel':34s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for name, nb, npf in cases:
        nb()  # compile
        a, b = best_of(nb, repeat), best_of(npf, repeat)
        print(f"{name:34s} {a:10.4f} {b:10.4f} {b / a:8.1f}")


def census_rows(repeat: int):
    print(f"\n{'census':34s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for m, p in CENSUS_CASES:
        res = {}
        for flag in ("1", "0"):
            env = dict(os.environ, MATFOUND_JIT=flag)
            best, out = None, None
            for _ in range(repeat):
                line = subprocess.run([sys.executable, "-c", _CENSUS_SNIPPET.format(m=m, p=p)],
                                      env=env, capture_output=True, text=True,
                                      check=True).stdout.split()
                secs = float(line[3])
                best = secs if best is None else min(best, secs)
                out = line[:3]
            res[flag] = (best, out)
        # both backends must agree on classes and node counts
        assert res["1"][1][1:] == res["0"][1][1:], res
        a, b = res["1"][0], res["0"][0]
        label = f"{m}/{p} ({res['1'][1][1]} classes)"
        print(f"{label:34s} {a:10.4f} {b:10.4f} {b / a:8.1f}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--no-census", action="store_true")
    args = ap.parse_args(argv)
    kernel_rows(args.repeat)
    if not args.no_census:
        census_rows(args.repeat)


if __name__ == "__main__":
    main()
