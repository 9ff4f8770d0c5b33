"""Hot loops: subset ranks, exchange checks, independence filters, and the
representation search.

Each kernel has two implementations with identical results:

* a numba ``@njit`` version (default when numba imports), and
* a numpy / plain-Python fallback.

Set ``MATFOUND_JIT=0`` in the environment to force the fallback. ``BACKEND``
records which one the dispatchers use.
"""

import os

import numpy as np

_CHUNK = 1 << 16

try:
    if os.environ.get("MATFOUND_JIT", "1").strip().lower() in ("0", "false", "no", "off"):
        raise ImportError("jit disabled by MATFOUND_JIT")
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag in a subprocess
    numba = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"

# status codes of the search kernel
SEARCH_DONE = 0
SEARCH_FULL = 1
SEARCH_BUDGET = 2


# ---------------------------------------------------------------------------
# numpy / python fallbacks
# ---------------------------------------------------------------------------

def rank_many_np(bases, subsets):
    bases = np.asarray(bases, dtype=np.uint64)
    subsets = np.asarray(subsets, dtype=np.uint64)
    out = np.empty(len(subsets), dtype=np.int64)
    if len(bases) == 0:
        out[:] = 0
        return out
    step = max(1, _CHUNK // max(1, len(bases)))
    for lo in range(0, len(subsets), step):
        block = subsets[lo:lo + step]
        out[lo:lo + step] = np.bitwise_count(block[:, None] & bases[None, :]).max(axis=1)
    return out


def independent_filter_np(cands, flats, flat_ranks):
    """True where ``|cand & F| <= rank(F)`` for every flat F."""
    cands = np.asarray(cands, dtype=np.uint64)
    flats = np.asarray(flats, dtype=np.uint64)
    flat_ranks = np.asarray(flat_ranks, dtype=np.int64)
    out = np.empty(len(cands), dtype=np.bool_)
    step = max(1, _CHUNK // max(1, len(flats)))
    for lo in range(0, len(cands), step):
        block = cands[lo:lo + step]
        counts = np.bitwise_count(block[:, None] & flats[None, :])
        out[lo:lo + step] = (counts <= flat_ranks[None, :]).all(axis=1)
    return out


def circuit_free_np(cands, circuits):
    """True where the candidate contains no circuit."""
    cands = np.asarray(cands, dtype=np.uint64)
    circuits = np.asarray(circuits, dtype=np.uint64)
    out = np.ones(len(cands), dtype=np.bool_)
    for c in circuits:
        out &= (cands & c) != c
    return out


def exchange_violation_np(bases, n):
    """Return ``(i, j, x)`` with no valid exchange for bases[i], bases[j] and
    element x, or ``None``. ``bases`` must be sorted ascending."""
    bases = np.asarray(bases, dtype=np.uint64)
    full = np.uint64((1 << n) - 1)
    for i in range(len(bases)):
        b1 = bases[i]
        outside = int(full & ~b1)
        for x in range(n):
            xb = np.uint64(1 << x)
            if not b1 & xb:
                continue
            good = 0
            ys = [y for y in range(n) if outside >> y & 1]
            if ys:
                cand = (b1 ^ xb) | np.array([1 << y for y in ys], dtype=np.uint64)
                pos = np.searchsorted(bases, cand)
                pos = np.minimum(pos, len(bases) - 1)
                hit = bases[pos] == cand
                for y, h in zip(ys, hit):
                    if h:
                        good |= 1 << y
            # every basis B2 lacking x must offer some y in B2 - B1 that works
            lacks = (bases & xb) == 0
            fail = lacks & ((bases & ~b1 & np.uint64(good)) == 0)
            if fail.any():
                j = int(np.flatnonzero(fail)[0])
                return i, j, x
    return None


def search_py(nvars, k, mul, inv, eps, null, checks, check_ptr, prefix,
              cap, budget):
    """Backtracking over unit values 1..k for ``nvars`` variables.

    ``checks[t]`` holds seven refs (var index >= 0, or ``-(code+1)`` for a
    constant): fi(b), fk(b), fj(a), fk(a), fi(e), fj(e), fk(e). The kernel
    derives ck = eps*fj(a)/fk(a), ci = eps*ck*fk(b)/fi(b) and requires
    (ci*fi(e), fj(e), ck*fk(e)) to be null. Checks listed under position p
    run once variable p is assigned.
    """
    mul = [list(map(int, row)) for row in np.asarray(mul)]
    inv = [int(v) for v in np.asarray(inv)]
    nl = np.asarray(null)
    kk = k + 1
    nullflat = [bool(v) for v in nl.reshape(-1)]
    chk = [tuple(int(v) for v in row) for row in np.asarray(checks).reshape(-1, 7)]
    ptr = [int(v) for v in np.asarray(check_ptr)]
    prefix = [int(v) for v in np.asarray(prefix)]
    eps = int(eps)

    assign = [0] * nvars
    start = len(prefix)
    assign[:start] = prefix
    sols = []
    nodes = 0

    def val(r):
        return assign[r] if r >= 0 else -r - 1

    def run(p):
        for t in range(ptr[p], ptr[p + 1]):
            fib, fkb, fja, fka, fie, fje, fke = chk[t]
            ck = mul[eps][mul[val(fja)][inv[val(fka)]]]
            ci = mul[eps][mul[ck][mul[val(fkb)][inv[val(fib)]]]]
            a = mul[ci][val(fie)]
            b = val(fje)
            c = mul[ck][val(fke)]
            if not nullflat[(a * kk + b) * kk + c]:
                return False
        return True

    for p in range(start):
        if not run(p):
            return np.zeros((0, nvars), dtype=np.int8), 0, SEARCH_DONE
    if start == nvars:
        return np.array([assign], dtype=np.int8).reshape(1, nvars), 0, SEARCH_DONE

    pos = start
    assign[pos] = 0
    status = SEARCH_DONE
    while pos >= start:
        v = assign[pos] + 1
        if v > k:
            assign[pos] = 0
            pos -= 1
            continue
        assign[pos] = v
        nodes += 1
        if nodes > budget:
            status = SEARCH_BUDGET
            break
        if not run(pos):
            continue
        if pos == nvars - 1:
            if len(sols) >= cap:
                status = SEARCH_FULL
                break
            sols.append(list(assign))
            continue
        pos += 1
        assign[pos] = 0
    arr = np.array(sols, dtype=np.int8).reshape(len(sols), nvars)
    return arr, nodes, status


# ---------------------------------------------------------------------------
# numba versions
# ---------------------------------------------------------------------------

if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)

    @_jit
    def _popcount64(x):
        x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
        x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
        x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
        return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)

    @_jit
    def rank_many_nb(bases, subsets):
        out = np.zeros(subsets.shape[0], dtype=np.int64)
        for s in range(subsets.shape[0]):
            best = 0
            sub = subsets[s]
            for b in range(bases.shape[0]):
                c = np.int64(_popcount64(bases[b] & sub))
                if c > best:
                    best = c
            out[s] = best
        return out

    @_jit
    def independent_filter_nb(cands, flats, flat_ranks):
        out = np.ones(cands.shape[0], dtype=np.bool_)
        for i in range(cands.shape[0]):
            c = cands[i]
            for f in range(flats.shape[0]):
                if np.int64(_popcount64(c & flats[f])) > flat_ranks[f]:
                    out[i] = False
                    break
        return out

    @_jit
    def circuit_free_nb(cands, circuits):
        out = np.ones(cands.shape[0], dtype=np.bool_)
        for i in range(cands.shape[0]):
            c = cands[i]
            for j in range(circuits.shape[0]):
                if (c & circuits[j]) == circuits[j]:
                    out[i] = False
                    break
        return out

    @_jit
    def _contains_sorted(arr, v):
        lo = 0
        hi = arr.shape[0]
        while lo < hi:
            mid = (lo + hi) // 2
            if arr[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        return lo < arr.shape[0] and arr[lo] == v

    @_jit
    def _exchange_violation_nb(bases, n):
        one = np.uint64(1)
        full = (one << np.uint64(n)) - one
        for i in range(bases.shape[0]):
            b1 = bases[i]
            outside = full & ~b1
            for x in range(n):
                xb = one << np.uint64(x)
                if (b1 & xb) == 0:
                    continue
                good = np.uint64(0)
                for y in range(n):
                    yb = one << np.uint64(y)
                    if (outside & yb) != 0 and _contains_sorted(bases, (b1 ^ xb) | yb):
                        good |= yb
                for j in range(bases.shape[0]):
                    b2 = bases[j]
                    if (b2 & xb) == 0 and (b2 & ~b1 & good) == 0:
                        return i, j, x
        return -1, -1, -1

    def exchange_violation_nb(bases, n):
        i, j, x = _exchange_violation_nb(np.asarray(bases, dtype=np.uint64), n)
        return None if i < 0 else (int(i), int(j), int(x))

    @_jit
    def _run_checks(p, assign, mul, inv, eps, null, checks, check_ptr):
        for t in range(check_ptr[p], check_ptr[p + 1]):
            r = checks[t]
            v0 = assign[r[0]] if r[0] >= 0 else -r[0] - 1
            v1 = assign[r[1]] if r[1] >= 0 else -r[1] - 1
            v2 = assign[r[2]] if r[2] >= 0 else -r[2] - 1
            v3 = assign[r[3]] if r[3] >= 0 else -r[3] - 1
            v4 = assign[r[4]] if r[4] >= 0 else -r[4] - 1
            v5 = assign[r[5]] if r[5] >= 0 else -r[5] - 1
            v6 = assign[r[6]] if r[6] >= 0 else -r[6] - 1
            ck = mul[eps, mul[v2, inv[v3]]]
            ci = mul[eps, mul[ck, mul[v1, inv[v0]]]]
            if not null[mul[ci, v4], v5, mul[ck, v6]]:
                return False
        return True

    @_jit
    def _search_nb(nvars, k, mul, inv, eps, null, checks, check_ptr, prefix,
                   cap, budget):
        assign = np.zeros(nvars, dtype=np.int64)
        start = prefix.shape[0]
        for p in range(start):
            assign[p] = prefix[p]
        sols = np.zeros((cap, nvars), dtype=np.int8)
        nsol = 0
        nodes = 0
        for p in range(start):
            if not _run_checks(p, assign, mul, inv, eps, null, checks, check_ptr):
                return sols[:0], 0, 0
        if start == nvars:
            if cap < 1:
                return sols[:0], 0, 1
            for p in range(nvars):
                sols[0, p] = assign[p]
            return sols[:1], 0, 0
        status = 0
        pos = start
        assign[pos] = 0
        while pos >= start:
            v = assign[pos] + 1
            if v > k:
                assign[pos] = 0
                pos -= 1
                continue
            assign[pos] = v
            nodes += 1
            if nodes > budget:
                status = 2
                break
            if not _run_checks(pos, assign, mul, inv, eps, null, checks, check_ptr):
                continue
            if pos == nvars - 1:
                if nsol >= cap:
                    status = 1
                    break
                for p in range(nvars):
                    sols[nsol, p] = assign[p]
                nsol += 1
                continue
            pos += 1
            assign[pos] = 0
        return sols[:nsol], nodes, status

    def search_nb(nvars, k, mul, inv, eps, null, checks, check_ptr, prefix,
                  cap, budget):
        sols, nodes, status = _search_nb(
            np.int64(nvars), np.int64(k),
            np.ascontiguousarray(mul, dtype=np.int64),
            np.ascontiguousarray(inv, dtype=np.int64), np.int64(eps),
            np.ascontiguousarray(null, dtype=np.bool_),
            np.ascontiguousarray(np.asarray(checks, dtype=np.int64).reshape(-1, 7)),
            np.ascontiguousarray(check_ptr, dtype=np.int64),
            np.ascontiguousarray(prefix, dtype=np.int64),
            np.int64(cap), np.int64(budget))
        return sols.copy(), int(nodes), int(status)


# ---------------------------------------------------------------------------
# dispatchers
# ---------------------------------------------------------------------------

def rank_many(bases, subsets):
    b = np.ascontiguousarray(bases, dtype=np.uint64)
    s = np.ascontiguousarray(subsets, dtype=np.uint64)
    if HAVE_NUMBA:
        return rank_many_nb(b, s)
    return rank_many_np(b, s)


def independent_filter(cands, flats, flat_ranks):
    c = np.ascontiguousarray(cands, dtype=np.uint64)
    f = np.ascontiguousarray(flats, dtype=np.uint64)
    r = np.ascontiguousarray(flat_ranks, dtype=np.int64)
    if HAVE_NUMBA:
        return independent_filter_nb(c, f, r)
    return independent_filter_np(c, f, r)


def circuit_free(cands, circuits):
    c = np.ascontiguousarray(cands, dtype=np.uint64)
    z = np.ascontiguousarray(circuits, dtype=np.uint64)
    if HAVE_NUMBA:
        return circuit_free_nb(c, z)
    return circuit_free_np(c, z)


def exchange_violation(bases, n):
    b = np.ascontiguousarray(np.sort(np.asarray(bases, dtype=np.uint64)))
    if HAVE_NUMBA:
        return exchange_violation_nb(b, n)
    return exchange_violation_np(b, n)


def search(*args):
    if HAVE_NUMBA:
        return search_nb(*args)
    return search_py(*args)
