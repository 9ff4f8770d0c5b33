"""Small named matroids used as fixtures and CLI shorthands."""

from __future__ import annotations

from itertools import combinations
from string import ascii_lowercase

from .errors import UnknownMatroid
from .matroid import Matroid, matroid_from_bases

FANO_LINES = ("124", "235", "346", "457", "156", "267", "137")

# K4 on vertices 1..4; e1 e2 e3 form the triangle on vertices 1, 2, 3
K4_EDGES = {"e1": (1, 2), "e2": (1, 3), "e3": (2, 3), "e4": (1, 4), "e5": (2, 4), "e6": (3, 4)}
K23_EDGES = {f"a{i}b{j}": (f"a{i}", f"b{j}") for i in (1, 2) for j in (1, 2, 3)}


def uniform(r: int, n: int, labels=None, name: str | None = None) -> Matroid:
    labels = list(labels) if labels is not None else list(ascii_lowercase[:n])
    return matroid_from_bases(labels, list(combinations(labels, r)),
                              name or f"U{r},{n}", check=False)


def _plane(lines, name: str) -> Matroid:
    pts = list("1234567")
    dep = {frozenset(line) for line in lines}
    bases = [b for b in combinations(pts, 3) if frozenset(b) not in dep]
    return matroid_from_bases(pts, bases, name, check=False)


def rank3(points, lines, name: str = "") -> Matroid:
    """Simple rank-3 matroid whose only nontrivial lines are ``lines``."""
    lines = [set(line) for line in lines]
    bases = [b for b in combinations(points, 3) if not any(set(b) <= ln for ln in lines)]
    return matroid_from_bases(list(points), bases, name)


PLANE_PAIR_T = ["t0", "t1", "t2", "t3", "t4", "t5"]


def plane_pair(experimental: bool = False) -> tuple[Matroid, Matroid, list[str]]:
    """Two planes sharing the six-point line t0..t5, as (left, right, T).

    The right plane adds a, b, c, d with every pair of them collinear with a
    different point of T, so T is modular there. The left plane adds a line
    p, q, r missing T, so T is not modular on the left. Transcribed from a
    drawing, hence only available with ``experimental=True``.
    """
    if not experimental:
        raise UnknownMatroid("plane_pair is a transcription of a drawing; pass experimental=True")
    t = PLANE_PAIR_T
    left = rank3(t + ["p", "q", "r"], [t, ["p", "q", "r"]], "plane-pair-left")
    right = rank3(t + ["a", "b", "c", "d"],
                  [t, ["t3", "a", "b"], ["t2", "c", "d"], ["t4", "a", "d"],
                   ["t1", "b", "c"], ["t5", "b", "d"], ["t0", "a", "c"]],
                  "plane-pair-right")
    return left, right, list(t)


def fano() -> Matroid:
    return _plane(FANO_LINES, "F7")


def non_fano() -> Matroid:
    """Fano plane with the line {1,3,7} relaxed."""
    return _plane(FANO_LINES[:-1], "F7-")


def graphic(edges: dict, name: str = "") -> Matroid:
    """Cycle matroid; ``edges`` maps labels to vertex pairs, in ground order."""
    labels = list(edges)
    verts = sorted({v for e in edges.values() for v in e}, key=str)

    def forest_size(sub):
        parent = {v: v for v in verts}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        size = 0
        for lab in sub:
            a, b = (find(v) for v in edges[lab])
            if a != b:
                parent[a] = b
                size += 1
        return size

    r = forest_size(labels)
    bases = [b for b in combinations(labels, r) if forest_size(b) == r]
    return matroid_from_bases(labels, bases, name, check=False)


def mk4() -> Matroid:
    return graphic(K4_EDGES, "M(K4)")


def mk23() -> Matroid:
    return graphic(K23_EDGES, "M(K2,3)")


_NAMED = {
    "fano": fano,
    "f7": fano,
    "nonfano": non_fano,
    "f7-": non_fano,
    "mk4": mk4,
    "mk23": mk23,
    "u23": lambda: uniform(2, 3, ["d", "e", "p"], "U2,3"),
    "u24": lambda: uniform(2, 4, ["a", "b", "c", "p"], "U2,4"),
    "u13": lambda: uniform(1, 3, name="U1,3"),
    "u36": lambda: uniform(3, 6, name="U3,6"),
}


def named(name: str) -> Matroid:
    key = name.strip().lower()
    if key not in _NAMED:
        raise UnknownMatroid(f"no catalog matroid called {name!r}")
    return _NAMED[key]()


def catalog_names() -> list[str]:
    return sorted(_NAMED)
