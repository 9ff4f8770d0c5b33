import itertools

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from matfound import catalog
from matfound.matroid import matroid_from_bases

settings.register_profile(
    "matfound",
    deadline=None,
    derandomize=True,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("matfound")


FIXTURE_NAMES = ["fano", "nonfano", "mk4", "mk23", "u23", "u24", "u13", "u36"]


@pytest.fixture(params=FIXTURE_NAMES)
def fixture_matroid(request):
    return catalog.named(request.param)


@st.composite
def graphic_matroids(draw, max_vertices=5, max_edges=8):
    """Cycle matroids of random multigraphs (loops and parallel edges allowed)."""
    nv = draw(st.integers(2, max_vertices))
    ne = draw(st.integers(1, max_edges))
    edges = {}
    for i in range(ne):
        a = draw(st.integers(0, nv - 1))
        b = draw(st.integers(0, nv - 1))
        edges[f"g{i}"] = (a, b)
    return catalog.graphic(edges, "G")


@st.composite
def uniform_matroids(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    r = draw(st.integers(0, n))
    return catalog.uniform(r, n)


@st.composite
def paving_relaxations(draw):
    """Fano or non-Fano with a random subset of lines relaxed."""
    keep = draw(st.lists(st.booleans(), min_size=7, max_size=7))
    lines = [ln for ln, k in zip(catalog.FANO_LINES, keep) if k]
    pts = list("1234567")
    dep = {frozenset(ln) for ln in lines}
    bases = [b for b in itertools.combinations(pts, 3) if frozenset(b) not in dep]
    return matroid_from_bases(pts, bases, "relaxed")


def small_matroids():
    return st.one_of(graphic_matroids(), uniform_matroids(), paving_relaxations())


_CRITERIA: dict[int, tuple[str, str, float]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _CRITERIA[num] = (title, "PASS" if rep.passed else "FAIL", rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, verdict, secs = _CRITERIA[num]
        terminalreporter.write_line(f"{verdict} criterion {num}: {title} ({secs:.2f} s)")
