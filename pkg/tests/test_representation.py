import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matfound import catalog
from matfound.constructions import Gluing, gpc, generalized_parallel_connection, parallel_with_theta, two_sum
from matfound.errors import (
    NMustBeAtLeast3,
    NoDisjointCorank2Flat,
    NormalizationImpossible,
    NotModularSystem,
    RepresentationError,
    SearchBudgetExceeded,
    SupportViolation,
    TRestrictionsNotIsomorphic,
)
from matfound.matroid import matroid_from_bases, relabel
from matfound.pasture import all_morphisms, builtin
from matfound.representation import (
    HyperplaneSystem,
    admissible_h0,
    admissible_triangle_flats,
    align_on_t,
    canonical_form,
    census_bruteforce,
    census_by_normalization,
    enumerate_census,
    extend_with_theta,
    glue_gpc,
    is_modular_system,
    is_orientable,
    iso_per_rescaling,
    isomorphic,
    line_identities_hold,
    normalize_line_system,
    pushforward,
    require_modular,
    rescaling_equivalent,
    restrict_system,
    restrict_to,
    system_from_functions,
    t_restrictions,
    theta2_extend,
    theta_extend,
    theta_restrict,
    triangle_conditions_hold,
    triangle_normalize,
    two_sum_extend,
    two_sum_phi,
    two_sum_psi,
    two_sum_restrict,
    verify_fiber_product,
)

# Rescaling-class counts, each cross-checked against the normalization
# route and (where small) the brute-force scan; frozen here.
CENSUS = {
    "u24": {"f1pm": 0, "krasner": 1, "sign": 3, "gf2": 0, "gf3": 1, "gf4": 2, "gf5": 3,
            "gf7": 5, "gf8": 6, "gf9": 7},
    "fano": {"f1pm": 0, "krasner": 1, "sign": 0, "gf2": 1, "gf3": 0, "gf4": 1, "gf5": 0,
             "gf7": 0, "gf8": 1, "gf9": 0},
    "nonfano": {"f1pm": 0, "krasner": 1, "sign": 1, "gf2": 0, "gf3": 1, "gf4": 0, "gf5": 1,
                "gf7": 1, "gf8": 0, "gf9": 1},
    "mk4": dict.fromkeys(["f1pm", "krasner", "sign", "gf2", "gf3", "gf4", "gf5", "gf7",
                          "gf8", "gf9"], 1),
    "mk23": dict.fromkeys(["f1pm", "krasner", "sign", "gf2", "gf3", "gf4", "gf5"], 1),
    "u36": {"gf4": 2, "gf5": 6, "sign": 372},
}
SMALL = ["f1pm", "krasner", "sign", "gf2", "gf3", "gf4"]


def cases():
    for name, row in CENSUS.items():
        for p, n in row.items():
            yield name, p, n


@pytest.mark.parametrize("name,pasture,count", list(cases()))
def test_census_values(name, pasture, count):
    c = enumerate_census(catalog.named(name), builtin(pasture))
    assert c.rescaling_count == count
    assert len(c.representatives) == count
    for s in c.representatives:
        assert is_modular_system(s)[0]
        assert canonical_form(s)[0] == s


def test_u24_iso_counts():
    m = catalog.named("u24")
    assert enumerate_census(m, builtin("sign")).iso_count == 24
    assert enumerate_census(m, builtin("gf3")).iso_count == 8
    assert enumerate_census(m, builtin("gf4")).iso_count == 54


@pytest.mark.parametrize("name", ["u23", "u24", "mk4", "fano", "nonfano"])
@pytest.mark.parametrize("pasture", ["krasner", "sign", "gf2", "gf3", "gf4"])
def test_normalization_route_agrees(name, pasture):
    m, p = catalog.named(name), builtin(pasture)
    a, b = enumerate_census(m, p), census_by_normalization(m, p)
    assert a.rescaling_count == b.rescaling_count
    assert a.iso_count == b.iso_count
    assert [s.key() for s in a.representatives] == [s.key() for s in b.representatives]


@pytest.mark.parametrize("name,pasture", [("u23", "gf3"), ("u23", "sign"), ("u24", "gf3"),
                                          ("u24", "sign"), ("u24", "gf4"), ("u24", "gf2")])
def test_bruteforce_route_agrees(name, pasture):
    m, p = catalog.named(name), builtin(pasture)
    a, b = enumerate_census(m, p), census_bruteforce(m, p)
    assert (a.rescaling_count, a.iso_count) == (b.rescaling_count, b.iso_count)
    assert {s.key() for s in a.representatives} == {s.key() for s in b.representatives}


def test_bruteforce_limit():
    with pytest.raises(SearchBudgetExceeded):
        census_bruteforce(catalog.fano(), builtin("gf5"), limit=1000)


def test_u23_over_gf2_all_ones_is_modular():
    m, p = catalog.named("u23"), builtin("gf2")
    funcs = {(lab,): {o: "1" for o in m.labels if o != lab} for lab in m.labels}
    ok, witness = is_modular_system(system_from_functions(m, p, funcs))
    assert ok and witness is None


def test_u24_over_gf2_is_not_modular():
    m, p = catalog.named("u24"), builtin("gf2")
    funcs = {(lab,): {o: "1" for o in m.labels if o != lab} for lab in m.labels}
    s = system_from_functions(m, p, funcs)
    ok, witness = is_modular_system(s)
    assert not ok
    assert len(witness["hyperplanes"]) == 3
    with pytest.raises(NotModularSystem):
        require_modular(s, "test")


def test_support_violation():
    m, p = catalog.named("u23"), builtin("gf3")
    with pytest.raises(SupportViolation):
        system_from_functions(m, p, {(lab,): {o: "1" for o in m.labels} for lab in m.labels})
    with pytest.raises(RepresentationError):
        system_from_functions(m, p, {("d",): {"e": "1", "p": "1"}})


def test_function_accessor():
    m, p = catalog.named("u23"), builtin("gf3")
    s = enumerate_census(m, p).representatives[0]
    f = s.function(["d"])
    assert f["d"] == "0" and f["e"] != "0"


def _units(p, n, draw):
    return [draw(st.integers(1, p.k)) for _ in range(n)]


@settings(max_examples=30)
@given(st.sampled_from([("u24", "gf4"), ("u24", "sign"), ("mk4", "gf5"), ("nonfano", "gf3"),
                        ("fano", "gf4")]), st.data())
def test_rescaling_invariance(case, data):
    m, p = catalog.named(case[0]), builtin(case[1])
    c = enumerate_census(m, p)
    s = c.representatives[data.draw(st.integers(0, c.rescaling_count - 1))]
    rows = _units(p, len(m.hyperplanes), data.draw)
    cols = _units(p, m.n, data.draw)
    t = s.scaled(rows, cols)
    assert is_modular_system(t)[0]
    assert canonical_form(t)[0] == s
    assert rescaling_equivalent(t, s)
    assert c.index_of(t) == c.representatives.index(s)
    assert isomorphic(s.scaled(rows), s)


@settings(max_examples=30)
@given(st.data())
def test_iso_classes_count_column_orbits(data):
    # distinct column scalings modulo the gauge are non-isomorphic
    m, p = catalog.named("u24"), builtin("gf3")
    s = enumerate_census(m, p).representatives[0]
    cols = _units(p, m.n, data.draw)
    t = s.scaled(cols=cols)
    assert isomorphic(t, s) == (len({c for c in cols}) == 1)


def test_iso_per_rescaling():
    assert iso_per_rescaling(catalog.named("u24"), builtin("gf4")) == 27
    assert iso_per_rescaling(catalog.mk4(), builtin("gf2")) == 1


def test_rank_zero_and_one():
    z = catalog.uniform(0, 2)
    c = enumerate_census(z, builtin("gf3"))
    assert (c.rescaling_count, c.iso_count) == (1, 1)
    one = catalog.uniform(1, 3)
    c = enumerate_census(one, builtin("gf3"))
    assert c.rescaling_count == 1
    # one hyperplane: nonzero vectors up to one row scaling
    assert c.iso_count == 2 ** 3 // 2
    for name in ("gf5", "sign", "krasner"):
        assert enumerate_census(one, builtin(name)).rescaling_count == 1


def test_budget_exceeded():
    with pytest.raises(SearchBudgetExceeded):
        enumerate_census(catalog.named("u36"), builtin("sign"), budget=50)


def test_thread_determinism():
    m, p = catalog.named("u36"), builtin("gf5")
    a = enumerate_census(m, p, threads=1)
    b = enumerate_census(m, p, threads=3)
    assert [s.key() for s in a.representatives] == [s.key() for s in b.representatives]
    assert a.nodes == b.nodes


def test_orientability():
    assert is_orientable(catalog.mk4())
    assert not is_orientable(catalog.fano())
    assert is_orientable(catalog.non_fano())


# -- normalizations --------------------------------------------------------------

@pytest.mark.parametrize("n,pasture", [(3, "gf3"), (4, "gf5"), (4, "sign"), (5, "gf7"),
                                       (4, "gf4"), (3, "krasner")])
def test_line_normalization(n, pasture):
    m, p = catalog.uniform(2, n), builtin(pasture)
    for s in enumerate_census(m, p).representatives:
        rows = [(i % p.k) + 1 for i in range(len(m.hyperplanes))]
        out = normalize_line_system(s.scaled(rows))
        assert line_identities_hold(out)
        assert isomorphic(out, s)
        assert normalize_line_system(out) == out


def test_line_normalization_rejects_non_modular():
    m, p = catalog.named("u24"), builtin("gf2")
    funcs = {(lab,): {o: "1" for o in m.labels if o != lab} for lab in m.labels}
    with pytest.raises(NormalizationImpossible):
        normalize_line_system(system_from_functions(m, p, funcs))


@pytest.mark.parametrize("pasture", SMALL + ["gf5"])
def test_triangle_normalization_mk4(pasture):
    m, p = catalog.mk4(), builtin(pasture)
    t = m.mask(["e1", "e2", "e3"])
    for s in enumerate_census(m, p).representatives:
        out = triangle_normalize(s, t)
        assert triangle_conditions_hold(out, t)
        assert rescaling_equivalent(out, s)


def test_triangle_needs_disjoint_flat():
    m = catalog.fano()
    t = m.mask(["1", "2", "4"])
    assert admissible_triangle_flats(m, t)
    # with a loop every corank-2 flat meets the closure of the triangle
    u = matroid_from_bases(["a", "b", "c", "l"], [["a", "b"], ["a", "c"], ["b", "c"]])
    s = enumerate_census(u, builtin("gf3")).representatives[0]
    with pytest.raises(NoDisjointCorank2Flat):
        triangle_normalize(s, ["a", "b", "c"])


# -- gluing ----------------------------------------------------------------------

def _mk4_pair():
    m = catalog.mk4()
    return generalized_parallel_connection(Gluing(m, m, {t: t for t in ("e1", "e2", "e3")}),
                                           rename="R.")


GLUED = {
    "mk4-mk4": _mk4_pair,
    "u23-u23-p": lambda: gpc(catalog.named("u23"), catalog.named("u23"), {"p": "p"}, rename="R."),
    "u23-u23-empty": lambda: gpc(catalog.named("u23"), catalog.named("u23"), {}, rename="R."),
    "u23-theta3": lambda: parallel_with_theta(catalog.named("u23"), ["d", "e", "p"]),
    "f7-mk4": lambda: gpc(catalog.fano(), catalog.mk4(), {"1": "e1", "2": "e2", "4": "e3"}),
}


@pytest.mark.parametrize("key", list(GLUED))
@pytest.mark.parametrize("pasture", ["gf2", "gf3", "sign"])
def test_fiber_product(key, pasture):
    res = verify_fiber_product(GLUED[key](), builtin(pasture))
    assert res["bijective"], res["witnesses"]
    assert res["M"] == res["fiber"]


def test_glue_restrict_round_trip():
    m = _mk4_pair()
    info = m.provenance
    p = builtin("gf5")
    for s in enumerate_census(m, p).representatives:
        r1, r2 = restrict_system(s, 1), restrict_system(s, 2)
        g = glue_gpc(r1, align_on_t(r1, r2, info), m)
        assert rescaling_equivalent(g, s)
        ta, tb = t_restrictions(r1, r2, info)
        assert rescaling_equivalent(ta, tb)


def test_glue_rejects_mismatched_t():
    m = gpc(catalog.named("u24"), catalog.named("u24"), {"a": "a", "b": "b", "c": "c", "p": "p"},
            rename="R.")
    p = builtin("gf4")
    reps = enumerate_census(catalog.named("u24"), p).representatives
    assert len(reps) == 2
    with pytest.raises(TRestrictionsNotIsomorphic):
        glue_gpc(reps[0], reps[1], m)


def test_restrict_to_subset():
    m, p = catalog.mk4(), builtin("gf3")
    s = enumerate_census(m, p).representatives[0]
    r = restrict_to(s, ["e1", "e2", "e3"])
    assert r.matroid.rank == 2 and is_modular_system(r)[0]


# -- 2-sums ----------------------------------------------------------------------

TWO_SUMS = [
    ("u23", "u23", "p"),
    ("u24", "u23", "p"),
    ("mk4", "u24", "e1"),
]


def _two_sum(a, b, p):
    m1, m2 = catalog.named(a), catalog.named(b)
    if p != "p":
        m2 = relabel(m2, {"p": p})
    return m1, m2, two_sum(m1, m2, p, rename="R.")


@pytest.mark.parametrize("case", TWO_SUMS, ids=lambda c: "+".join(c))
@pytest.mark.parametrize("pasture", ["gf3", "gf4", "sign"])
def test_two_sum_maps(case, pasture):
    m1, m2, m = _two_sum(*case)
    p = builtin(pasture)
    c, c1, c2 = enumerate_census(m, p), enumerate_census(m1, p), enumerate_census(m2, p)
    par = m.provenance.parallel
    cp = enumerate_census(par, p)
    assert c.rescaling_count == c1.rescaling_count * c2.rescaling_count == cp.rescaling_count
    for s in c.representatives:
        ext = two_sum_psi(s)
        assert two_sum_phi(ext, m) == s
        for h0 in admissible_h0(m):
            assert rescaling_equivalent(two_sum_psi(s, h0), ext)
            assert two_sum_psi(s, h0, side=2) == two_sum_psi(s, h0)
        r1, r2 = two_sum_restrict(s)
        assert rescaling_equivalent(two_sum_extend(r1, align_on_t(r1, r2, par.provenance), m), s)
    for s in cp.representatives:
        assert rescaling_equivalent(two_sum_psi(two_sum_phi(s, m)), s)


@pytest.mark.parametrize("case", TWO_SUMS, ids=lambda c: "+".join(c))
def test_two_sum_orientability(case):
    m1, m2, m = _two_sum(*case)
    assert is_orientable(m) == (is_orientable(m1) and is_orientable(m2))


def test_two_sum_of_fano_not_orientable():
    f = catalog.fano()
    m = two_sum(f, relabel(catalog.named("u23"), {"p": "1"}), "1")
    assert not is_orientable(m)
    assert enumerate_census(m, builtin("gf2")).rescaling_count == 1


# -- Theta extensions ------------------------------------------------------------

THETA = [
    ("mk4", ["e1", "e2", "e3"]),
    ("nonfano", ["1", "2", "4"]),
    ("u24", ["a", "b", "c", "p"]),
    ("u23", ["d", "e", "p"]),
]


@pytest.mark.parametrize("case", THETA, ids=lambda c: c[0])
@pytest.mark.parametrize("pasture", ["gf3", "gf4", "gf5", "sign"])
def test_theta_extension(case, pasture):
    m = catalog.named(case[0])
    p = builtin(pasture)
    big = parallel_with_theta(m, case[1])
    c, cb = enumerate_census(m, p), enumerate_census(big, p)
    assert c.rescaling_count == cb.rescaling_count
    seen = set()
    for s in c.representatives:
        e = theta_extend(s, case[1], target=big)
        assert is_modular_system(e)[0]
        assert rescaling_equivalent(theta_restrict(e), s)
        seen.add(cb.index_of(e))
    assert seen == set(range(cb.rescaling_count))


def test_theta2_extension():
    m, p = catalog.mk4(), builtin("gf5")
    x = ["e1", "e6"]
    big = parallel_with_theta(m, x)
    for s in enumerate_census(m, p).representatives:
        e = theta2_extend(s, x, target=big)
        assert rescaling_equivalent(theta_restrict(e), s)
        assert extend_with_theta(s, x, target=big) == e
    with pytest.raises(NMustBeAtLeast3):
        theta_extend(enumerate_census(m, p).representatives[0], x)


# -- functoriality ---------------------------------------------------------------

def _frobenius():
    p = builtin("gf4")
    return next(f for f in all_morphisms(p, p) if f.as_labels()["w"] == "w^2")


def _sign_to_krasner():
    (f,) = all_morphisms(builtin("sign"), builtin("krasner"))
    return f


@pytest.mark.parametrize("phi", [_frobenius, _sign_to_krasner], ids=["frobenius", "sign-krasner"])
def test_pushforward_commutes(phi):
    f = phi()
    m = _mk4_pair()
    for s in enumerate_census(m, f.source).representatives:
        fs = pushforward(s, f)
        assert is_modular_system(fs)[0]
        for side in (1, 2):
            assert pushforward(restrict_system(s, side), f) == restrict_system(fs, side)
        r1, r2 = restrict_system(s, 1), restrict_system(s, 2)
        g = glue_gpc(r1, align_on_t(r1, r2, m.provenance), m)
        gf = glue_gpc(pushforward(r1, f), align_on_t(pushforward(r1, f), pushforward(r2, f),
                                                     m.provenance), m)
        assert rescaling_equivalent(pushforward(g, f), gf)
    x = ["e1", "e2", "e3"]
    mk = catalog.mk4()
    big = parallel_with_theta(mk, x)
    for s in enumerate_census(mk, f.source).representatives:
        assert rescaling_equivalent(pushforward(theta_extend(s, x, target=big), f),
                                    theta_extend(pushforward(s, f), x, target=big))


def test_pushforward_identity_and_values():
    f = _frobenius()
    s = enumerate_census(catalog.named("u24"), f.source).representatives[0]
    twice = pushforward(pushforward(s, f), f)
    assert twice == s
    assert np.array_equal(pushforward(s, f).values == 0, s.values == 0)
