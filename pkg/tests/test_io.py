from pathlib import Path

import pytest

import matfound
from matfound import catalog
from matfound.constructions import theta
from matfound.errors import NotPrimePower, ParseError, ValidationError
from matfound.io import (
    file_digest,
    load_matroid,
    load_pasture,
    matroid_from_json,
    matroid_to_json,
    pasture_from_json,
    pasture_to_json,
    save_matroid,
    save_pasture,
    system_from_json,
    system_to_json,
)
from matfound.pasture import all_builtins, builtin
from matfound.representation import enumerate_census

DATA = Path(matfound.__file__).parent / "data"


@pytest.mark.parametrize("path", sorted(DATA.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_files_round_trip(path):
    text = path.read_text()
    if "units" in text:
        assert pasture_to_json(pasture_from_json(text)) == text
    else:
        assert matroid_to_json(matroid_from_json(text)) == text


@pytest.mark.parametrize("name", catalog.catalog_names())
def test_catalog_round_trip(name):
    m = catalog.named(name)
    back = matroid_from_json(matroid_to_json(m))
    assert back.labels == m.labels and back.bases == m.bases and back.name == m.name


def test_theta_round_trip(tmp_path):
    m = theta(4)
    path = tmp_path / "t4.json"
    save_matroid(m, path)
    assert load_matroid(path).bases == m.bases
    assert path.read_text() == matroid_to_json(load_matroid(path))


@pytest.mark.parametrize("p", all_builtins(), ids=lambda p: p.name)
def test_pasture_round_trip(p, tmp_path):
    path = tmp_path / f"{p.name}.json"
    save_pasture(p, path)
    q = load_pasture(path)
    assert q.units == p.units
    assert (q.mul == p.mul).all() and (q.null == p.null).all()
    assert pasture_to_json(q) == path.read_text()


def test_load_by_name():
    assert load_matroid("mk4").n == 6
    assert load_pasture("gf4").k == 3
    with pytest.raises(ParseError):
        load_matroid("no-such-thing")
    with pytest.raises(ParseError):
        load_pasture("tropical-ish")
    with pytest.raises(NotPrimePower):
        load_pasture("gf6")


def test_parse_error_location():
    with pytest.raises(ParseError) as ei:
        matroid_from_json('{"elements": ["a",\n  }', "m.json")
    assert ei.value.location.startswith("m.json:2:")


def test_unknown_element_location():
    with pytest.raises(ParseError) as ei:
        matroid_from_json('{"elements": ["a", "b"], "bases": [["a"], ["c"]]}', "m.json")
    assert ei.value.location == "m.json:bases[1][0]"


@pytest.mark.parametrize("text,where", [
    ('[1, 2]', "m.json"),
    ('{"bases": []}', "m.json"),
    ('{"elements": "ab", "bases": []}', "m.json:elements"),
    ('{"elements": ["a", true], "bases": []}', "m.json:elements[1]"),
    ('{"elements": ["a"], "bases": [["a"]], "name": 3}', "m.json:name"),
])
def test_structural_errors(text, where):
    with pytest.raises(ParseError) as ei:
        matroid_from_json(text, "m.json")
    assert ei.value.location == where


def test_exchange_violation_is_validation_error():
    text = '{"elements": ["a", "b", "c", "d"], "bases": [["a", "b"], ["c", "d"]]}'
    with pytest.raises(ValidationError):
        matroid_from_json(text)


def test_pasture_errors():
    bad = '{"units": ["1"], "mul": [["1", "1"]], "null_generators": []}'
    with pytest.raises(ParseError):
        pasture_from_json(bad, "p.json")
    # no epsilon
    text = '{"units": ["1"], "mul": [["1", "1", "1"]], "null_generators": [["0", "0", "0"]]}'
    with pytest.raises(ValidationError):
        pasture_from_json(text)


@pytest.mark.parametrize("name,pasture", [("u24", "gf4"), ("mk4", "sign"), ("nonfano", "gf3")])
def test_system_round_trip(name, pasture):
    m, p = catalog.named(name), builtin(pasture)
    for s in enumerate_census(m, p).representatives:
        text = system_to_json(s)
        assert system_from_json(text, m, p) == s


def test_system_errors():
    m, p = catalog.named("u23"), builtin("gf3")
    s = enumerate_census(m, p).representatives[0]
    text = system_to_json(s)
    with pytest.raises(ValidationError):
        system_from_json(text.replace('"values": ["0"', '"values": ["1"', 1), m, p)
    with pytest.raises(ValidationError):
        system_from_json(text, catalog.uniform(2, 3, ["x", "y", "z"]), p)
    with pytest.raises(ParseError):
        system_from_json(text.replace('"2"', '"7"'), m, p) if '"2"' in text else \
            system_from_json(text.replace('"1"', '"7"', 1), m, p)


def test_file_digest(tmp_path):
    path = tmp_path / "m.json"
    save_matroid(catalog.mk4(), path)
    d = file_digest(path)
    assert len(d) == 16 and d == file_digest(str(path))
    assert file_digest("mk4") == "mk4"
