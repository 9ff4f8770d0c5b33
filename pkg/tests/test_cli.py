import json

import pytest

from matfound import catalog
from matfound.cli import main
from matfound.io import load_matroid, matroid_to_json, save_matroid
from matfound.matroid import are_isomorphic


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_info(capsys):
    code, out, _ = run(capsys, "info", "mk4")
    doc = json.loads(out)
    assert code == 0
    assert (doc["rank"], doc["bases"], doc["hyperplanes"]) == (3, 16, 7)
    assert doc["simple"] and len(doc["components"]) == 1


def test_construct_dy(capsys, tmp_path):
    out = tmp_path / "dy.json"
    code, _, _ = run(capsys, "construct", "dy", "mk4", "--t", "e1,e2,e3", "-o", str(out))
    assert code == 0
    assert are_isomorphic(load_matroid(out), catalog.mk23()) is not None


def test_construct_stdout_round_trip(capsys):
    code, out, _ = run(capsys, "construct", "theta", "--n", "3")
    assert code == 0
    from matfound.io import matroid_from_json
    assert matroid_to_json(matroid_from_json(out)) == out


@pytest.mark.parametrize("argv", [
    ["construct", "gpc", "mk4", "mk4", "--identify", "e1=e1,e2=e2,e3=e3"],
    ["construct", "2sum", "u24", "u23", "--p", "p"],
    ["construct", "scse", "nonfano", "--x", "1,2,4"],
    ["construct", "dual", "u24"],
    ["construct", "directsum", "u23", "u23"],
])
def test_construct_kinds(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0 and json.loads(out)["bases"]


def test_construct_cssc(capsys, tmp_path):
    path = tmp_path / "ex.json"
    run(capsys, "construct", "scse", "fano", "--x", "1,2,4", "-o", str(path))
    code, out, _ = run(capsys, "construct", "cssc", str(path), "--x", "y1,y2,y3")
    assert code == 0
    from matfound.io import matroid_from_json
    assert are_isomorphic(matroid_from_json(out), catalog.fano()) is not None


def test_census(capsys):
    code, out, _ = run(capsys, "census", "u24", "--pastures", "gf2,gf3,gf4", "--quiet")
    assert code == 0
    assert out.splitlines() == ["pasture=gf2 rescaling=0 iso=0",
                                "pasture=gf3 rescaling=1 iso=8",
                                "pasture=gf4 rescaling=2 iso=54"]


def test_census_json_and_file_digest(capsys, tmp_path):
    path = tmp_path / "u24.json"
    save_matroid(catalog.named("u24"), path)
    code, out, _ = run(capsys, "census", str(path), "--pastures", "sign", "--classes", "iso")
    doc = json.loads(out)
    assert code == 0 and doc["outcome"] == "pass"
    assert doc["counts"] == [{"pasture": "sign", "iso": 24}]
    assert len(doc["inputs"]["matroid"]) == 16


def test_orientable(capsys):
    code, out, _ = run(capsys, "orientable", "fano", "--quiet")
    assert code == 0 and "orientable=False" in out
    code, out, _ = run(capsys, "orientable", "nonfano", "--quiet")
    assert "orientable=True" in out


def test_verify_a(capsys):
    code, out, _ = run(capsys, "verify", "a", "--m1", "mk4", "--m2", "mk4",
                       "--identify", "e1=e1,e2=e2,e3=e3", "--pastures", "gf3,sign")
    assert code == 0 and json.loads(out)["outcome"] == "pass"


def test_verify_b(capsys):
    code, out, _ = run(capsys, "verify", "b", "--m1", "u24", "--m2", "u23", "--p", "p",
                       "--pastures", "gf4", "--quiet")
    assert code == 0
    assert out.strip() == "pasture=gf4 M=2 M1=2 M2=1"


def test_verify_c(capsys):
    code, out, _ = run(capsys, "verify", "c", "--m", "nonfano", "--x", "1,2,4",
                       "--pastures", "gf3", "--quiet")
    assert code == 0
    assert out.strip() == "pasture=gf3 M=1 P=1 M'=1"


def test_morphisms(capsys):
    code, out, _ = run(capsys, "morphisms", "gf4", "gf4", "--quiet")
    assert (code, out) == (0, "2\n")
    code, out, _ = run(capsys, "morphisms", "sign", "krasner")
    assert json.loads(out)["count"] == 1


@pytest.mark.parametrize("argv", [
    ["info", "nonexistent"],
    ["construct", "gpc", "mk4"],
    ["construct", "dy", "mk4"],
    ["construct", "gpc", "mk4", "mk4", "--identify", "e1"],
    ["verify", "c", "--m", "u23", "--x", "d,e,p"],
    ["verify", "a", "--m1", "fano", "--m2", "fano", "--identify", "1=1,2=2"],
    ["census", "mk4", "--pastures", "gf6"],
])
def test_bad_input_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_budget_exit_3(capsys):
    code, _, err = run(capsys, "census", "u36", "--pastures", "sign", "--budget", "10")
    assert code == 3 and "budget" in err


def test_threads_flag(capsys, monkeypatch):
    monkeypatch.delenv("MF_THREADS", raising=False)
    code, out, _ = run(capsys, "census", "u24", "--pastures", "gf4", "--threads", "2", "--quiet")
    assert code == 0 and "rescaling=2" in out
