"""JSON file formats for matroids, pastures and hyperplane systems.

Saved files are canonical: fixed key order, one basis (or table row) per
line, so ``save(load(text)) == text`` for any file this module wrote.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

from . import catalog
from .bits import lex_key
from .errors import MatfoundError, ParseError, UnknownMatroid, UnknownName, ValidationError
from .matroid import Matroid, matroid_from_bases
from .pasture import Pasture, builtin, validate_pasture
from .representation import HyperplaneSystem, check_support


def _parse_json(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, location=f"{source}:{exc.lineno}:{exc.colno}") from None


def _field(doc, key: str, kind, source: str):
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object", location=source)
    if key not in doc:
        raise ParseError(f"missing field {key!r}", location=source)
    val = doc[key]
    if not isinstance(val, kind):
        raise ParseError(f"field {key!r} should be {kind.__name__}", location=f"{source}:{key}")
    return val


def _label_list(val, where: str) -> list[str]:
    if not isinstance(val, list):
        raise ParseError("expected an array of labels", location=where)
    out = []
    for i, x in enumerate(val):
        if not isinstance(x, (str, int)) or isinstance(x, bool):
            raise ParseError("labels must be strings", location=f"{where}[{i}]")
        out.append(str(x))
    return out


def _dump_rows(key: str, rows, last: bool = False) -> str:
    if not rows:
        return f'  "{key}": []' + ("" if last else ",")
    body = ",\n".join("    " + json.dumps(r) for r in rows)
    return f'  "{key}": [\n{body}\n  ]' + ("" if last else ",")


# -- matroids -------------------------------------------------------------------

def matroid_from_json(text: str, source: str = "<string>") -> Matroid:
    doc = _parse_json(text, source)
    name = doc.get("name", "") if isinstance(doc, dict) else ""
    if not isinstance(name, str):
        raise ParseError("field 'name' should be str", location=f"{source}:name")
    elements = _label_list(_field(doc, "elements", list, source), f"{source}:elements")
    raw = _field(doc, "bases", list, source)
    bases = [_label_list(b, f"{source}:bases[{i}]") for i, b in enumerate(raw)]
    known = set(elements)
    for i, b in enumerate(bases):
        for j, lab in enumerate(b):
            if lab not in known:
                raise ParseError(f"unknown element {lab!r}", location=f"{source}:bases[{i}][{j}]")
    try:
        return matroid_from_bases(elements, bases, name)
    except MatfoundError as exc:
        raise ValidationError(f"{source}: {exc}") from exc


def matroid_to_json(m: Matroid) -> str:
    rows = [list(m.labels_of(b)) for b in sorted(m.bases, key=lex_key)]
    return "\n".join([
        "{",
        f'  "name": {json.dumps(m.name)},',
        f'  "elements": {json.dumps(list(m.labels))},',
        _dump_rows("bases", rows, last=True),
        "}",
    ]) + "\n"


def load_matroid(path_or_name) -> Matroid:
    """Read a matroid file; a bare catalog name (e.g. ``mk4``) also works."""
    p = Path(path_or_name)
    if p.is_file():
        return matroid_from_json(p.read_text(), str(p))
    try:
        return catalog.named(str(path_or_name))
    except UnknownMatroid:
        raise ParseError("no such file or catalog matroid", location=str(path_or_name)) from None


def save_matroid(m: Matroid, path) -> None:
    Path(path).write_text(matroid_to_json(m))


# -- pastures -------------------------------------------------------------------

def _triples(val, where: str) -> list[list[str]]:
    out = []
    for i, t in enumerate(val):
        t = _label_list(t, f"{where}[{i}]")
        if len(t) != 3:
            raise ParseError("expected a triple", location=f"{where}[{i}]")
        out.append(t)
    return out


def pasture_from_json(text: str, source: str = "<string>") -> Pasture:
    doc = _parse_json(text, source)
    name = doc.get("name", "") if isinstance(doc, dict) else ""
    units = _label_list(_field(doc, "units", list, source), f"{source}:units")
    mul = _triples(_field(doc, "mul", list, source), f"{source}:mul")
    nulls = _triples(_field(doc, "null_generators", list, source), f"{source}:null_generators")
    try:
        return validate_pasture(units, mul, nulls, str(name))
    except MatfoundError as exc:
        raise ValidationError(f"{source}: {exc}") from exc


def _null_orbit_reps(p: Pasture) -> list[tuple[int, int, int]]:
    reps = []
    for t in p.null_triples:
        orbit_min = min(tuple(sorted(int(p.mul[x, d]) for x in t)) for d in range(1, p.k + 1))
        if t == orbit_min:
            reps.append(t)
    return reps


def pasture_to_json(p: Pasture) -> str:
    mul = [[p.label(a), p.label(b), p.label(p.times(a, b))]
           for a in range(1, p.k + 1) for b in range(1, p.k + 1)]
    nulls = [[p.label(c) for c in t] for t in _null_orbit_reps(p)]
    return "\n".join([
        "{",
        f'  "name": {json.dumps(p.name)},',
        f'  "units": {json.dumps(list(p.units))},',
        _dump_rows("mul", mul),
        _dump_rows("null_generators", nulls, last=True),
        "}",
    ]) + "\n"


def load_pasture(path_or_name) -> Pasture:
    """A pasture file, or a built-in name such as ``sign`` or ``gf4``."""
    p = Path(path_or_name)
    if p.is_file():
        return pasture_from_json(p.read_text(), str(p))
    try:
        return builtin(str(path_or_name))
    except UnknownName:
        raise ParseError("no such file or built-in pasture", location=str(path_or_name)) from None


def save_pasture(p: Pasture, path) -> None:
    Path(path).write_text(pasture_to_json(p))


# -- systems --------------------------------------------------------------------

def system_to_json(sys: HyperplaneSystem) -> str:
    """Each hyperplane is named by its complement; values list f_H in ground order."""
    m, p = sys.matroid, sys.pasture
    rows = []
    for h, hm in enumerate(m.hyperplanes):
        rows.append({"complement": list(m.labels_of(m.full & ~hm)),
                     "values": [p.label(int(v)) for v in sys.values[h]]})
    return "\n".join([
        "{",
        f'  "matroid": {json.dumps(m.name)},',
        f'  "pasture": {json.dumps(p.name)},',
        f'  "elements": {json.dumps(list(m.labels))},',
        _dump_rows("functions", rows, last=True),
        "}",
    ]) + "\n"


def system_from_json(text: str, m: Matroid, p: Pasture, source: str = "<string>") -> HyperplaneSystem:
    doc = _parse_json(text, source)
    elements = _label_list(_field(doc, "elements", list, source), f"{source}:elements")
    if elements != list(m.labels):
        raise ValidationError(f"{source}: element order does not match the matroid")
    funcs = _field(doc, "functions", list, source)
    vals = [[0] * m.n for _ in m.hyperplanes]
    seen = set()
    for i, f in enumerate(funcs):
        where = f"{source}:functions[{i}]"
        comp = _label_list(_field(f, "complement", list, where), f"{where}:complement")
        row = _label_list(_field(f, "values", list, where), f"{where}:values")
        try:
            hm = m.full & ~m.mask(comp)
        except MatfoundError as exc:
            raise ParseError(str(exc), location=f"{where}:complement") from None
        if hm not in m.hyperplane_index:
            raise ValidationError(f"{where}: complement does not describe a hyperplane")
        if len(row) != m.n:
            raise ParseError("one value per element expected", location=f"{where}:values")
        h = m.hyperplane_index[hm]
        seen.add(h)
        try:
            vals[h] = [p.code(v) for v in row]
        except KeyError as exc:
            raise ParseError(str(exc), location=f"{where}:values") from None
    if len(seen) != len(m.hyperplanes):
        raise ValidationError(f"{source}: some hyperplanes have no function")
    sys = HyperplaneSystem(m, p, vals)
    try:
        check_support(sys)
    except MatfoundError as exc:
        raise ValidationError(f"{source}: {exc}") from exc
    return sys


def file_digest(path_or_name) -> str:
    """sha256 of a file's bytes, or the name itself for catalog/built-in names."""
    if os.path.isfile(path_or_name):
        return hashlib.sha256(Path(path_or_name).read_bytes()).hexdigest()[:16]
    return str(path_or_name)
