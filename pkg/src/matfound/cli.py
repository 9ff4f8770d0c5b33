"""``matfound`` command line.

Exit codes: 0 pass, 1 a verification failed, 2 bad input or unmet
hypothesis, 3 search budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .constructions import (
    Gluing,
    cosegment_segment_exchange,
    delta_wye,
    direct_sum,
    generalized_parallel_connection,
    segment_cosegment_exchange,
    theta,
    two_sum,
)
from .errors import HypothesisFailed, MatfoundError, SearchBudgetExceeded
from .io import file_digest, load_matroid, load_pasture, matroid_to_json
from .matroid import coloops, components, dual, loops, simplify
from .pasture import all_morphisms
from .representation import DEFAULT_BUDGET
from .verify import (
    Report,
    census_report,
    orientable_report,
    verify_exchange,
    verify_gluing,
    verify_two_sum,
)

RENAME = "R."


def _labels(text: str | None) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()] if text else []


def _pairs(text: str | None) -> list[tuple[str, str]]:
    out = []
    for item in _labels(text):
        if "=" not in item:
            raise HypothesisFailed(f"identification: expected a=b, got {item!r}")
        a, b = item.split("=", 1)
        out.append((a.strip(), b.strip()))
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--quiet", action="store_true", help="print only counts")
    p.add_argument("--threads", type=int, default=None, help="worker threads (also MF_THREADS)")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search node cap")
    p.add_argument("--pastures", default=None, help="comma-separated pasture names or files")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="matfound",
                                 description="Matroid representations over finite pastures.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("info", help="summarize a matroid")
    p.add_argument("matroid")

    p = sub.add_parser("construct", help="build a matroid and write it as JSON")
    p.add_argument("kind", choices=["gpc", "2sum", "scse", "cssc", "dy", "theta", "dual",
                                    "directsum"])
    p.add_argument("inputs", nargs="*")
    p.add_argument("--identify", help="a=b pairs gluing left labels to right labels")
    p.add_argument("--p", help="basepoint of a 2-sum")
    p.add_argument("--t", help="triangle for Delta-Wye")
    p.add_argument("--x", help="segment (or cosegment) labels")
    p.add_argument("--n", type=int, help="Theta_n size")
    p.add_argument("--name", default="")
    p.add_argument("-o", "--output", help="output file (default stdout)")

    p = sub.add_parser("census", help="count representation classes")
    p.add_argument("matroid")
    p.add_argument("--classes", choices=["rescaling", "iso", "both"], default="both")
    _common(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("theorem", choices=["a", "b", "c"],
                   help="a: parallel connection, b: 2-sum, c: segment-cosegment exchange")
    p.add_argument("--m1")
    p.add_argument("--m2")
    p.add_argument("--m")
    p.add_argument("--identify")
    p.add_argument("--p")
    p.add_argument("--x")
    _common(p)

    p = sub.add_parser("orientable", help="decide orientability")
    p.add_argument("matroid")
    _common(p)

    p = sub.add_parser("morphisms", help="list pasture morphisms")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--quiet", action="store_true")
    return ap


def _need(value, flag: str):
    if not value:
        raise HypothesisFailed(f"arguments: {flag} is required")
    return value


def _construct(args) -> str:
    ins = [load_matroid(x) for x in args.inputs]
    kind = args.kind

    def want(k):
        if len(ins) != k:
            raise HypothesisFailed(f"arguments: construct {kind} takes {k} matroid(s)")

    if kind == "theta":
        m = theta(_need(args.n, "--n"), args.name or None)
    elif kind == "gpc":
        want(2)
        g = Gluing(ins[0], ins[1], _pairs(_need(args.identify, "--identify")))
        m = generalized_parallel_connection(g, rename=RENAME, name=args.name)
    elif kind == "2sum":
        want(2)
        m = two_sum(ins[0], ins[1], _need(args.p, "--p"), rename=RENAME, name=args.name)
    elif kind == "scse":
        want(1)
        m = segment_cosegment_exchange(ins[0], _labels(_need(args.x, "--x")), name=args.name)
    elif kind == "cssc":
        want(1)
        m = cosegment_segment_exchange(ins[0], _labels(_need(args.x, "--x")), name=args.name)
    elif kind == "dy":
        want(1)
        m = delta_wye(ins[0], _labels(_need(args.t, "--t")), name=args.name)
    elif kind == "dual":
        want(1)
        m = dual(ins[0])
    else:
        want(2)
        m = direct_sum(ins[0], ins[1], rename=RENAME, name=args.name)
    return matroid_to_json(m)


def _info(args) -> str:
    m = load_matroid(args.matroid)
    doc = {
        "name": m.name,
        "elements": list(m.labels),
        "rank": m.rank,
        "bases": len(m.bases),
        "hyperplanes": len(m.hyperplanes),
        "corank2_flats": len(m.corank2_flats),
        "circuits": len(m.circuits),
        "loops": list(m.labels_of(loops(m))),
        "coloops": list(m.labels_of(coloops(m))),
        "simple": simplify(m)[0].n == m.n,
        "components": [sorted(c, key=m.index.get) for c in components(m)],
    }
    return json.dumps(doc, indent=2) + "\n"


def _report(args) -> Report:
    pastures = _labels(args.pastures) or None
    kw = {"budget": args.budget, "threads": args.threads}
    if args.cmd == "census":
        m = load_matroid(args.matroid)
        return census_report(m, pastures, args.classes,
                             inputs={"matroid": file_digest(args.matroid)}, **kw)
    if args.cmd == "orientable":
        m = load_matroid(args.matroid)
        return orientable_report(m, inputs={"matroid": file_digest(args.matroid)}, **kw)
    if args.theorem == "a":
        m1, m2 = load_matroid(_need(args.m1, "--m1")), load_matroid(_need(args.m2, "--m2"))
        g = Gluing(m1, m2, _pairs(_need(args.identify, "--identify")))
        inputs = {"m1": file_digest(args.m1), "m2": file_digest(args.m2),
                  "identify": args.identify}
        return verify_gluing(g, pastures, rename=RENAME, inputs=inputs, **kw)
    if args.theorem == "b":
        m1, m2 = load_matroid(_need(args.m1, "--m1")), load_matroid(_need(args.m2, "--m2"))
        inputs = {"m1": file_digest(args.m1), "m2": file_digest(args.m2), "p": args.p}
        return verify_two_sum(m1, m2, _need(args.p, "--p"), pastures, rename=RENAME,
                              inputs=inputs, **kw)
    m = load_matroid(_need(args.m, "--m"))
    inputs = {"m": file_digest(args.m), "x": args.x}
    return verify_exchange(m, _labels(_need(args.x, "--x")), pastures, inputs=inputs, **kw)


def _morphisms(args) -> str:
    src, tgt = load_pasture(args.source), load_pasture(args.target)
    maps = all_morphisms(src, tgt)
    if args.quiet:
        return f"{len(maps)}\n"
    doc = {"source": src.name, "target": tgt.name, "count": len(maps),
           "morphisms": [f.as_labels() for f in maps]}
    return json.dumps(doc, indent=2) + "\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None):
        os.environ["MF_THREADS"] = str(args.threads)
    try:
        if args.cmd == "info":
            sys.stdout.write(_info(args))
            return 0
        if args.cmd == "construct":
            text = _construct(args)
            if args.output:
                with open(args.output, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return 0
        if args.cmd == "morphisms":
            sys.stdout.write(_morphisms(args))
            return 0
        rep = _report(args)
    except SearchBudgetExceeded as exc:
        print(f"error: search budget exceeded: {exc}", file=sys.stderr)
        return 3
    except MatfoundError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(rep.counts_text() if args.quiet else rep.to_text())
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
