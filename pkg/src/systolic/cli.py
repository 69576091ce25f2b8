"""Command-line front end: build, compute, verify and tabulate.

Exit codes: 0 all checks pass, 1 a verification failed, 2 usage or input
error, 3 enumeration not certified within budget.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from pathlib import Path

from . import bounds
from .hypmath import TRIG, ideal_trirectangle_side, pants_perp
from .pantsgraph import bridges, modified_k33, signature
from .surface import FNSurface, HolonomyError, SurfaceFormatError, build_holonomy
from .systole import (
    SearchBudget,
    SpectrumResult,
    enumerate_geodesics,
    homology_class,
    not_straight_witness,
    systole_report,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_UNCERTIFIED = 0, 1, 2, 3
FLOAT_FMT = "#.12g"
TWIST_RANGE = 3.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x) -> str:
    return format(x, FLOAT_FMT)


def _num(x):
    """Float rounded to the report precision; JSON keeps it numeric."""
    if x is None or isinstance(x, (bool, int, str)):
        return x
    return float(_fmt(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return _num(obj)
    return obj


def _csv_text(config: dict, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    for k, v in config.items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _json_text(config: dict, result) -> str:
    return json.dumps({"config": _jsonable(config), "result": _jsonable(result)}, indent=2) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _range(text: str, name: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(".."))
    except ValueError:
        raise UsageError(f"--{name}: expected A..B with integers, got {text!r}") from None
    if a < 1 or b < a:
        raise UsageError(f"--{name}: need 1 <= A <= B, got {text!r}")
    return a, b


def _budget(args) -> SearchBudget:
    return SearchBudget(max_depth=args.max_depth, max_nodes=args.max_nodes, threads=args.threads)


def _budget_config(args) -> dict:
    return {"max_depth": args.max_depth, "max_nodes": args.max_nodes,
            "threads": "env" if args.threads is None else args.threads}


def k33_surface(twist_seed: int | None = None, length: float = TRIG.boundary) -> FNSurface:
    """Modified K_{3,3} surface, every pants curve of the given length; twists
    are 0 or drawn uniformly from [-3, 3] with the given seed."""
    graph = modified_k33()
    if twist_seed is None:
        twists = (0.0,) * graph.n_edges
    else:
        rng = random.Random(twist_seed)
        twists = tuple(rng.uniform(-TWIST_RANGE, TWIST_RANGE) for _ in range(graph.n_edges))
    return FNSurface.uniform(graph, length, twists)


def _load(path: str):
    try:
        surface = FNSurface.load(path)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from None
    except SurfaceFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None
    try:
        return surface, build_holonomy(surface)
    except HolonomyError as exc:
        raise UsageError(f"{path}: holonomy validation failed: {exc}") from None


def _record_dict(rep, r) -> dict:
    return {"word": rep.format(r.word), "length": r.length,
            "hclass": list(r.hclass), "homTrivial": r.hom_trivial}


def _spectrum_dict(rep, spec: SpectrumResult) -> dict:
    out = dict(spec.summary())
    out.update(depth=spec.depth, nodes=spec.nodes, slack=spec.slack, diagnostic=spec.diagnostic)
    out["records"] = [_record_dict(rep, r) for r in spec.records]
    return out


# Commands

def cmd_build(args) -> int:
    surface = k33_surface(args.twist_seed, args.length)
    sys.stderr.write(f"# command=build {args.target} twist_seed={args.twist_seed} "
                     f"length={_fmt(args.length)}\n")
    _emit(surface.to_json() + "\n", args.output)
    return EXIT_OK


def cmd_compute(args) -> int:
    if not (args.cutoff > 0 and math.isfinite(args.cutoff)):
        raise UsageError("--cutoff must be a positive finite number")
    surface, rep = _load(args.surface)
    spec = enumerate_geodesics(rep, args.cutoff, _budget(args))
    g, n = signature(surface.graph)
    config = {"command": "compute", "surface": args.surface, "signature": f"({g},{n})",
              "cutoff": _fmt(args.cutoff), "format": args.format, **_budget_config(args)}
    if args.format == "csv":
        rows = [[rep.format(r.word), r.length, " ".join(map(str, r.hclass)), str(r.hom_trivial).lower()]
                for r in spec.records]
        config.update(certified=str(spec.certified).lower(), depth=spec.depth)
        text = _csv_text(config, ["word", "length", "hclass", "homTrivial"], rows)
    else:
        text = _json_text(config, _spectrum_dict(rep, spec))
    _emit(text, args.output)
    return EXIT_OK if spec.certified else EXIT_UNCERTIFIED


def cmd_systole(args) -> int:
    surface, rep = _load(args.surface)
    rpt = systole_report(rep, _budget(args))
    g, n = signature(surface.graph)
    config = {"command": "systole", "surface": args.surface, "signature": f"({g},{n})",
              **_budget_config(args)}
    result = {
        "systole": rpt.systole,
        "witnesses": [_record_dict(rep, r) for r in rpt.witnesses],
        "homSystole": rpt.hom_systole,
        "homWitnesses": [_record_dict(rep, r) for r in rpt.hom_witnesses],
        "cutoff": rpt.spectrum.cutoff,
        "certified": rpt.certified,
    }
    _emit(_json_text(config, result), args.output)
    return EXIT_OK if rpt.certified else EXIT_UNCERTIFIED


def verify_k33(twist_seed: int | None = None, budget: SearchBudget = SearchBudget()):
    """All checks on the modified K_{3,3} surface: (name, passed, detail)
    rows plus the certification flag of the enumeration."""
    surface = k33_surface(twist_seed)
    rep = build_holonomy(surface)
    sys_len, floor = TRIG.boundary, TRIG.transversal
    spec = enumerate_geodesics(rep, floor - 1e-6, budget)
    recs = spec.records
    at_sys = [r for r in recs if abs(r.length - sys_len) <= 1e-8]
    bridge = sorted(bridges(surface.graph))
    sigma1 = rep.pants_curve_words[bridge[0]] if len(bridge) == 1 else None
    sigma1_trivial = sigma1 is not None and homology_class(rep, sigma1)[1]
    trivial = [r for r in at_sys if r.hom_trivial]
    straight = not_straight_witness(sys_len)
    checks = [
        ("systole", spec.systole is not None and abs(spec.systole - sys_len) <= 1e-8,
         f"systole = {spec.systole:.10f} (4·arcsinh 1)" if spec.systole else "systole = none"),
        ("count", len(at_sys) == 11, f"count = {len(at_sys)}"),
        ("transversal floor", len(recs) == len(at_sys),
         f"geodesics below 8·arcsinh(1/2) - 1e-6 = {_fmt(floor - 1e-6)}: {len(recs)}"),
        ("sigma1 trivial", sigma1_trivial and len(trivial) == 1,
         f"sigma1 = {rep.format(sigma1) if sigma1 else 'none'}, trivial systoles = {len(trivial)}"),
        ("nontrivial witnesses", len(at_sys) - len(trivial) == 10,
         f"nontrivial systoles = {len(at_sys) - len(trivial)}"),
        ("hom systole", spec.hom_systole is not None and abs(spec.hom_systole - sys_len) <= 1e-8,
         f"hom systole = {_fmt(spec.hom_systole) if spec.hom_systole else 'none'}"),
        ("non-straight", straight.witness and abs(straight.perpendicular - TRIG.side) <= 1e-12
         and abs(straight.perpendicular - sys_len / 2) <= 1e-12,
         f"h = {straight.perpendicular:.12f}, half sigma1 = {straight.half_boundary:.12f}"),
        ("pants perp", abs(pants_perp(sys_len, sys_len, sys_len) - TRIG.dmin) <= 1e-12,
         f"d = {pants_perp(sys_len, sys_len, sys_len):.12f} (2·arcsinh 1/2)"),
        ("trirectangle", abs(ideal_trirectangle_side(TRIG.a1) - TRIG.a1) <= 1e-12,
         f"fixed point = {ideal_trirectangle_side(TRIG.a1):.12f} (arcsinh 1)"),
    ]
    return checks, spec


def cmd_verify(args) -> int:
    checks, spec = verify_k33(args.twist_seed, _budget(args))
    config = {"command": f"verify {args.target}", "twist_seed": args.twist_seed,
              "format": args.format, **_budget_config(args)}
    if args.format == "json":
        result = {"checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in checks],
                  "certified": spec.certified, "depth": spec.depth}
        text = _json_text(config, result)
    else:
        lines = [f"# {k}={v}" for k, v in config.items()]
        lines += [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in checks]
        lines.append(f"certified = {str(spec.certified).lower()} (depth {spec.depth})")
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    if not all(ok for _, ok, _ in checks):
        return EXIT_FAIL
    return EXIT_OK if spec.certified else EXIT_UNCERTIFIED


def cmd_bounds(args) -> int:
    if args.table == "table":
        ga, gb = _range(args.g, "g")
        ma, mb = _range(args.m, "m")
        config = {"command": "bounds table", "g": args.g, "m": args.m}
        rows = []
        for g in range(ga, gb + 1):
            for m in range(ma, mb + 1):
                c = bounds.hairy_torus_certificate(g, m)
                rows.append([g, m, c.n, c.hom_sys_lower, c.sys_upper, str(c.verdict).lower(), c.margin])
        text = _csv_text(config, ["g", "m", "n", "lower", "upper", "verdict", "margin"], rows)
        _emit(text, args.output)
        return EXIT_OK
    if args.gmax < 1:
        raise UsageError("--gmax must be >= 1")
    if args.table == "minimal-m":
        config = {"command": "bounds minimal-m", "gmax": args.gmax}
        rows = [[g, bounds.minimal_m(g)] for g in range(1, args.gmax + 1)]
        _emit(_csv_text(config, ["g", "minimalM"], rows), args.output)
        return EXIT_OK
    config = {"command": "bounds proposition", "gmax": args.gmax,
              "monotonicity": "assumed (" + bounds.MONOTONICITY_NOTE + ")"}
    table = bounds.proposition_check(args.gmax)
    rows = [[r.g, r.m, r.n, r.lower, r.upper, r.margin, str(r.certificate).lower(),
             str(r.monotone_in_n).lower(), "assumed", str(r.passed).lower()] for r in table]
    header = ["g", "m", "n", "lower", "upper", "margin", "certificate",
              "boundMonotoneInN", "homSysMonotoneInN", "passed"]
    _emit(_csv_text(config, header, rows), args.output)
    return EXIT_OK if all(r.passed for r in table) else EXIT_FAIL


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="systolic", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def search_flags(q):
        q.add_argument("--max-depth", type=int, default=SearchBudget.max_depth)
        q.add_argument("--max-nodes", type=int, default=SearchBudget.max_nodes)
        q.add_argument("--threads", type=int, default=None)
        q.add_argument("-o", "--output", default=None)

    q = sub.add_parser("build", help="write a surface file")
    q.add_argument("target", choices=["k33"])
    q.add_argument("--twist-seed", type=int, default=None)
    q.add_argument("--length", type=float, default=TRIG.boundary)
    q.add_argument("-o", "--output", default=None)
    q.set_defaults(func=cmd_build)

    q = sub.add_parser("compute", help="length spectrum up to a cutoff")
    q.add_argument("surface")
    q.add_argument("--cutoff", type=float, required=True)
    q.add_argument("--format", choices=["json", "csv"], default="json")
    search_flags(q)
    q.set_defaults(func=cmd_compute)

    q = sub.add_parser("systole", help="systole and homological systole")
    q.add_argument("surface")
    search_flags(q)
    q.set_defaults(func=cmd_systole)

    q = sub.add_parser("verify", help="check the modified K33 example")
    q.add_argument("target", choices=["k33"])
    q.add_argument("--twist-seed", type=int, default=None)
    q.add_argument("--format", choices=["text", "json"], default="text")
    search_flags(q)
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("bounds", help="hairy-torus certificates")
    bsub = q.add_subparsers(dest="table", required=True, parser_class=_Parser)
    t = bsub.add_parser("table")
    t.add_argument("--g", required=True)
    t.add_argument("--m", required=True)
    t.add_argument("-o", "--output", default=None)
    for name in ("minimal-m", "proposition"):
        t = bsub.add_parser(name)
        t.add_argument("--gmax", type=int, required=True)
        t.add_argument("-o", "--output", default=None)
    q.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
        if getattr(args, "max_depth", 3) < 1 or getattr(args, "max_nodes", 1) < 1:
            raise UsageError("search limits must be positive")
        if getattr(args, "threads", None) is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"systolic: error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ValueError as exc:
        sys.stderr.write(f"systolic: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
