"""Command-line front end.

    invmeans eval --K beta --x 1,2,3
    invmeans iterate --M '[arith,geo]' --x 1,2 --trace --format csv
    invmeans complement --K geometric --M '[arith,harm]' --S 2 --x 1,4
    invmeans hfam-closure --p 3 --depth 1

Means are given as JSON mean-specs, as shorthand names (``arith``, ``geo``,
``harm``, ``beta``, ``gini``, ``min``, ``max``, ``power:2``, ``proj:2``,
``hfam:1/4``, ``subset:1+2``) or as a path to a JSON file.  Exit status is 0
on success, 2 on domain errors (with a JSON error object on stdout) and 1 on
usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import hfamily
from .complementary import (
    ComplementSpec,
    closure_generate,
    complement_mean,
    complement_solve,
    solve_completion,
    subset_from_mask,
)
from .errors import ArityMismatch, MeanError, NotConverged
from .funceq import build_F, func_from_spec, verify_solution
from .invariance import DEFAULT_TOL, IterationConfig, check_invariance, iterate_mapping
from .means import (
    Arithmetic,
    BetaType,
    Domain,
    Geometric,
    GiniF,
    Harmonic,
    HFamily,
    Iterated,
    Max,
    Mean,
    MeanVector,
    Min,
    Power,
    Projection,
    SampleConfig,
    SubsetArithmetic,
    eval_mean,
    from_spec,
    to_spec,
)

TOL_ENV = "INVMEANS_TOL"

_NAMES = {
    "a": Arithmetic, "arith": Arithmetic, "arithmetic": Arithmetic,
    "g": Geometric, "geo": Geometric, "geometric": Geometric,
    "h": Harmonic, "harm": Harmonic, "harmonic": Harmonic,
    "b": BetaType, "beta": BetaType,
    "f": GiniF, "gini": GiniF, "gini_f": GiniF,
    "min": Min, "max": Max,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _read(text: str) -> str:
    if os.path.isfile(text):
        with open(text) as fh:
            return fh.read()
    return text


def parse_mean(text: str) -> Mean:
    text = _read(text).strip()
    if text.startswith("{"):
        return from_spec(json.loads(text))
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    if name in _NAMES and not arg:
        return _NAMES[name]()
    if name == "power":
        return Power(float(arg))
    if name in ("proj", "projection"):
        return Projection(int(arg))
    if name in ("hfam", "hfamily"):
        return HFamily(Fraction(arg))
    if name in ("subset", "subset_arithmetic"):
        return SubsetArithmetic(tuple(int(i) for i in arg.split("+")))
    raise UsageError(f"cannot parse mean {text!r}")


def parse_mapping(text: str) -> MeanVector:
    text = _read(text).strip()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        inner = text.strip("[]")
        return MeanVector(tuple(parse_mean(part) for part in inner.split(",")))
    if not isinstance(obj, list):
        raise UsageError("a mean-type mapping must be a JSON array of mean-specs")
    return MeanVector(tuple(from_spec(o) if isinstance(o, dict) else parse_mean(str(o)) for o in obj))


def parse_vector(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def parse_points(text: str) -> list[tuple[float, ...]]:
    return [parse_vector(part) for part in text.split(";") if part.strip()]


def parse_subset(text: str, p: int) -> tuple[int, ...]:
    text = text.strip()
    if text.startswith("mask:"):
        return subset_from_mask(int(text[5:], 0), p)
    if text.startswith("0b"):
        return subset_from_mask(int(text, 2), p)
    return tuple(int(i) for i in text.split(","))


def parse_fixed(text: str) -> dict[int, Mean]:
    obj = json.loads(_read(text))
    if isinstance(obj, dict):
        return {int(k): from_spec(v) if isinstance(v, dict) else parse_mean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return {i + 1: from_spec(v) if isinstance(v, dict) else parse_mean(v) for i, v in enumerate(obj) if v is not None}
    raise UsageError("--fixed must be a JSON object {index: mean-spec} or a list with nulls on S")


def _default_tol() -> float:
    env = os.environ.get(TOL_ENV)
    return float(env) if env else DEFAULT_TOL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--tol", type=float, default=None, help=f"defaults to ${TOL_ENV} or {DEFAULT_TOL}")
    common.add_argument("--format", choices=("json", "csv", "dot"), default="json")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--samples", type=int, default=200)

    parser = _Parser(prog="invmeans", description="Invariant means and complementary averages.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", parents=[common], help="evaluate a mean at a point")
    p.add_argument("--K", "--mean", dest="K", required=True)
    p.add_argument("--x", required=True)

    p = sub.add_parser("iterate", parents=[common], help="iterate a mean-type mapping to the diagonal")
    p.add_argument("--M", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--trace", action="store_true")

    p = sub.add_parser("invariance-check", parents=[common], help="sampled residual of K o M = K")
    p.add_argument("--K", required=True)
    p.add_argument("--M", required=True)
    p.add_argument("--x", default=None, help="check only these points (';'-separated)")

    p = sub.add_parser("complement", parents=[common], help="K-complementary average at a point")
    p.add_argument("--K", required=True)
    p.add_argument("--M", required=True)
    p.add_argument("--S", required=True)
    p.add_argument("--x", required=True)

    p = sub.add_parser("complete", parents=[common], help="complete a partial mapping at a point")
    p.add_argument("--K", required=True)
    p.add_argument("--fixed", required=True)
    p.add_argument("--S", required=True)
    p.add_argument("--x", required=True)

    p = sub.add_parser("closure", parents=[common], help="numeric closure under complementary averaging")
    p.add_argument("--K", required=True)
    p.add_argument("--M", required=True)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--exact", action=argparse.BooleanOptionalAction, default=None)

    p = sub.add_parser("hfam-closure", parents=[common], help="exact closure of (A, B_p, ..., B_p) under G")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--budget", type=int, default=10_000)

    p = sub.add_parser("funceq-verify", parents=[common], help="check F = phi o K against F o M = F")
    p.add_argument("--phi", required=True)
    p.add_argument("--K", required=True, help="a mean, or 'iterated' for the limit of M^n")
    p.add_argument("--M", required=True)
    p.add_argument("--x", default=None)
    return parser


def _run(args) -> tuple[object, str]:
    tol = args.tol if args.tol is not None else _default_tol()
    icfg = IterationConfig(tol=tol)
    scfg = SampleConfig(count=args.samples, seed=args.seed, domain=Domain(0.0, 10.0))
    cmd = args.command

    if cmd == "eval":
        K = parse_mean(args.K)
        return {"mean": to_spec(K), "x": list(parse_vector(args.x)), "value": eval_mean(K, parse_vector(args.x))}, "json"

    if cmd == "iterate":
        M = parse_mapping(args.M)
        cfg = IterationConfig(tol=tol, max_iter=args.max_iter, keep_trace=args.trace or args.format == "csv")
        report = iterate_mapping(M, parse_vector(args.x), cfg)
        if args.format == "csv":
            return report.trace_csv(), "text"
        return report.to_json(), "json"

    if cmd == "invariance-check":
        K, M = parse_mean(args.K), parse_mapping(args.M)
        points = parse_points(args.x) if args.x else None
        return check_invariance(K, M, scfg, points).to_json(), "json"

    if cmd == "complement":
        M = parse_mapping(args.M)
        spec = ComplementSpec(parse_mean(args.K), M, parse_subset(args.S, M.p))
        res = complement_solve(spec, parse_vector(args.x), icfg)
        out = res.to_json()
        out["S"] = list(spec.S)
        out["mean"] = to_spec(complement_mean(spec))
        return out, "json"

    if cmd == "complete":
        x = parse_vector(args.x)
        S = parse_subset(args.S, len(x))
        value = solve_completion(parse_mean(args.K), parse_fixed(args.fixed), S, x, icfg)
        return {"value": value, "S": list(S), "x": list(x)}, "json"

    if cmd == "closure":
        tree = closure_generate(parse_mean(args.K), parse_mapping(args.M), args.depth, scfg, args.budget, args.exact)
        if args.format == "dot":
            return tree.to_dot(), "text"
        return tree.to_json(), "json"

    if cmd == "hfam-closure":
        closure = hfamily.closure_enumerate(args.p, args.depth, budget=args.budget)
        if args.format == "dot":
            return closure.to_dot(), "text"
        out = closure.to_json()
        r3, mem = hfamily.verify_remark3(closure), hfamily.verify_membership(closure)
        out["denominators_ok"] = r3.holds
        out["membership"] = mem.holds
        return out, "json"

    if cmd == "funceq-verify":
        M = parse_mapping(args.M)
        K = Iterated(M) if args.K.strip().lower() == "iterated" else parse_mean(args.K)
        phi = func_from_spec(json.loads(_read(args.phi))) if args.phi.strip().startswith("{") else func_from_spec({"kind": args.phi})
        points = parse_points(args.x) if args.x else None
        rep = verify_solution(build_F(phi, K), M, K, scfg, points)
        if args.format == "csv":
            rows = ["equation,S_mask,residual", f"eq2,,{rep.eq2_residual!r}"]
            rows += [f"eq3,{k},{v!r}" for k, v in sorted(rep.eq3_residuals.items())]
            rows.append(f"representation,,{rep.representation_residual!r}")
            return "\n".join(rows) + "\n", "text"
        return rep.to_json(), "json"

    raise UsageError(f"unknown command {cmd}")


def _emit(payload, kind: str, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n" if kind == "json" else payload
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = None
    try:
        args = parser.parse_args(argv)
        if args.format == "csv" and args.command not in ("iterate", "funceq-verify"):
            raise UsageError("csv output is only available for iterate traces and residual tables")
        if args.format == "dot" and args.command not in ("closure", "hfam-closure"):
            raise UsageError("dot output is only available for closures")
        payload, kind = _run(args)
    except (UsageError, ArityMismatch, ValueError, KeyError, json.JSONDecodeError) as exc:
        if isinstance(exc, MeanError) and not isinstance(exc, ArityMismatch):
            return _domain_error(exc, getattr(args, "out", None))
        print(f"invmeans: error: {exc}", file=sys.stderr)
        return 1
    except MeanError as exc:
        return _domain_error(exc, getattr(args, "out", None))
    _emit(payload, kind, args.out)
    return 0


def _domain_error(exc: MeanError, out) -> int:
    obj = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, NotConverged) and exc.report is not None:
        obj["report"] = exc.report.to_json()
    _emit(obj, "json", out)
    return 2


if __name__ == "__main__":
    sys.exit(main())
