"""Command-line front end.

Every subcommand builds a JSON-ready report.  ``--format text`` prints the same
data flattened to ``key: value`` lines.  Exit codes: 0 success, 1 mismatch
found by a check, 2 invalid input, 3 internal assertion.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources

from . import catalog, divisors, ideals, lattice
from .expr import ExpressionSyntaxError, format_series, parse_series, parse_tuple
from .recognizer import NOT_STABILIZED, recognize, tjurina, tjurina_search
from .series import DEFAULT_ORDER, Series, SeriesError, factor_xy, nth_root_unit

EXIT_OK, EXIT_MISMATCH, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2, 3


class Mismatch(Exception):
    """Carries a finished report whose check failed."""

    def __init__(self, result):
        super().__init__("mismatch")
        self.result = result


def _series(text: str, args) -> Series:
    return parse_series(text, args.order)


def cmd_recognize(args):
    f = _series(args.expr, args)
    rep = recognize(f)
    return {"input": format_series(f), "truncation_order": args.order, **rep.to_json()}


def cmd_tjurina(args):
    f = _series(args.expr, args)
    if args.order < args.degree + 2:
        raise SeriesError(f"--degree {args.degree} needs --order >= {args.degree + 2}")
    if args.search:
        value, bound = tjurina_search(f, args.degree)
    else:
        value, bound = tjurina(f, args.degree), args.degree
    stable = value != NOT_STABILIZED
    return {"input": format_series(f), "degree": bound, "stabilized": stable,
            "tjurina": value if stable else None}


def cmd_factor_xy(args):
    g = _series(args.expr, args)
    xy = Series.var("x", args.order) * Series.var("y", args.order)
    big_x, big_y = factor_xy(g - xy)
    assert (big_x * big_y - g).is_zero()
    return {"input": format_series(g), "X": format_series(big_x), "Y": format_series(big_y)}


def cmd_root(args):
    u = _series(args.expr, args)
    a = nth_root_unit(u, args.n)
    assert (a ** args.n - u).is_zero()
    return {"input": format_series(u), "n": args.n, "root": format_series(a)}


def cmd_intersect(args):
    a, b, c, d = (_series(t, args) for t in (args.a, args.b, args.c, args.d))
    out = ideals.intersect_cm(a, b, c, d)
    result = {"generators": [format_series(g) for g in out.gens]}
    if args.check:
        bound = args.degree
        span = ideals.intersect_bruteforce(ideals.LocalIdeal([a, b]), ideals.LocalIdeal([c, d]), bound)
        equal = ideals.spans_equal(out, span, bound)
        result["oracle"] = {"degree": bound, "equal": equal}
        if not equal:
            raise Mismatch(result)
    return result


def cmd_scenario_predict(args):
    c = catalog.ScenarioConfig.parse(args.scenario)
    pred = catalog.predict(c)
    out = {"scenario": str(c), "config": c.to_json(), "prediction": pred.to_json()}
    try:
        spec = catalog.kernel_for(c)
        out["local_map"] = {"modulus": spec.modulus, "images": list(spec.images[:-1]),
                            "labels": catalog.curve_labels(c)}
    except catalog.NonCyclicGroup:
        out["local_map"] = {"free_images": catalog.curve_labels(c)}
    return out


def cmd_scenario_crosscheck(args):
    if args.scenario:
        configs = [catalog.ScenarioConfig.parse(args.scenario)]
        manifest = {"configs": configs, "seeds": [args.seed], "order": args.order}
    else:
        manifest = catalog.load_manifest(None if args.manifest == "default" else args.manifest)
    reports = catalog.run_manifest(manifest, workers=args.workers)
    result = {"runs": [r.to_json() for r in reports],
              "total": len(reports), "mismatches": sum(not r.match for r in reports)}
    if result["mismatches"]:
        raise Mismatch(result)
    return result


def cmd_curve_class(args):
    f = _series(args.expr, args)
    gens = parse_tuple(args.curve, args.order)
    rep = recognize(f)
    cls = divisors.track_curve(f, gens, rep)
    return {"input": format_series(f), "curve": [format_series(g) for g in gens],
            "singularity": rep.label, "class": cls.to_json(), "text": str(cls)}


def cmd_picard(args):
    try:
        with open(args.input) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise lattice.LatticeError(f"cannot read {args.input}: {exc}") from exc
    return lattice.picard_report(lattice.PicardProblem.from_json(data))


COMMANDS = {
    "recognize": cmd_recognize,
    "tjurina": cmd_tjurina,
    "factor-xy": cmd_factor_xy,
    "root": cmd_root,
    "intersect": cmd_intersect,
    "scenario-predict": cmd_scenario_predict,
    "scenario-crosscheck": cmd_scenario_crosscheck,
    "curve-class": cmd_curve_class,
    "picard": cmd_picard,
}


def positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=positive, default=DEFAULT_ORDER, help="truncation order N (default 32)")
    common.add_argument("--degree", type=positive, default=8, help="degree bound D for oracles (default 8)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("text", "json"), default="text")

    p = argparse.ArgumentParser(prog="rdplocus", description="Local singularity and Picard group computations.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("recognize", parents=[common], help="decide the singularity type at the origin")
    s.add_argument("expr")
    s = sub.add_parser("tjurina", parents=[common], help="Tjurina number by linear algebra")
    s.add_argument("expr")
    s.add_argument("--search", action="store_true", help="smallest stabilising bound <= --degree")
    s = sub.add_parser("factor-xy", parents=[common], help="write x*y + f(x, y) as X*Y")
    s.add_argument("expr")
    s = sub.add_parser("root", parents=[common], help="n-th root of a unit")
    s.add_argument("expr")
    s.add_argument("--n", type=positive, required=True)
    s = sub.add_parser("intersect", parents=[common], help="(a, b) meet (c, d) = (ac, bc, d)")
    for name in "abcd":
        s.add_argument(name)
    s.add_argument("--check", action="store_true", help="compare with the linear-algebra oracle up to --degree")
    s = sub.add_parser("scenario-predict", parents=[common], help="predicted singularity and class map")
    s.add_argument("scenario", help="e.g. 'Spine{3,2}' or 'MixedTangency{m=2,n=2,q=3}'")
    s = sub.add_parser("scenario-crosscheck", parents=[common], help="prediction against the pipeline")
    s.add_argument("scenario", nargs="?")
    s.add_argument("--manifest", help="manifest JSON path, or 'default' for the shipped grid")
    s.add_argument("--workers", type=positive, default=1)
    s = sub.add_parser("curve-class", parents=[common], help="class of a smooth curve on an A_n germ")
    s.add_argument("expr")
    s.add_argument("--curve", required=True, help="generators, e.g. '(x, z)'")
    s = sub.add_parser("picard", parents=[common], help="Picard lattice from a JSON problem")
    s.add_argument("--input", required=True)
    return p


def load_schema() -> dict:
    return json.loads(resources.files("rdplocus").joinpath("data/report.schema.json").read_text())


def flatten(data, prefix: str = "") -> list[str]:
    if isinstance(data, dict) and data:
        lines = []
        for k, v in data.items():
            lines += flatten(v, f"{prefix}.{k}" if prefix else str(k))
        return lines
    if isinstance(data, list) and data and all(isinstance(v, dict) for v in data):
        lines = []
        for i, v in enumerate(data):
            lines += flatten(v, f"{prefix}[{i}]")
        return lines
    value = data if isinstance(data, str) else json.dumps(data)
    return [f"{prefix}: {value}"]


def execute(argv=None) -> tuple[int, dict, str]:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "scenario-crosscheck" and not args.scenario and not args.manifest:
        parser.error("scenario-crosscheck needs a scenario or --manifest")
    envelope = {"command": args.command, "exit_code": EXIT_OK, "result": None, "error": None}
    try:
        envelope["result"] = COMMANDS[args.command](args)
    except Mismatch as exc:
        envelope["result"] = exc.result
        envelope["exit_code"] = EXIT_MISMATCH
    except (SeriesError, ExpressionSyntaxError, catalog.ScenarioError, lattice.LatticeError, ValueError) as exc:
        envelope["exit_code"] = EXIT_INVALID
        envelope["error"] = {"type": type(exc).__name__, "message": str(exc)}
    except AssertionError as exc:
        envelope["exit_code"] = EXIT_INTERNAL
        envelope["error"] = {"type": "AssertionError", "message": str(exc) or "internal check failed"}
    return envelope["exit_code"], envelope, args.format


def main(argv=None) -> int:
    code, envelope, fmt = execute(argv)
    if fmt == "json":
        print(json.dumps(envelope, indent=2))
    else:
        stream = sys.stderr if envelope["error"] else sys.stdout
        print("\n".join(flatten(envelope)), file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
