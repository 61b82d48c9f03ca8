"""Command-line front end.

Exit codes: 0 success (or local / bracket found), 2 nonlocal or signaling, 1 error.
Efficiencies and tolerances are read as exact rationals ("2/3", "0.7", "1e-4").
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .behavior import Behavior, apply_loss, check_no_signaling, format_fraction
from .bounds import bounds_table
from .inequality import BellFunctional, build_bipartite, build_multipartite, evaluate
from .lhv_oracle import LhvMaxResult, max_bell_value, merge_results
from .local_polytope import critical_eta, is_local
from .strategies import (
    DeterministicStrategy,
    LocalModel,
    degrade_model,
    modular_box_bipartite,
    modular_box_multipartite,
)

EXIT_OK, EXIT_ERROR, EXIT_NONLOCAL = 0, 1, 2

log = logging.getLogger("bellbound")


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _shard(text: str) -> tuple[int, int]:
    try:
        k, total = (int(t) for t in text.split("/"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"shard must look like K/TOTAL, got {text!r}") from exc
    if total < 1 or not 0 <= k < total:
        raise argparse.ArgumentTypeError(f"shard index must satisfy 0 <= K < TOTAL, got {text!r}")
    return k, total


def _read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _write_json(path, data):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def _load_behavior(path, eta=None) -> Behavior:
    b = Behavior.from_json(_read_json(path))
    return apply_loss(b, eta) if eta is not None else b


def cmd_construct(args) -> int:
    if args.kind == "bipartite":
        if len(args.inputs) != 2:
            raise ValueError("bipartite construction takes exactly two input counts")
        F = build_bipartite(*args.inputs)
        box = modular_box_bipartite(*args.inputs, F.prime)
    else:
        F = build_multipartite(args.inputs)
        box = modular_box_multipartite(args.inputs, F.prime)
    out = Path(args.out_dir)
    _write_json(out / "functional.json", F.to_json())
    _write_json(out / "box.json", box.to_json())
    print(f"P={F.prime} penalty={F.penalty}")
    print(f"wrote {out / 'functional.json'} and {out / 'box.json'}")
    return EXIT_OK


def cmd_check_ns(args) -> int:
    b = _load_behavior(args.behavior)
    report = check_no_signaling(b)
    if report.passed:
        print("no-signaling: passed (worst violation 0)")
        return EXIT_OK
    parties, outcomes, x, x2 = report.witness
    print(
        f"no-signaling: FAILED worst violation {format_fraction(report.worst_violation)} "
        f"parties={list(parties)} outcomes={list(outcomes)} inputs={list(x)} vs {list(x2)}"
    )
    return EXIT_NONLOCAL


def cmd_bell_value(args) -> int:
    F = BellFunctional.from_json(_read_json(args.functional))
    b = _load_behavior(args.behavior, args.eta)
    value = evaluate(F, b, permissive=args.permissive)
    sign = "positive (violated)" if value > 0 else "zero" if value == 0 else "negative"
    print(f"value={format_fraction(value)} ({float(value):.12g}) sign={sign}")
    return EXIT_OK


def _result_from_json(data: dict, F: BellFunctional) -> LhvMaxResult:
    argmax = None
    if data["argmax"] is not None:
        argmax = DeterministicStrategy(F.scenario, tuple(tuple(r) for r in data["argmax"]))
    return LhvMaxResult(data["max_value"], argmax, data["strategies_scanned"])


def cmd_lhv_max(args) -> int:
    F = BellFunctional.from_json(_read_json(args.functional))
    if args.merge:
        result = merge_results(_result_from_json(_read_json(p), F) for p in args.merge)
    else:
        result = max_bell_value(F, budget=args.budget, shard=args.shard, workers=args.workers)
    if args.shard is not None:
        # partial result for an external merge
        print(json.dumps(result.to_json()))
        return EXIT_OK
    argmax = None if result.argmax is None else [list(r) for r in result.argmax.responses]
    print(f"max={result.max_value} argmax={argmax} scanned={result.strategies_scanned}")
    print("local bound certified: I <= 0" if result.max_value <= 0 else "local bound exceeds 0")
    if args.json:
        _write_json(args.json, result.to_json())
    return EXIT_OK


def cmd_local_test(args) -> int:
    b = _load_behavior(args.behavior, args.eta)
    verdict = is_local(b, budget=args.budget, prepass=not args.no_prepass)
    if args.output:
        _write_json(args.output, verdict.to_json())
    if verdict.is_local:
        print(f"local: decomposition with {len(verdict.model.components)} deterministic components")
        return EXIT_OK
    print(f"nonlocal: separating functional with gap {format_fraction(verdict.gap)} ({float(verdict.gap):.6g})")
    return EXIT_NONLOCAL


def cmd_critical_eta(args) -> int:
    b = _load_behavior(args.behavior)
    bracket = critical_eta(b, args.tol, budget=args.budget, prepass=not args.no_prepass)
    if args.output:
        _write_json(args.output, bracket.to_json())
    if args.model_out and bracket.lower_verdict is not None:
        _write_json(args.model_out, bracket.lower_verdict.to_json())
    if args.witness_out and bracket.upper_verdict is not None:
        _write_json(args.witness_out, bracket.upper_verdict.to_json())
    print(
        f"critical eta in [{format_fraction(bracket.lower)}, {format_fraction(bracket.upper)}] "
        f"= [{float(bracket.lower):.8f}, {float(bracket.upper):.8f}] width {float(bracket.width):.3g}"
    )
    return EXIT_OK


def cmd_degrade(args) -> int:
    model = LocalModel.from_json(_read_json(args.model))
    out = degrade_model(model, args.eta1, args.eta2)
    _write_json(args.output, out.to_json())
    print(f"wrote model for eta={format_fraction(args.eta1)} to {args.output}")
    return EXIT_OK


def cmd_bounds_table(args) -> int:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["M", "N", "lower", "upper", "conjectural"])
    for row in bounds_table(args.m_list, args.n_max):
        if args.exact:
            upper = (
                format_fraction(row.upper_radicand)
                if row.N == 2
                else f"({format_fraction(row.upper_radicand)})^(1/{row.N - 1})"
            )
            lower = format_fraction(row.lower)
        else:
            upper = f"{row.upper:.12g}"
            lower = f"{float(row.lower):.12g}"
        writer.writerow([row.M, row.N, lower, upper, str(row.conjectural).lower()])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellbound",
        description="Detection-efficiency bounds for Bell tests in no-signaling theories.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="write the modular Bell functional and its no-signaling box")
    p.add_argument("kind", choices=["bipartite", "multi"])
    p.add_argument("--inputs", type=_int_list, required=True, help="inputs per party, e.g. 2,2")
    p.add_argument("--out-dir", default=".", help="directory for functional.json and box.json")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("check-ns", help="exact no-signaling check of a behavior file")
    p.add_argument("behavior")
    p.set_defaults(func=cmd_check_ns)

    p = sub.add_parser("bell-value", help="evaluate a functional on a behavior")
    p.add_argument("functional")
    p.add_argument("behavior")
    p.add_argument("--eta", type=_rational, help="apply detector loss first (behavior must be ideal)")
    p.add_argument("--permissive", action="store_true", help="allow signaling behaviors")
    p.set_defaults(func=cmd_bell_value)

    p = sub.add_parser("lhv-max", help="exhaustive maximum over deterministic local strategies")
    p.add_argument("functional")
    p.add_argument("--shard", type=_shard, help="scan only slice K of TOTAL; prints JSON for merging")
    p.add_argument("--merge", nargs="+", metavar="PART", help="merge shard JSON outputs instead of scanning")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--budget", type=int, help="max inner evaluations (default 1e8 or $BELLBOUND_BUDGET)")
    p.add_argument("--json", help="also write the result as JSON")
    p.set_defaults(func=cmd_lhv_max)

    p = sub.add_parser("local-test", help="exact LP membership in the local polytope")
    p.add_argument("behavior")
    p.add_argument("--eta", type=_rational, help="apply detector loss first")
    p.add_argument("-o", "--output", help="write the model or separating witness as JSON")
    p.add_argument("--budget", type=int, help="max vertex columns (default 1e5 or $BELLBOUND_BUDGET)")
    p.add_argument("--no-prepass", action="store_true", help="skip the floating-point seed")
    p.set_defaults(func=cmd_local_test)

    p = sub.add_parser("critical-eta", help="bisect the largest efficiency with a local model")
    p.add_argument("behavior", help="ideal no-signaling behavior")
    p.add_argument("--tol", type=_rational, default=Fraction(1, 10**4))
    p.add_argument("-o", "--output", help="write the bracket as JSON")
    p.add_argument("--model-out", help="write the local model at the lower end")
    p.add_argument("--witness-out", help="write the separating witness at the upper end")
    p.add_argument("--budget", type=int)
    p.add_argument("--no-prepass", action="store_true")
    p.set_defaults(func=cmd_critical_eta)

    p = sub.add_parser("degrade", help="rewrite a local model for a lower efficiency")
    p.add_argument("model")
    p.add_argument("--eta1", type=_rational, required=True, help="target efficiency")
    p.add_argument("--eta2", type=_rational, required=True, help="efficiency the model reproduces")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("bounds-table", help="CSV of lower/upper efficiency bounds")
    p.add_argument("--m-list", type=_int_list, default=[4, 16, 64, 256])
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--exact", action="store_true", help="render exact values instead of decimals")
    p.set_defaults(func=cmd_bounds_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if getattr(args, "tol", 1) <= 0:
        parser.error("--tol must be positive")
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
