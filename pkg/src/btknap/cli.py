"""Command-line entry point.

Exit codes: 0 success, 1 verification negative, 2 infeasible parameters,
3 budget exceeded, 4 input error.

Examples::

    btknap optimize --check
    btknap generate --n 8 --beta 1/2 --gamma 1/4 --alpha 3 --N auto --solver smallest --out out/
    btknap verify out/instance_Q000.json
    btknap width out/instance_Q000.json --algorithm full_backtrack
    btknap table --point 1/2,1/4 --n 8 12 16 --optimal
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import bounds
from .adversary import (
    SOLVERS,
    AdversaryParams,
    InfeasibleParamsError,
    completed_instance,
    certify,
    designated_selector,
    iter_game,
    params_feasible,
    refute_capped_solver,
    witness_all_Q,
)
from .btmodel import (
    best_feasible,
    build_tree,
    extract_solutions,
    full_backtrack,
    greedy_largest_fit,
    tree_width,
    width_capped,
)
from .knapsack import (
    DEFAULT_ENUM_CAP,
    DEFAULT_SIGNED_CAP,
    BudgetError,
    InstanceFormatError,
    SimpleKnapsackInstance,
    all_subset_sums_distinct,
    optimum_bruteforce,
    subsets_summing_to,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_INFEASIBLE, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3, 4


class _InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse's own exit status 2 would read as "infeasible parameters"
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from None


def _big_int(text: str) -> int | str:
    if text == "auto":
        return text
    if not text.isdigit():
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'auto', got {text!r}")
    return int(text)


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=_fraction, default=Fraction(1, 2))
    p.add_argument("--gamma", type=_fraction, default=Fraction(1, 4))
    p.add_argument("--alpha", type=_fraction, default=None, help="default: midpoint of the valid interval")
    p.add_argument("--N", type=_big_int, default="auto", help="capacity, or 'auto' for 10*n*3^n")
    p.add_argument("--U", type=int, default=None, help="slack radius (default 3^n)")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", choices=sorted(SOLVERS), default="smallest")
    p.add_argument("--seed", type=int, default=0)


def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP, help="max items for brute force")
    p.add_argument(
        "--signed-cap", type=int, default=DEFAULT_SIGNED_CAP,
        help="max items in a signed-sum set (3^k values)",
    )


def _params(args: argparse.Namespace) -> AdversaryParams:
    N = None if args.N == "auto" else args.N
    return AdversaryParams.with_defaults(args.n, args.beta, args.gamma, args.alpha, N, args.U)


def _dump(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _load_instance(path: str) -> SimpleKnapsackInstance:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc}") from None
    try:
        return SimpleKnapsackInstance.loads(text)
    except InstanceFormatError as exc:
        raise _InputError(f"{path}: {exc}") from None


def _parse_selector(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise _InputError(f"bad selector {text!r}; expected comma-separated indices") from None


def cmd_optimize(args: argparse.Namespace) -> int:
    opt = bounds.optimal_gamma()
    base = bounds.optimal_base()
    log2 = math.log2(base)
    if args.json:
        sys.stdout.write(_dump({
            "gamma": opt.numeric,
            "gamma_closed_form": opt.closed_form,
            "base": base,
            "log2": log2,
        }))
    else:
        print(f"gamma {opt.numeric:.12f}")
        print(f"base {base:.12f}")
        print(f"log2 {log2:.12f}")
    if args.check:
        checks = {
            "gamma closed form vs bisection": abs(opt.numeric - opt.closed_form) <= 1e-10,
            "base equals golden ratio": abs(base - bounds.GOLDEN_RATIO) <= 1e-9,
        }
        for name, ok in checks.items():
            print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
        return EXIT_OK if all(checks.values()) else EXIT_NEGATIVE
    return EXIT_OK


def cmd_params(args: argparse.Namespace) -> int:
    params = _params(args)
    verdict = params_feasible(params)
    doc = {"params": params.to_document(), "feasible": verdict.ok}
    if not verdict:
        doc["violated"] = verdict.violated
    sys.stdout.write(_dump(doc))
    return EXIT_OK if verdict else EXIT_INFEASIBLE


def _check_budgets(params: AdversaryParams, args: argparse.Namespace) -> None:
    if params.n > args.cap:
        raise BudgetError(f"n = {params.n} exceeds --cap {args.cap}")
    if params.n - 2 > args.signed_cap:
        raise BudgetError(
            f"construction needs signed sums of {params.n - 2} items; --signed-cap is {args.signed_cap}"
        )


def _play(params: AdversaryParams, args: argparse.Namespace) -> list:
    return list(iter_game(SOLVERS[args.solver](args.seed), params, args.signed_cap))


def cmd_generate(args: argparse.Namespace) -> int:
    params = _params(args)
    verdict = params_feasible(params)
    if not verdict:
        print(verdict.violated, file=sys.stderr)
        return EXIT_INFEASIBLE
    _check_budgets(params, args)
    state = _play(params, args)[-1]
    provenance = {"params": params.to_document(), "solver": args.solver, "seed": args.seed}
    report = witness_all_Q(state, args.cap, args.workers, provenance)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for j, entry in enumerate(report.entries):
        if entry.construction is None:
            continue
        designated = designated_selector(state, entry.construction)
        inst = completed_instance(
            state, entry.construction,
            **provenance, Q=list(entry.Q), designated=list(designated),
        )
        (out / f"instance_Q{j:03d}.json").write_text(inst.dumps())
    (out / "report.json").write_text(_dump(report.to_document()))
    print(f"instances {len(report.entries)}")
    print(f"successes {report.successes}")
    print(f"bound {report.bound}")
    print(f"complete {str(report.complete).lower()}")
    return EXIT_OK if report.complete else EXIT_NEGATIVE


def cmd_verify(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    if args.designated is not None:
        designated = _parse_selector(args.designated)
    elif inst.provenance and "designated" in inst.provenance:
        designated = tuple(inst.provenance["designated"])
    else:
        raise _InputError("no designated selector: pass --designated or embed it in provenance")
    if any(not (isinstance(i, int) and 0 <= i < inst.n) for i in designated):
        raise _InputError(f"designated selector {designated} out of range")
    if inst.n > args.cap:
        raise BudgetError(f"n = {inst.n} exceeds --cap {args.cap}")
    cert = certify(inst, designated, args.cap)
    sys.stdout.write(_dump(cert.to_document()))
    return EXIT_OK if cert.verified else EXIT_NEGATIVE


def cmd_game(args: argparse.Namespace) -> int:
    params = _params(args)
    verdict = params_feasible(params)
    if not verdict:
        print(verdict.violated, file=sys.stderr)
        return EXIT_INFEASIBLE
    if params.picks > args.cap:
        raise BudgetError(f"beta*n = {params.picks} exceeds --cap {args.cap}")
    states = _play(params, args)
    state = states[-1]
    rounds = []
    for s in states:
        rounds.append({
            "round": s.round,
            "pick": str(s.P[-1]),
            "distinct_subset_sums": all_subset_sums_distinct(s.P, args.cap),
            "subset_hits_N": bool(subsets_summing_to(SimpleKnapsackInstance(s.P, params.N), params.N, args.cap)),
        })
    doc: dict[str, Any] = {
        "params": params.to_document(),
        "solver": args.solver,
        "seed": args.seed,
        "P": [str(x) for x in state.P],
        "rounds": rounds,
    }
    if args.refute is not None:
        _check_budgets(params, args)
        try:
            ref = refute_capped_solver(state, args.refute, args.cap)
        except ValueError as exc:
            raise _InputError(str(exc)) from None
        doc["refutation"] = {
            "b": ref.b,
            "Q": list(ref.Q),
            "surviving_patterns": sorted(list(q) for q in ref.surviving_patterns),
            "capped_value": str(ref.capped_value),
            "optimum": str(ref.optimum),
            "refuted": ref.refuted,
        }
        if args.out:
            inst = completed_instance(
                state, ref.construction, params=params.to_document(), solver=args.solver,
                seed=args.seed, Q=list(ref.Q), designated=list(designated_selector(state, ref.construction)),
                refutes_width_cap=ref.b,
            )
            Path(args.out).write_text(inst.dumps())
    sys.stdout.write(_dump(doc))
    return EXIT_OK


_ALGORITHM_ALIASES = {
    "greedy": "greedy_largest_fit",
    "greedy_largest_fit": "greedy_largest_fit",
    "full": "full_backtrack",
    "full_backtrack": "full_backtrack",
    "capped": "width_capped",
    "width_capped": "width_capped",
}


def cmd_width(args: argparse.Namespace) -> int:
    name = _ALGORITHM_ALIASES.get(args.algorithm)
    if name is None:
        raise _InputError(f"unknown algorithm {args.algorithm!r}; choose from {sorted(_ALGORITHM_ALIASES)}")
    inst = _load_instance(args.instance)
    if inst.n > args.cap:
        raise BudgetError(f"n = {inst.n} exceeds --cap {args.cap}")
    if name == "width_capped":
        if args.b is None or args.b < 1:
            raise _InputError("width_capped needs --b >= 1")
        alg = width_capped(args.b, priority=inst.items if args.file_order else None)
    else:
        alg = greedy_largest_fit() if name == "greedy_largest_fit" else full_backtrack()
    tree = build_tree(alg, inst)
    value = best_feasible(extract_solutions(tree, inst), inst.capacity)
    optimum, _ = optimum_bruteforce(inst, args.cap)
    print(f"algorithm {alg.name}")
    print(f"width {tree_width(tree)}")
    print(f"best_value {'none' if value is None else value}")
    print(f"optimum {optimum}")
    print(f"optimum_matched {str(value == optimum).lower()}")
    return EXIT_OK


def _point(text: str) -> tuple[Fraction, Fraction]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected beta,gamma, got {text!r}")
    return _fraction(parts[0]), _fraction(parts[1])


def cmd_table(args: argparse.Namespace) -> int:
    configs: list[tuple[Any, Any, int | None]] = []
    for beta, gamma in args.point or []:
        for n in args.n or [None]:
            configs.append((beta, gamma, n))
    if args.optimal:
        beta, gamma = bounds.optimal_point()
        configs.append((beta, gamma, None))
    sys.stdout.write(bounds.table_csv(bounds.bound_table(configs)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="btknap", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("optimize", help="optimal gamma, base and log2 exponent")
    p.add_argument("--json", action="store_true")
    p.add_argument("--check", action="store_true", help="also verify the golden-ratio identity")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("params", help="check adversary parameters")
    _add_param_flags(p)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("generate", help="play the game and certify a completion for every Q")
    _add_param_flags(p)
    _add_solver_flags(p)
    _add_budget_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="brute-force check a designated unique solution")
    p.add_argument("instance")
    p.add_argument("--designated", default=None, help="comma-separated item indices")
    p.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("game", help="play the game; optionally refute a width-capped solver")
    _add_param_flags(p)
    _add_solver_flags(p)
    _add_budget_flags(p)
    p.add_argument("--refute", type=int, default=None, metavar="B", help="width cap to refute")
    p.add_argument("--out", default=None, help="write the refutation instance here")
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("width", help="computation-tree width of a reference algorithm")
    p.add_argument("instance")
    p.add_argument("--algorithm", required=True)
    p.add_argument("--b", type=int, default=None, help="cap for width_capped")
    p.add_argument("--file-order", action="store_true", help="width_capped considers items in file order")
    p.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP)
    p.set_defaults(func=cmd_width)

    p = sub.add_parser("table", help="CSV of bound quantities")
    p.add_argument("--point", type=_point, action="append", metavar="BETA,GAMMA")
    p.add_argument("--n", type=int, nargs="*")
    p.add_argument("--optimal", action="store_true", help="add the optimal (beta, gamma) row")
    p.set_defaults(func=cmd_table)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleParamsError as exc:
        print(f"infeasible parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except _InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
