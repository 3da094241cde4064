"""Command-line front end.

Subcommands:
  gen     write an instance file (builtin constructions or a random corpus draw)
  shares  exact share values and witnesses for the agents of an instance
  play    run one bidding game and emit a re-verifiable run report
  alloc   guess-refinement allocation with per-agent guarantees
  verify  re-check a run report offline
  lpcert  build and decide the guarantee-bound inequality system

Exit codes: 0 success / pass, 1 guarantee or verification failure,
2 input error, 3 internal contract violation.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import negatives, serialize
from .analysis import (
    build_theorem_system,
    check_feasible,
    combine_rows,
    guarantee_report,
)
from .engine import GameConfig, TieBreak, run_game, verify_transcript
from .model import Instance
from .shares import aps_exact, mms_exact, aps_unit_demand
from .strategies import (
    AltruisticProportionalBidder,
    ConstantBidder,
    GreedyMarginalBidder,
    ProportionalBidder,
    RandomBidder,
    UnitDemandFullBudgetBidder,
    ZeroBidder,
)
from .valuations import SizeGuardExceeded, UnitDemandValuation
from .wrapper import (
    ContractViolation,
    default_epsilon,
    guarantee_rho,
    unconditional_allocate,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_CONTRACT = 3


class InputError(Exception):
    pass


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise InputError(str(exc)) from exc


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def _load_instance(path: str) -> Instance:
    try:
        return serialize.instance_from_dict(serialize.loads(_read_text(path)))
    except serialize.ParseError as exc:
        raise InputError(str(exc)) from exc


def _parse_fraction(text: str) -> Fraction:
    try:
        return serialize.parse_rational(text)
    except serialize.ParseError as exc:
        raise InputError(str(exc)) from exc


# ---------------------------------------------------------------- gen

NEGATIVE_KINDS = {
    "altruistic-negative": negatives.gen_altruistic_negative,
    "original-negative": negatives.gen_original_negative,
    "modified-negative": negatives.gen_modified_negative,
}


def cmd_gen(args: argparse.Namespace) -> int:
    if args.kind == "random":
        instance = negatives.gen_random_submodular(
            seed=args.seed, n=args.agents, m=args.items,
            universe=args.universe, entitlements=args.entitlements,
        )
    elif args.kind == "xos-hard":
        instance = negatives.gen_xos_hard(args.agents, args.k).instance
    elif args.kind in NEGATIVE_KINDS:
        instance = NEGATIVE_KINDS[args.kind](args.k).instance
    else:  # pragma: no cover - argparse restricts choices
        raise InputError(f"unknown kind {args.kind}")
    _write_text(args.output, serialize.dumps(serialize.instance_to_dict(instance)))
    return EXIT_OK


# ---------------------------------------------------------------- shares

def cmd_shares(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance)
    if args.agent and args.agent not in instance.agent_ids:
        raise InputError(f"no agent {args.agent!r} in this instance")
    agents = [args.agent] if args.agent else list(instance.agent_ids)
    n = len(instance.agents)
    entries = []
    for agent_id in agents:
        spec = instance.agent(agent_id)
        entry: dict = {"agent": agent_id, "entitlement": serialize.rational_str(spec.entitlement)}
        try:
            if args.share in ("mms", "both"):
                res = mms_exact(spec.valuation, n, instance.items, args.max_items)
                entry["mms"] = serialize.rational_str(res.value)
                entry["mms_witness"] = [sorted(b) for b in res.witness]
            if args.share in ("aps", "both"):
                res = aps_exact(spec.valuation, spec.entitlement, instance.items, args.max_items)
                entry["aps"] = serialize.rational_str(res.value)
                entry["aps_witness"] = serialize.partition_to_dict(res.witness)
                if isinstance(spec.valuation, UnitDemandValuation):
                    closed = aps_unit_demand(
                        [spec.valuation.item_values.get(e, Fraction(0)) for e in instance.items],
                        spec.entitlement,
                    )
                    entry["aps_closed_form"] = serialize.rational_str(closed)
        except SizeGuardExceeded as exc:
            raise InputError(str(exc)) from exc
        entries.append(entry)
    _write_text(args.output, serialize.dumps({"format": "bidfair/shares", "version": 1, "shares": entries}))
    return EXIT_OK


# ---------------------------------------------------------------- play

def _parse_strategy_spec(spec_text: str, instance: Instance, agent_id: str):
    name, _, params_text = spec_text.partition(":")
    params: dict[str, str] = {}
    if params_text:
        for piece in params_text.split(","):
            key, _, value = piece.partition("=")
            if not value:
                raise InputError(f"bad strategy parameter {piece!r}")
            params[key] = value
    spec = instance.agent(agent_id)

    def share_value(text: str) -> Fraction:
        if text == "aps":
            return aps_exact(spec.valuation, spec.entitlement, instance.items).value
        if text == "mms":
            return mms_exact(spec.valuation, len(instance.agents), instance.items).value
        return _parse_fraction(text)

    if name == "proportional":
        share = share_value(params.get("share", "aps"))
        rho = _parse_fraction(params["rho"]) if "rho" in params else None
        return ProportionalBidder(spec.valuation, spec.entitlement, share, rho)
    if name == "altruistic":
        share = share_value(params.get("share", "mms"))
        return AltruisticProportionalBidder(spec.valuation, spec.entitlement, share)
    if name == "unit_demand":
        return UnitDemandFullBudgetBidder(spec.valuation)
    if name == "greedy":
        return GreedyMarginalBidder(spec.valuation)
    if name == "random":
        return RandomBidder(int(params.get("seed", "0")))
    if name == "constant":
        return ConstantBidder(_parse_fraction(params.get("amount", "0")))
    if name == "zero":
        return ZeroBidder()
    raise InputError(f"unknown strategy {name!r}")


def _game_config_from_args(args: argparse.Namespace) -> GameConfig:
    rho = _parse_fraction(args.rho) if args.rho else None
    try:
        tie = TieBreak(
            policy=args.tiebreak,
            seed=args.seed if args.tiebreak == "seeded" else None,
            target=args.target if args.tiebreak == "adversarial" else None,
        )
        return GameConfig(mode=args.mode, rho=rho, strict_threshold=not args.lenient_threshold, tie=tie)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _builtin_run(args: argparse.Namespace) -> int:
    if args.builtin == "xos-hard":
        run = negatives.gen_xos_hard(args.agents, args.k)
    else:
        run = NEGATIVE_KINDS[args.builtin](args.k)
    allocation, transcript = run.execute()
    value = run.instance.valuation(run.agent).value(allocation[run.agent])
    ok = value <= run.expected_value if run.value_is_upper_bound else value == run.expected_value
    doc = serialize.report_to_dict(
        run.instance,
        transcript,
        extra={
            "builtin": run.name,
            "agent": run.agent,
            "agent_value": serialize.rational_str(value),
            "expected_value": serialize.rational_str(run.expected_value),
            "share": serialize.rational_str(run.share_value),
            "share_kind": run.share_kind,
            "reproduced": ok,
        },
    )
    _write_text(args.output, serialize.dumps(doc))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_play(args: argparse.Namespace) -> int:
    if args.builtin:
        return _builtin_run(args)
    if not args.instance:
        raise InputError("an instance file (or --builtin) is required")
    instance = _load_instance(args.instance)
    config = _game_config_from_args(args)
    assigned = {}
    for text in args.strategy or ():
        agent_id, _, spec_text = text.partition("=")
        if not spec_text:
            raise InputError(f"bad --strategy {text!r}, expected AGENT=SPEC")
        if agent_id not in instance.agent_ids:
            raise InputError(f"no agent {agent_id!r} in this instance")
        assigned[agent_id] = spec_text
    strategies = {}
    try:
        for agent_id in instance.agent_ids:
            spec_text = assigned.get(agent_id, args.default_strategy)
            strategies[agent_id] = _parse_strategy_spec(spec_text, instance, agent_id)
    except SizeGuardExceeded as exc:
        raise InputError(str(exc)) from exc
    allocation, transcript = run_game(instance, strategies, config)

    guarantees = None
    failed = False
    if args.report_shares:
        shares = {}
        try:
            for spec in instance.agents:
                if args.report_shares == "aps":
                    shares[spec.id] = aps_exact(spec.valuation, spec.entitlement, instance.items).value
                else:
                    shares[spec.id] = mms_exact(spec.valuation, len(instance.agents), instance.items).value
        except SizeGuardExceeded as exc:
            raise InputError(str(exc)) from exc
        target = _parse_fraction(args.target_rho) if args.target_rho else Fraction(0)
        report = guarantee_report(instance, allocation, shares, {a: target for a in shares})
        failed = not report.all_passed
        guarantees = [
            {
                "agent": e.agent,
                "share": serialize.rational_str(e.share),
                "share_kind": args.report_shares,
                "bundle_value": serialize.rational_str(e.bundle_value),
                "target_rho": serialize.rational_str(e.target),
                "ratio": serialize.rational_str(e.ratio) if e.ratio is not None else None,
                "passed": e.passed,
            }
            for e in report.entries
        ]
    _write_text(args.output, serialize.dumps(serialize.report_to_dict(instance, transcript, guarantees)))
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------- alloc

def cmd_alloc(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance)
    epsilon = _parse_fraction(args.epsilon) if args.epsilon else default_epsilon(args.mode, instance)
    exact = None
    if args.check_exact:
        try:
            exact = {}
            for spec in instance.agents:
                if args.mode == "aps":
                    exact[spec.id] = aps_exact(spec.valuation, spec.entitlement, instance.items).value
                else:
                    exact[spec.id] = mms_exact(spec.valuation, len(instance.agents), instance.items).value
        except SizeGuardExceeded as exc:
            raise InputError(str(exc)) from exc
    try:
        outcome = unconditional_allocate(
            instance, epsilon, mode=args.mode, exact_shares=exact
        )
    except ContractViolation as exc:
        sys.stderr.write(f"contract violation: {exc}\n")
        return EXIT_CONTRACT
    except ValueError as exc:
        raise InputError(str(exc)) from exc

    failed = False
    guarantees = []
    for spec in instance.agents:
        rho = guarantee_rho(args.mode, spec.entitlement)
        value = spec.valuation.value(outcome.allocation[spec.id])
        entry = {
            "agent": spec.id,
            "guess": serialize.rational_str(outcome.guesses[spec.id]),
            "bundle_value": serialize.rational_str(value),
            "rho": serialize.rational_str(rho),
        }
        if exact is not None:
            share = exact[spec.id]
            needed = (1 - epsilon) * rho * share
            entry["share"] = serialize.rational_str(share)
            entry["passed"] = value >= needed
            if not entry["passed"]:
                failed = True
        guarantees.append(entry)
    doc = serialize.report_to_dict(
        instance,
        outcome.transcript,
        guarantees=guarantees,
        extra={
            "mode": args.mode,
            "epsilon": serialize.rational_str(epsilon),
            "conditional_calls": outcome.calls,
        },
    )
    _write_text(args.output, serialize.dumps(doc))
    return EXIT_CONTRACT if failed else EXIT_OK


# ---------------------------------------------------------------- verify

def cmd_verify(args: argparse.Namespace) -> int:
    try:
        doc = serialize.loads(_read_text(args.report))
        instance, transcript, guarantees = serialize.report_from_dict(doc)
    except serialize.ParseError as exc:
        raise InputError(str(exc)) from exc
    if not verify_transcript(transcript, instance):
        sys.stderr.write("transcript does not verify\n")
        return EXIT_FAIL
    for entry in guarantees:
        agent = entry["agent"]
        value = instance.valuation(agent).value(transcript.allocation.get(agent, frozenset()))
        if serialize.parse_rational(entry["bundle_value"]) != value:
            sys.stderr.write(f"recorded bundle value for {agent} is wrong\n")
            return EXIT_FAIL
        if "share" in entry and "target_rho" in entry:
            share = serialize.parse_rational(entry["share"])
            target = serialize.parse_rational(entry["target_rho"])
            passed = True if share <= 0 else value >= target * share
            if bool(entry.get("passed", True)) != passed:
                sys.stderr.write(f"guarantee flag for {agent} is wrong\n")
                return EXIT_FAIL
    sys.stdout.write("report verified\n")
    return EXIT_OK


# ---------------------------------------------------------------- lpcert

def cmd_lpcert(args: argparse.Namespace) -> int:
    n = None if args.n == "inf" else int(args.n)
    try:
        system = build_theorem_system(_parse_fraction(args.z), n)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    outcome = check_feasible(system)
    doc: dict = {
        "format": serialize.FORMAT_LPCERT,
        "version": serialize.VERSION,
        "z": serialize.rational_str(system.z),
        "n": args.n,
        "rows": [[serialize.rational_str(c) for c in row] for row in system.rows],
        "rhs": [serialize.rational_str(b) for b in system.rhs],
        "strict": list(system.strict),
        "feasible": outcome.feasible,
    }
    if outcome.feasible:
        doc["witness"] = {k: serialize.rational_str(v) for k, v in outcome.witness.items()}
    else:
        coeffs, constant = combine_rows(system, outcome.certificate)
        doc["certificate"] = [serialize.rational_str(m) for m in outcome.certificate]
        doc["combined_coefficients"] = [serialize.rational_str(c) for c in coeffs]
        doc["combined_constant"] = serialize.rational_str(constant)
    _write_text(args.output, serialize.dumps(doc))
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bidfair")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="write an instance file")
    p_gen.add_argument("kind", choices=["random", "xos-hard"] + sorted(NEGATIVE_KINDS))
    p_gen.add_argument("--k", type=int, default=1)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--agents", type=int, default=3)
    p_gen.add_argument("--items", type=int, default=6)
    p_gen.add_argument("--universe", type=int, default=6)
    p_gen.add_argument("--entitlements", choices=["equal", "random"], default="equal")
    p_gen.add_argument("-o", "--output", default="-")
    p_gen.set_defaults(func=cmd_gen)

    p_shares = sub.add_parser("shares", help="exact share values with witnesses")
    p_shares.add_argument("instance")
    p_shares.add_argument("--agent")
    p_shares.add_argument("--share", choices=["aps", "mms", "both"], default="both")
    p_shares.add_argument("--max-items", type=int, default=None)
    p_shares.add_argument("-o", "--output", default="-")
    p_shares.set_defaults(func=cmd_shares)

    p_play = sub.add_parser("play", help="run one bidding game")
    p_play.add_argument("instance", nargs="?")
    p_play.add_argument("--builtin", choices=["xos-hard"] + sorted(NEGATIVE_KINDS))
    p_play.add_argument("--k", type=int, default=1)
    p_play.add_argument("--agents", type=int, default=16, help="agent count for --builtin xos-hard")
    p_play.add_argument("--mode", choices=["standard", "altruistic", "multi_pick"], default="standard")
    p_play.add_argument("--rho", help="spend fraction for altruistic mode, as p/q")
    p_play.add_argument("--lenient-threshold", action="store_true",
                        help="deactivate on reaching (not passing) the spend cap")
    p_play.add_argument("--tiebreak", choices=["lexicographic", "seeded", "adversarial"],
                        default="lexicographic")
    p_play.add_argument("--seed", type=int, default=0)
    p_play.add_argument("--target", help="victim agent for adversarial tie-breaking")
    p_play.add_argument("--strategy", action="append", metavar="AGENT=SPEC")
    p_play.add_argument("--default-strategy", default="greedy")
    p_play.add_argument("--report-shares", choices=["aps", "mms"])
    p_play.add_argument("--target-rho", help="pass threshold as a fraction of the share")
    p_play.add_argument("-o", "--output", default="-")
    p_play.set_defaults(func=cmd_play)

    p_alloc = sub.add_parser("alloc", help="guess-refinement allocation")
    p_alloc.add_argument("instance")
    p_alloc.add_argument("--epsilon", help="guess decrement rate as p/q (default mode-specific)")
    p_alloc.add_argument("--mode", choices=["aps", "mms"], default="aps")
    p_alloc.add_argument("--check-exact", action="store_true",
                         help="verify the outcome against exact shares (size-guarded)")
    p_alloc.add_argument("-o", "--output", default="-")
    p_alloc.set_defaults(func=cmd_alloc)

    p_verify = sub.add_parser("verify", help="re-check a run report")
    p_verify.add_argument("report")
    p_verify.set_defaults(func=cmd_verify)

    p_lp = sub.add_parser("lpcert", help="decide the guarantee-bound inequality system")
    p_lp.add_argument("--z", required=True, help="substituted target, as p/q")
    p_lp.add_argument("--n", default="inf", help="agent count, or 'inf'")
    p_lp.add_argument("-o", "--output", default="-")
    p_lp.set_defaults(func=cmd_lpcert)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
