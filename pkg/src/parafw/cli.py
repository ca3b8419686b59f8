"""Command-line driver.

Subcommands: classify, verify, bench, gen-rules, gen-traffic. Verdicts and
results go to stdout, diagnostics to stderr. Exit codes are a stable
contract: 0 success, 1 I/O or parse failure, 2 invalid configuration,
3 verification divergence.
"""

from __future__ import annotations

import argparse
import sys

from .bench import SweepAxis, SweepSpec, emit_csv, run_sweep
from .classifier import classify_batch_sequential
from .engines import EngineConfig, ExecutionModel, ConfigError, MAX_NODES, run
from .model import RuleParseError, load_ruleset, save_ruleset
from .traffic import (
    MatchMode,
    RulesetGenParams,
    TrafficFormatError,
    TrafficGenerationError,
    TrafficProfile,
    generate_ruleset,
    generate_traffic,
    load_traffic,
    save_traffic,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3

_MODEL_KEYS = [m.value for m in ExecutionModel]


def _csv_ints(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _csv_models(text: str) -> list[ExecutionModel]:
    try:
        return [ExecutionModel.from_key(tok.strip()) for tok in text.split(",") if tok.strip()]
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def cmd_classify(args) -> int:
    config = EngineConfig(
        model=ExecutionModel.from_key(args.model), nodes=args.nodes, batch_size=args.batch
    )
    ruleset = load_ruleset(args.rules)
    packets = load_traffic(args.traffic)
    results, _ = run(ruleset, packets, config)
    out = sys.stdout
    for packet, result in zip(packets, results):
        index = "-" if result.matched_index is None else str(result.matched_index)
        out.write(f"{packet.id},{result.verdict.value},{index}\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    ruleset = load_ruleset(args.rules)
    packets = load_traffic(args.traffic)
    expected, _ = classify_batch_sequential(ruleset, packets)
    checked = 0
    for model in ExecutionModel:
        for nodes in args.nodes:
            config = EngineConfig(model=model, nodes=nodes, batch_size=args.batch)
            actual, _ = run(ruleset, packets, config)
            for packet, want, got in zip(packets, expected, actual):
                if (want.verdict, want.matched_index) != (got.verdict, got.matched_index):
                    print(
                        f"divergence: packet {packet.id} model {model.key} nodes {nodes}: "
                        f"expected ({want.verdict.value}, {want.matched_index}), "
                        f"got ({got.verdict.value}, {got.matched_index})",
                        file=sys.stderr,
                    )
                    return EXIT_DIVERGENCE
            checked += 1
    print(f"OK: {len(packets)} packets x {checked} configurations match the sequential oracle")
    return EXIT_OK


def cmd_bench(args) -> int:
    spec = SweepSpec(
        axis=SweepAxis(args.axis),
        axis_values=tuple(args.values),
        rules=args.rules,
        nodes=args.nodes,
        batch=args.batch,
        seed=args.seed,
        repetitions=args.reps,
        models=tuple(args.model),
    )
    reports = run_sweep(spec)
    emit_csv(reports, args.out)
    print(f"wrote {len(reports)} reports to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_gen_rules(args) -> int:
    ruleset = generate_ruleset(RulesetGenParams(count=args.count, seed=args.seed))
    save_ruleset(ruleset, args.out)
    return EXIT_OK


def cmd_gen_traffic(args) -> int:
    mode = MatchMode.WORST_CASE if args.worst_case else MatchMode.UNIFORM
    profile = TrafficProfile(count=args.count, seed=args.seed, match_mode=mode)
    ruleset = load_ruleset(args.rules) if args.worst_case else None
    save_traffic(generate_traffic(profile, ruleset), args.out)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parafw",
        description="Parallel packet-filtering engine: classify, verify, benchmark, generate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify a traffic file against a ruleset")
    p.add_argument("--rules", required=True, help="ruleset file")
    p.add_argument("--traffic", required=True, help="traffic CSV")
    p.add_argument("--model", choices=_MODEL_KEYS, default="sequential")
    p.add_argument("--nodes", type=int, default=1)
    p.add_argument("--batch", type=int, default=4096)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="check every model against the sequential oracle")
    p.add_argument("--rules", required=True)
    p.add_argument("--traffic", required=True)
    p.add_argument("--nodes", type=_csv_ints, default=[1, 2, 4, 8],
                   help="comma-separated node counts (default 1,2,4,8)")
    p.add_argument("--batch", type=int, default=4096)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run a sweep and emit a results CSV")
    p.add_argument("--axis", choices=[a.value for a in SweepAxis], required=True)
    p.add_argument("--values", type=_csv_ints, required=True,
                   help="comma-separated axis values, strictly increasing")
    p.add_argument("--rules", type=int, default=2048, help="ruleset size when axis=nodes")
    p.add_argument("--nodes", type=int, default=64, help="node count when axis=rules")
    p.add_argument("--batch", type=int, default=4096)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--model", type=_csv_models, default=list(ExecutionModel),
                   help="comma-separated models (default: all)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen-rules", help="generate a seeded random ruleset file")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_rules)

    p = sub.add_parser("gen-traffic", help="generate a seeded traffic CSV")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--worst-case", action="store_true",
                   help="generate packets matching no rule of --rules")
    p.add_argument("--rules", help="companion ruleset (required with --worst-case)")
    p.set_defaults(func=cmd_gen_traffic)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen-traffic" and args.worst_case and not args.rules:
        parser.error("--worst-case requires --rules")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuleParseError, TrafficFormatError, TrafficGenerationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
