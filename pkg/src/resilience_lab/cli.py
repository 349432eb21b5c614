"""Command-line entry point: ``resilience-lab {run,sweep,attack,attacks,check}``.

Exit codes: 0 when every expectation held, 1 on a verdict mismatch, 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .adversary import list_attacks
from .core import Verdict, check
from .harness import (
    ConfigError,
    Outcome,
    ScenarioConfig,
    execute,
    load_config,
    parse_range,
    read_trace,
    save_trace,
    sweep,
)

SEED_ENV = "RESILIENCE_LAB_SEED"

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2


def _load(path: str) -> ScenarioConfig:
    try:
        config = load_config(path)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    override = os.environ.get(SEED_ENV)
    if override is not None:
        try:
            config = config.replace(seed=int(override))
        except ValueError:
            raise ConfigError("seed", f"{SEED_ENV} must be an integer, got {override!r}") from None
    return config


def _report(outcome: Outcome, out) -> int:
    print(outcome.verdict.line(), file=out)
    if outcome.expectation is not None:
        verdict = "as expected" if outcome.as_expected else "MISMATCH"
        print(f"expected {outcome.expectation.describe()}: {verdict}", file=out)
        return EXIT_OK if outcome.as_expected else EXIT_MISMATCH
    ok = outcome.verdict.safe and outcome.verdict.live
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_run(args, out) -> int:
    config = _load(args.config)
    outcome = execute(config)
    if args.trace_out:
        save_trace(outcome.trace, args.trace_out)
    return _report(outcome, out)


def cmd_attack(args, out) -> int:
    config = _load(args.config).replace(attack=args.name)
    return _report(execute(config), out)


def cmd_attacks(args, out) -> int:
    for name, summary, protocols in list_attacks():
        print(f"{name:<18} [{','.join(protocols)}] {summary}", file=out)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    config = _load(args.config)
    f_range = parse_range(args.f)

    def progress(cfg: ScenarioConfig, verdict: Verdict) -> None:
        if args.verbose:
            print(f"f={cfg.f} seed={cfg.seed} {verdict.line()}", file=sys.stderr)

    result = sweep(config, f_range, args.seeds, progress)
    text = result.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_check(args, out) -> int:
    try:
        trace = read_trace(args.trace)
    except OSError as exc:
        raise ConfigError("trace", f"cannot read {args.trace}: {exc.strerror}") from None
    verdict = check(trace, args.u)
    print(verdict.line(), file=out)
    return EXIT_OK if verdict.safe and verdict.live else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="resilience-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario and print its verdict")
    p.add_argument("--config", required=True)
    p.add_argument("--trace-out", help="write the trace here (.gz compresses)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a scenario over a range of f and seeds, emit CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--f", required=True, help="inclusive range such as 0..6")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--out", help="CSV destination (default stdout)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("attack", help="run a scripted attack and compare with its pinned verdict")
    p.add_argument("--name", required=True)
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("attacks", help="list the registered attack scripts")
    p.set_defaults(func=cmd_attacks)

    p = sub.add_parser("check", help="re-check a saved trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--u", type=int, required=True, help="declared latency in rounds")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
