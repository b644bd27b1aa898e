"""Command-line entry point: oracle build, run, transfer and rules check.

Exit status is 0 on success, 1 for invalid input or configuration and 2 when
a runtime invariant is violated.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .baselines import AgentConfigError, DqnTrainingError
from .game import GameError, GameId
from .harness import (
    LEARNERS, ConfigError, ExperimentConfig, IllegalMoveError, emit_outputs,
    emit_transfer_outputs, run_experiment, run_transfer,
)
from .learner import Strategy
from .mil.logic import ProgramError
from .mil.syntax import load_rules, read_header
from .oracle import OracleLookupError, RegretInvariantError, solve

EXIT_OK, EXIT_INVALID, EXIT_INVARIANT = 0, 1, 2
GAMES = [g.value for g in GameId]


def _read_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return data


def _overlay(base: dict, **flags) -> dict:
    out = dict(base)
    out.update({k: v for k, v in flags.items() if v is not None})
    return out


def cmd_oracle_build(args) -> int:
    table = solve(args.game)
    table.save(args.out)
    print(f"{args.game}: {len(table)} canonical states written to {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    data = _read_config(args.config)
    if data.get("kind") == "run":
        data = data["config"]
    cfg = ExperimentConfig.from_dict(_overlay(
        data, game=args.game, learner=args.learner, episodes=args.episodes, runs=args.runs,
        seed=args.seed, oracle=args.oracle, out_prefix=args.out_prefix,
        transfer_in=args.rules_in, dump_rules=args.dump_rules,
        stability_counter=args.stability_counter,
    ))
    if cfg.out_prefix is None:
        raise ConfigError("--out-prefix is required")
    result = run_experiment(cfg)
    paths = emit_outputs(result, cfg.out_prefix, cfg.dump_rules)
    final = result.curve.mean[-1]
    print(f"{cfg.learner} on {cfg.game.value}: mean final cumulative regret {final:.3f} "
          f"over {cfg.runs} run(s); wrote {paths['csv']}")
    return EXIT_OK


def cmd_transfer(args) -> int:
    data = _read_config(args.config)
    pre = data.get("pretrain", {})
    tgt = data.get("target", {})
    shared = {"runs": args.runs, "seed": args.seed}
    pre = _overlay({"learner": "migo-mixed", **pre}, game=args.pretrain_game,
                   episodes=args.pretrain_episodes, **shared)
    tgt = _overlay({"learner": "migo-mixed", **tgt}, game=args.target_game,
                   episodes=args.episodes, out_prefix=args.out_prefix, **shared)
    pre_cfg, tgt_cfg = ExperimentConfig.from_dict(pre), ExperimentConfig.from_dict(tgt)
    if tgt_cfg.out_prefix is None:
        raise ConfigError("--out-prefix is required")
    prefix = Path(tgt_cfg.out_prefix)
    result = run_transfer(pre_cfg, tgt_cfg, prefix.with_name(prefix.name + ".pretrain_rules"))
    emit_transfer_outputs(result, prefix)
    s, u = result.seeded.curve.mean[-1], result.unseeded.curve.mean[-1]
    print(f"{pre_cfg.game.value} -> {tgt_cfg.game.value}: seeded {s:.3f}, unseeded {u:.3f} "
          f"mean final cumulative regret")
    return EXIT_OK


def cmd_rules_check(args) -> int:
    program = load_rules(args.path)
    strategy = Strategy.from_program(program)
    header = read_header(Path(args.path).read_text())
    game = f" for {header}" if header else ""
    print(f"{args.path}: {len(program)} clauses{game}; tasks: {', '.join(strategy.tasks) or 'none'}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors are validation errors, so they exit with status 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="migo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    oracle = sub.add_parser("oracle", help="minimax tables").add_subparsers(dest="action", required=True)
    build = oracle.add_parser("build", help="solve a game and save its table")
    build.add_argument("--game", required=True, choices=GAMES)
    build.add_argument("--out", required=True)
    build.set_defaults(func=cmd_oracle_build)

    run = sub.add_parser("run", help="run one learner for several seeded runs")
    run.add_argument("--config")
    run.add_argument("--game", choices=GAMES)
    run.add_argument("--learner", choices=LEARNERS)
    run.add_argument("--episodes", type=int)
    run.add_argument("--runs", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--oracle")
    run.add_argument("--out-prefix")
    run.add_argument("--rules-in")
    run.add_argument("--dump-rules")
    run.add_argument("--stability-counter", type=int)
    run.set_defaults(func=cmd_run)

    tr = sub.add_parser("transfer", help="pretrain on one game, compare seeded and unseeded on another")
    tr.add_argument("--config")
    tr.add_argument("--pretrain-game", choices=GAMES)
    tr.add_argument("--pretrain-episodes", type=int)
    tr.add_argument("--target-game", choices=GAMES)
    tr.add_argument("--episodes", type=int)
    tr.add_argument("--runs", type=int)
    tr.add_argument("--seed", type=int)
    tr.add_argument("--out-prefix")
    tr.set_defaults(func=cmd_transfer)

    rules = sub.add_parser("rules", help="rule files").add_subparsers(dest="action", required=True)
    check = rules.add_parser("check", help="parse and validate a rule file")
    check.add_argument("path")
    check.set_defaults(func=cmd_rules_check)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RegretInvariantError, IllegalMoveError, DqnTrainingError) as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConfigError, GameError, ProgramError, AgentConfigError, OracleLookupError,
            ValueError, TypeError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
