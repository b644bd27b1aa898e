"""Episodes against the optimal opponent, regret curves and experiment outputs.

Each run gets its own seeds derived from the master seed, the run index and a
stream name.  The initial-board stream depends only on the master seed, the
run index and the game, so every learner in a comparison sees the same
boards.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import platform
import random
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import DqnAgent, DqnConfig, MenaceAgent, MenaceConfig, QAgent, QConfig, RandomAgent
from .game import Game, GameError, GameId, GameState, Mark, get_game
from .learner import LearnerMode, MigoLearner, MoveExample, transfer_in
from .mil.logic import Program
from .oracle import OracleTable, RegretInvariantError, get_oracle

LEARNERS = ("migo-mixed", "migo-separated", "menace", "qlearning", "dqn", "random")
DEFAULT_STABILITY = {GameId.NOUGHTS_AND_CROSSES: 10, GameId.HEXAPAWN3: 5, GameId.HEXAPAWN4: 10}
BOARD_SAMPLING = "uniform with replacement"


class ConfigError(ValueError):
    pass


class IllegalMoveError(RuntimeError):
    pass


def derive_seed(master: int, *names) -> int:
    """Stable 63-bit seed for a named sub-stream."""
    text = "/".join(map(str, (master, *names)))
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big") >> 1


@dataclass(frozen=True)
class ExperimentConfig:
    game: GameId
    learner: str
    episodes: int
    runs: int = 1
    seed: int = 0
    transfer_in: str | None = None
    stability_counter: int | None = None
    oracle: str | None = None
    out_prefix: str | None = None
    dump_rules: str | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "game", GameId(self.game))
        except ValueError:
            raise ConfigError(f"unknown game {self.game!r}; choose from {[g.value for g in GameId]}") from None
        if self.learner not in LEARNERS:
            raise ConfigError(f"unknown learner {self.learner!r}; choose from {list(LEARNERS)}")
        if self.episodes < 1 or self.runs < 1:
            raise ConfigError("episodes and runs must be at least 1")
        if self.learner == "menace" and self.game is GameId.HEXAPAWN4:
            raise ConfigError("menace is only defined for the 3x3 games, not hexapawn4")
        if self.stability_counter is not None and self.stability_counter < 1:
            raise ConfigError("stability counter must be positive")
        if self.transfer_in is not None and not self.learner.startswith("migo"):
            raise ConfigError("only MIGO learners accept transferred rules")

    @property
    def counter(self) -> int:
        if self.stability_counter is not None:
            return self.stability_counter
        return DEFAULT_STABILITY[self.game]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["game"] = self.game.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    initial: GameState
    expected: int
    actual: int
    regret: int
    wall_time: float
    strategy_changed: bool
    labels: tuple[MoveExample, ...] = ()

    def to_json(self, run: int) -> dict:
        return {
            "run": run, "episode": self.episode, "initial": self.initial.serialize(),
            "expected": self.expected, "actual": self.actual, "regret": self.regret,
            "wall_time": round(self.wall_time, 6), "strategy_changed": self.strategy_changed,
            "labels": [
                {"task": e.task, "depth": e.depth, "from": e.from_state.serialize(), "to": e.to_state.serialize()}
                for e in self.labels
            ],
        }


@dataclass
class RegretCurve:
    cumulative: np.ndarray  # runs x episodes

    @classmethod
    def from_records(cls, runs: list[list[EpisodeRecord]]) -> "RegretCurve":
        return cls(np.array([np.cumsum([r.regret for r in recs]) for recs in runs], dtype=float))

    @property
    def mean(self) -> np.ndarray:
        return self.cumulative.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        return self.cumulative.std(axis=0)

    def final(self) -> np.ndarray:
        return self.cumulative[:, -1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["episode", "mean_cum_regret", "std_cum_regret"])
        for i, (m, s) in enumerate(zip(self.mean, self.std), start=1):
            w.writerow([i, f"{m:.6f}", f"{s:.6f}"])
        return buf.getvalue()


@dataclass
class RunResult:
    seed: int
    records: list[EpisodeRecord]
    rules: str | None = None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: list[RunResult]
    board_fingerprint: str
    hyperparameters: dict = field(default_factory=dict)

    @property
    def curve(self) -> RegretCurve:
        return RegretCurve.from_records([r.records for r in self.runs])


def board_stream(game: Game, seed: int, run: int, episodes: int) -> list[GameState]:
    boards = game.initial_board_set()
    rng = random.Random(derive_seed(seed, run, game.game_id.value, "boards"))
    return [boards[rng.randrange(len(boards))] for _ in range(episodes)]


def stream_fingerprint(streams: list[list[GameState]]) -> str:
    h = hashlib.sha256()
    for stream in streams:
        h.update((" ".join(b.serialize() for b in stream) + "\n").encode())
    return h.hexdigest()


def play_episode(learner, oracle: OracleTable, initial: GameState,
                 rng: random.Random) -> tuple[list[GameState], int]:
    """Learner (X) against the deterministic optimal opponent.

    Checks along the way that the expected value never rises.
    """
    game = oracle.game
    if initial.to_move is not Mark.X:
        raise GameError(f"learner must be to move in {initial}")
    trace = [initial]
    state = initial
    value = oracle.expected_outcome(state)
    while not game.is_terminal(state):
        if state.to_move is Mark.X:
            nxt = learner.select_move(state, rng)
            if nxt not in game.successors(state):
                raise IllegalMoveError(f"{getattr(learner, 'name', learner)} played {state} -> {nxt}")
        else:
            nxt = oracle.best_reply(state)
        new_value = oracle.expected_outcome(nxt)
        if new_value > value:
            raise RegretInvariantError(f"expected value rose from {value} to {new_value} at {state} -> {nxt}")
        trace.append(nxt)
        state, value = nxt, new_value
    return trace, game.outcome(state)


def _base_program(config: ExperimentConfig) -> Program | None:
    if config.transfer_in is None:
        return None
    return transfer_in(config.transfer_in).program


def make_learner(config: ExperimentConfig, game: Game, seed: int):
    if config.learner == "migo-mixed":
        return MigoLearner(game, LearnerMode.mixed(), base=_base_program(config))
    if config.learner == "migo-separated":
        return MigoLearner(game, LearnerMode(config.counter), base=_base_program(config))
    if config.learner == "menace":
        return MenaceAgent(game, seed)
    if config.learner == "qlearning":
        return QAgent(game, seed)
    if config.learner == "dqn":
        return DqnAgent(game, seed)
    return RandomAgent(game, seed)


def hyperparameters(config: ExperimentConfig) -> dict:
    if config.learner == "menace":
        return asdict(MenaceConfig())
    if config.learner == "qlearning":
        return asdict(QConfig())
    if config.learner == "dqn":
        return asdict(DqnConfig())
    if config.learner == "migo-separated":
        return {"stability_counter": config.counter, "max_clauses": 2}
    if config.learner == "migo-mixed":
        return {"max_clauses": 2}
    return {}


def _observe(learner, trace, outcome) -> tuple[tuple, bool]:
    res = learner.observe(trace, outcome)
    if isinstance(res, tuple):
        labels, changed = res
        return tuple(labels), changed
    return (), bool(res)


def run_single(config: ExperimentConfig, oracle: OracleTable, run: int,
               boards: list[GameState] | None = None) -> RunResult:
    game = oracle.game
    if boards is None:
        boards = board_stream(game, config.seed, run, config.episodes)
    agent_seed = derive_seed(config.seed, run, config.learner, "agent")
    learner = make_learner(config, game, agent_seed)
    rng = random.Random(derive_seed(config.seed, run, config.learner, "moves"))
    records = []
    for ep, initial in enumerate(boards, start=1):
        t0 = time.perf_counter()
        trace, actual = play_episode(learner, oracle, initial, rng)
        expected = oracle.expected_outcome(initial)
        regret = oracle.minimax_regret(initial, actual)
        labels, changed = _observe(learner, trace, actual)
        records.append(EpisodeRecord(ep, initial, expected, actual, regret,
                                     time.perf_counter() - t0, changed, labels))
    rules = learner.strategy.render() if isinstance(learner, MigoLearner) else None
    return RunResult(agent_seed, records, rules)


def load_or_solve_oracle(config: ExperimentConfig) -> OracleTable:
    if config.oracle is None:
        return get_oracle(config.game)
    path = Path(config.oracle)
    if not path.exists():
        raise ConfigError(f"oracle file {path} does not exist")
    table = OracleTable.load(path)
    if table.game.game_id is not config.game:
        raise ConfigError(f"oracle {path} is for {table.game.game_id.value}, not {config.game.value}")
    return table


def run_experiment(config: ExperimentConfig, oracle: OracleTable | None = None) -> ExperimentResult:
    if oracle is None:
        oracle = load_or_solve_oracle(config)
    streams = [board_stream(oracle.game, config.seed, r, config.episodes) for r in range(config.runs)]
    runs = [run_single(config, oracle, r, streams[r]) for r in range(config.runs)]
    return ExperimentResult(config, runs, stream_fingerprint(streams), hyperparameters(config))


@dataclass
class TransferResult:
    pretrain: ExperimentResult
    seeded: ExperimentResult
    unseeded: ExperimentResult
    rule_files: list[str]


def run_transfer(pretrain: ExperimentConfig, target: ExperimentConfig,
                 workdir: str | Path) -> TransferResult:
    """Pretrain per run, then play the target game seeded and from scratch."""
    if not pretrain.learner.startswith("migo"):
        raise ConfigError("pretraining needs a MIGO learner")
    if pretrain.runs != target.runs:
        raise ConfigError("pretrain and target need the same number of runs")
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    pre = run_experiment(pretrain)
    oracle = load_or_solve_oracle(target)
    streams = [board_stream(oracle.game, target.seed, r, target.episodes) for r in range(target.runs)]
    files, seeded_runs, plain_runs = [], [], []
    for r, pre_run in enumerate(pre.runs):
        path = workdir / f"pretrain_run{r}.rules"
        path.write_text(f"rules v1 game={pretrain.game.value}\n" + (pre_run.rules or ""))
        files.append(str(path))
        seeded_cfg = replace(target, transfer_in=str(path), runs=1)
        seeded_runs.append(run_single(seeded_cfg, oracle, r, streams[r]))
        plain_runs.append(run_single(replace(target, transfer_in=None), oracle, r, streams[r]))
    fp = stream_fingerprint(streams)
    hp = hyperparameters(target)
    seeded = ExperimentResult(replace(target, transfer_in="<per-run pretrained rules>"), seeded_runs, fp, hp)
    unseeded = ExperimentResult(replace(target, transfer_in=None), plain_runs, fp, hp)
    return TransferResult(pre, seeded, unseeded, files)


def metadata(result: ExperimentResult, kind: str = "run") -> dict:
    return {
        "kind": kind,
        "config": result.config.to_dict(),
        "learner_constants": result.hyperparameters,
        "run_seeds": [r.seed for r in result.runs],
        "board_sampling": BOARD_SAMPLING,
        "board_stream_sha256": result.board_fingerprint,
        "versions": {"package": __version__, "python": platform.python_version(), "numpy": np.__version__},
    }


def emit_outputs(result: ExperimentResult, prefix: str | Path,
                 dump_rules: str | Path | None = None, kind: str = "run") -> dict[str, Path]:
    """Write ``<prefix>.csv``, ``.jsonl``, ``.meta.json`` and rule dumps."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": prefix.with_name(prefix.name + ".csv"),
        "log": prefix.with_name(prefix.name + ".jsonl"),
        "meta": prefix.with_name(prefix.name + ".meta.json"),
    }
    try:
        paths["csv"].write_text(result.curve.to_csv())
        with open(paths["log"], "w") as fh:
            for i, run in enumerate(result.runs):
                for rec in run.records:
                    fh.write(json.dumps(rec.to_json(i)) + "\n")
        paths["meta"].write_text(json.dumps(metadata(result, kind), indent=2, sort_keys=True) + "\n")
        if any(r.rules is not None for r in result.runs):
            base = Path(dump_rules) if dump_rules else prefix.with_name(prefix.name + ".rules")
            game = result.config.game.value
            for i, run in enumerate(result.runs):
                p = base.with_name(f"{base.name}.run{i}") if result.config.runs > 1 else base
                p.write_text(f"rules v1 game={game}\n" + (run.rules or ""))
                paths[f"rules{i}"] = p
    except OSError as exc:
        raise OSError(f"writing outputs under {prefix}: {exc}") from exc
    return paths


def config_from_metadata(path: str | Path) -> ExperimentConfig:
    meta = json.loads(Path(path).read_text())
    if meta.get("kind") != "run":
        raise ConfigError(f"{path} is not run metadata")
    return ExperimentConfig.from_dict(meta["config"])


def transfer_configs_from_metadata(path: str | Path) -> tuple[ExperimentConfig, ExperimentConfig]:
    meta = json.loads(Path(path).read_text())
    if meta.get("kind") != "transfer":
        raise ConfigError(f"{path} is not transfer metadata")
    return ExperimentConfig.from_dict(meta["pretrain"]), ExperimentConfig.from_dict(meta["target"])


def transfer_metadata(result: TransferResult) -> dict:
    return {
        "kind": "transfer",
        "pretrain": result.pretrain.config.to_dict(),
        "target": result.unseeded.config.to_dict(),
        "learner_constants": result.unseeded.hyperparameters,
        "board_sampling": BOARD_SAMPLING,
        "board_stream_sha256": result.unseeded.board_fingerprint,
        "pretrain_rule_files": result.rule_files,
        "versions": {"package": __version__, "python": platform.python_version(), "numpy": np.__version__},
    }


def emit_transfer_outputs(result: TransferResult, prefix: str | Path) -> dict[str, Path]:
    """Outputs for the pretraining, seeded and unseeded experiments, plus one metadata file."""
    prefix = Path(prefix)
    paths = {}
    for part, res in (("pretrain", result.pretrain), ("seeded", result.seeded), ("unseeded", result.unseeded)):
        for k, v in emit_outputs(res, prefix.with_name(f"{prefix.name}.{part}"), kind="transfer-part").items():
            paths[f"{part}.{k}"] = v
    meta = prefix.with_name(prefix.name + ".meta.json")
    meta.write_text(json.dumps(transfer_metadata(result), indent=2, sort_keys=True) + "\n")
    paths["meta"] = meta
    return paths
