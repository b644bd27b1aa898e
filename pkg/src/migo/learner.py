"""Strategy learning from game play with positive-only credit assignment.

Against an optimal opponent the outcome of a game labels its moves without
any negative examples: in a won game every learner move keeps the win, and
in a drawn game that the win strategy could not open, every move by either
side keeps the draw.  The strategy is relearned from scratch after each
game, one depth at a time, each learned definition becoming background for
the next.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from .game import Game, GameError, GameState, Mark
from .mil.induction import add_to_background, default_namer, learn
from .mil.logic import METARULES, Program
from .mil.prover import GamePrimitives, Prover
from .mil.syntax import load_rules, render_rules

WIN, DRAW = "win", "draw"
TASK_RE = re.compile(r"^(win|draw)_(\d+)$")


@dataclass(frozen=True)
class MoveExample:
    from_state: GameState
    to_state: GameState
    task: str
    depth: int

    @property
    def pair(self) -> tuple[GameState, GameState]:
        return (self.from_state, self.to_state)


@dataclass(frozen=True)
class LearnerMode:
    """Mixed learning when ``stability_counter`` is None, separated otherwise."""

    stability_counter: int | None = None

    def __post_init__(self):
        if self.stability_counter is not None and self.stability_counter <= 0:
            raise ValueError("stability counter must be positive")

    @property
    def separated(self) -> bool:
        return self.stability_counter is not None

    @classmethod
    def mixed(cls) -> "LearnerMode":
        return cls(None)

    def __str__(self) -> str:
        return f"separated({self.stability_counter})" if self.separated else "mixed"


def canonical_pair(game: Game, a: GameState, b: GameState) -> tuple[GameState, GameState]:
    """Joint symmetry representative of a move."""
    return min(
        ((game.transform(a, p), game.transform(b, p)) for p in game.symmetries),
        key=lambda t: (t[0].serialize(), t[1].serialize()),
    )


class ExampleStore:
    """Deduplicated positive examples per task and depth.

    Draw examples remember the initial boards of the games that produced
    them, so they can be re-tested whenever the win strategy changes.
    """

    def __init__(self, game: Game):
        self.game = game
        self.win: dict[int, dict[tuple, MoveExample]] = {}
        self.draw: dict[int, dict[tuple, MoveExample]] = {}
        self.draw_sources: dict[tuple, set[GameState]] = {}

    def add(self, example: MoveExample, initial: GameState | None = None) -> bool:
        """Store an example; True if it was new."""
        key = canonical_pair(self.game, *example.pair)
        canon = MoveExample(key[0], key[1], example.task, example.depth)
        bucket = (self.win if example.task == WIN else self.draw).setdefault(example.depth, {})
        added = key not in bucket
        bucket.setdefault(key, canon)
        if example.task == DRAW:
            sources = self.draw_sources.setdefault((example.depth, key), set())
            src = self.game.canonical_form(initial if initial is not None else example.from_state)
            if src not in sources:
                sources.add(src)
                added = True
        return added

    def examples(self, task: str, depth: int) -> list[MoveExample]:
        bucket = (self.win if task == WIN else self.draw).get(depth, {})
        return [bucket[k] for k in sorted(bucket, key=lambda k: (k[0].serialize(), k[1].serialize()))]

    def depths(self, task: str) -> list[int]:
        return sorted(d for d, b in (self.win if task == WIN else self.draw).items() if b)

    def draw_initials(self, example: MoveExample) -> set[GameState]:
        return self.draw_sources.get((example.depth, example.pair), set())

    def fingerprint(self) -> tuple:
        win = tuple((d, tuple(sorted((a.serialize(), b.serialize()) for a, b in bk))) for d, bk in sorted(self.win.items()))
        draw = tuple(
            (d, k[0].serialize(), k[1].serialize(), tuple(sorted(s.serialize() for s in srcs)))
            for (d, k), srcs in sorted(self.draw_sources.items(), key=lambda t: (t[0][0], t[0][1][0].serialize(), t[0][1][1].serialize()))
        )
        return (win, draw)

    def __len__(self) -> int:
        return sum(len(b) for b in self.win.values()) + sum(len(b) for b in self.draw.values())

    def all_examples(self) -> list[MoveExample]:
        return [e for t in (WIN, DRAW) for d in self.depths(t) for e in self.examples(t, d)]


@dataclass(frozen=True)
class Strategy:
    program: Program = field(default_factory=Program)
    win_depths: tuple[int, ...] = ()
    draw_depths: tuple[int, ...] = ()

    @property
    def tasks(self) -> list[str]:
        return [f"win_{k}" for k in self.win_depths] + [f"draw_{k}" for k in self.draw_depths]

    @property
    def win_program(self) -> "Strategy":
        return Strategy(self.program.restrict(f"win_{k}" for k in self.win_depths), self.win_depths, ())

    def render(self) -> str:
        return render_rules(self.program)

    @classmethod
    def from_program(cls, program: Program) -> "Strategy":
        """Entry points are the defined ``win_k`` / ``draw_k`` predicates."""
        wins, draws = [], []
        for p in program.defined:
            m = TASK_RE.match(p)
            if m:
                (wins if m.group(1) == WIN else draws).append(int(m.group(2)))
        return cls(program, tuple(sorted(wins)), tuple(sorted(draws)))

    def __bool__(self) -> bool:
        return bool(self.win_depths or self.draw_depths)


def strategy_move(state: GameState, strategy: Strategy, prover: Prover,
                  tiers: tuple[str, ...] = (WIN, DRAW)) -> tuple[GameState, str] | None:
    """First move proved by the strategy, trying win_i then draw_i by increasing i."""
    for tier in tiers:
        depths = strategy.win_depths if tier == WIN else strategy.draw_depths
        for k in depths:
            found = prover.answers(f"{tier}_{k}", (state, None))
            if found:
                return found[0][1], f"{tier}_{k}"
    return None


def select_move(state: GameState, strategy: Strategy, rng: random.Random,
                primitives: GamePrimitives) -> GameState:
    moves = primitives.game.successors(state)
    if not moves:
        raise ValueError(f"no legal move from {state}")
    hit = strategy_move(state, strategy, Prover(strategy.program, primitives))
    if hit is not None:
        return hit[0]
    return moves[rng.randrange(len(moves))]


def _move_depth(plies_after: int) -> int:
    return math.ceil(plies_after / 2)


def check_trace(game: Game, trace: list[GameState]) -> None:
    if len(trace) < 2:
        raise GameError("trace needs at least one move")
    if trace[0].to_move is not Mark.X:
        raise GameError("trace must start with the learner to move")
    for a, b in zip(trace, trace[1:]):
        if b not in game.successors(a):
            raise GameError(f"illegal transition {a} -> {b}")


def label_episode(trace: list[GameState], outcome: int, win_strategy: Strategy,
                  primitives: GamePrimitives) -> list[MoveExample]:
    """Positive examples derivable from one game against an optimal opponent."""
    game = primitives.game
    check_trace(game, trace)
    n = len(trace) - 1
    if outcome == 1:
        return [
            MoveExample(trace[i], trace[i + 1], WIN, _move_depth(n - i))
            for i in range(0, n, 2)
        ]
    if outcome == 0:
        prover = Prover(win_strategy.program, primitives)
        if strategy_move(trace[0], win_strategy, prover, tiers=(WIN,)) is not None:
            return []
        return [MoveExample(trace[i], trace[i + 1], DRAW, _move_depth(n - i)) for i in range(n)]
    return []


class MigoContext:
    """Everything the staged learner needs besides the examples."""

    def __init__(self, primitives: GamePrimitives, base: Program | None = None,
                 metarules=METARULES, max_clauses: int = 2):
        self.primitives = primitives
        self.base = base if base is not None else Program()
        self.metarules = metarules
        self.max_clauses = max_clauses

    def learn_task(self, examples: list[MoveExample], task: str, bk: Program) -> Program | None:
        """Background extended with ``task``, or None if it cannot be learned.

        Each example not already covered by an earlier sub-predicate of this
        task gets a one-clause invented predicate; the task is then learned
        over all examples on top of them.  Unused sub-predicates stay in the
        background.
        """
        invented: list[str] = []
        for i, ex in enumerate(examples, start=1):
            prover = Prover(bk, self.primitives)
            if any(prover.holds(p, *ex.pair) for p in invented):
                continue
            name = default_namer(task)(i, set(bk.defined))
            one = learn([ex], name, bk, self.primitives, self.metarules, max_clauses=1, invent=False)
            if one is not None:
                bk = add_to_background(bk, one)
                invented.append(name)
        top = learn(examples, task, bk, self.primitives, self.metarules, self.max_clauses)
        if top is None:
            return None
        return add_to_background(bk, top)

    def valid_draws(self, store: ExampleStore, depth: int, win_strategy: Strategy,
                    prover: Prover) -> list[MoveExample]:
        out = []
        for ex in store.examples(DRAW, depth):
            if any(strategy_move(s, win_strategy, prover, tiers=(WIN,)) is None
                   for s in sorted(store.draw_initials(ex))):
                out.append(ex)
        return out


def migo_learn(store: ExampleStore, context: MigoContext, learn_draws: bool = True) -> Strategy:
    """Relearn the whole strategy from the stored examples.

    Win tasks are learned by increasing depth, then draw tasks, each on top
    of everything learned before.  Draw tasks wait until a win task exists
    and this game has produced a win example, and only use draw examples
    whose source game the new win strategy could not have won.
    """
    bk = context.base
    seed = Strategy.from_program(bk)
    wins = list(seed.win_depths)
    for k in store.depths(WIN):
        task = f"win_{k}"
        if task in bk.defined:
            continue
        grown = context.learn_task(store.examples(WIN, k), task, bk)
        if grown is not None:
            bk = grown
            wins.append(k)
    draws = list(seed.draw_depths)
    if learn_draws and wins and store.depths(WIN):
        win_strategy = Strategy(bk, tuple(sorted(wins)), ())
        prover = Prover(bk, context.primitives)
        for k in store.depths(DRAW):
            task = f"draw_{k}"
            if task in bk.defined:
                continue
            examples = context.valid_draws(store, k, win_strategy, prover)
            if not examples:
                continue
            grown = context.learn_task(examples, task, bk)
            if grown is not None:
                bk = grown
                draws.append(k)
    wins, draws = tuple(sorted(wins)), tuple(sorted(draws))
    entry = [f"win_{k}" for k in wins] + [f"draw_{k}" for k in draws]
    return Strategy(bk.restrict(entry), wins, draws)


def transfer_in(path: str | Path, include_draws: bool = False) -> Strategy:
    """Strategy loaded from a rule file, to seed learning on another game.

    Draw tasks are dropped unless asked for: they were validated against the
    source game's win strategy, and a draw rule that fires from the start
    stops the learner from ever exploring a win in the new game.
    """
    strategy = Strategy.from_program(load_rules(path))
    return strategy if include_draws else strategy.win_program


class MigoLearner:
    """A MIGO player that relearns its strategy after every game."""

    def __init__(self, game: Game, mode: LearnerMode = LearnerMode(), base: Program | None = None,
                 max_clauses: int = 2):
        self.game = game
        self.mode = mode
        self.primitives = GamePrimitives(game)
        self.context = MigoContext(self.primitives, base, max_clauses=max_clauses)
        self.store = ExampleStore(game)
        self.strategy = Strategy.from_program(self.context.base)
        self.learning_draws = not mode.separated
        self.stable_games = 0
        self._learned_from = self.store.fingerprint()

    def select_move(self, state: GameState, rng: random.Random) -> GameState:
        return select_move(state, self.strategy, rng, self.primitives)

    def observe(self, trace: list[GameState], outcome: int) -> tuple[list[MoveExample], bool]:
        """Label a finished game, relearn; returns (labels, strategy changed)."""
        labels = label_episode(trace, outcome, self.strategy.win_program, self.primitives)
        for ex in labels:
            if ex.task == DRAW and not self.learning_draws:
                continue
            self.store.add(ex, initial=trace[0])
        old = self.strategy
        fp = self.store.fingerprint()
        if fp != self._learned_from:
            self.strategy = migo_learn(self.store, self.context, learn_draws=self.learning_draws)
            self._learned_from = fp
        if not self.learning_draws:
            win_same = self.strategy.win_program.render() == old.win_program.render()
            self.stable_games = self.stable_games + 1 if (win_same and self.strategy.win_depths) else 0
            if self.stable_games >= self.mode.stability_counter:
                self.learning_draws = True
        return labels, self.strategy.render() != old.render()
