"""Inspecting learned strategies: acceptance sets and over-generalisation."""

from __future__ import annotations

from collections import deque

from .game import Game, GameState
from .learner import Strategy
from .mil.logic import Program
from .mil.prover import GamePrimitives, Prover
from .oracle import OracleTable


def reachable_states(game: Game) -> list[GameState]:
    """Every state reachable from the start, in breadth-first order."""
    start = game.start_state()
    seen = {start}
    order = [start]
    todo = deque([start])
    while todo:
        s = todo.popleft()
        for t in game.successors(s):
            if t not in seen:
                seen.add(t)
                order.append(t)
                todo.append(t)
    return order


def acceptance_set(program: Program, pred: str, states, primitives: GamePrimitives) -> set:
    """All (A, B) with ``pred(A, B)`` provable, for A ranging over ``states``."""
    prover = Prover(program, primitives)
    return {(a, b) for a in states for a, b in prover.answers(pred, (a, None))}


def win_precision(strategy: Strategy, oracle: OracleTable, states=None) -> dict[str, tuple[int, int]]:
    """For each win_k: (pairs confirmed by the oracle, pairs proved).

    A pair (A, B) is confirmed when B is won for the player who moved at A
    and the win arrives within k of that player's moves.
    """
    game = oracle.game
    if states is None:
        states = reachable_states(game)
    primitives = GamePrimitives(game)
    out = {}
    for k in strategy.win_depths:
        good = total = 0
        for a, b in sorted(acceptance_set(strategy.program, f"win_{k}", states, primitives),
                           key=lambda t: (t[0].serialize(), t[1].serialize())):
            total += 1
            mover = 1 if a.to_move.value == "x" else -1
            e = oracle.entry(b)
            if e.value * mover == 1 and e.distance <= 2 * k - 2:
                good += 1
        out[f"win_{k}"] = (good, total)
    return out
