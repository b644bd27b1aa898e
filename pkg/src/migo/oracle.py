"""Exhaustive minimax solution, optimal opponent and minimax regret.

Values are always stored from X's (the learner's) point of view: +1 won,
0 drawn, -1 lost.  Distances count plies to the end of the game under
optimal play, with the winner finishing as fast as possible and the loser
holding out as long as possible.  Drawn states take the shortest drawing
line.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

from .game import Game, GameId, GameState, Mark, get_game


class OracleLookupError(KeyError):
    """State missing from the table: unreachable or corrupt."""


class RegretInvariantError(RuntimeError):
    """The actual outcome beat the minimax expectation."""


@dataclass(frozen=True)
class OracleEntry:
    value: int
    distance: int


def _value_str(v: int) -> str:
    return "0" if v == 0 else f"{v:+d}"


def _reply_key(mover: Mark, entry: OracleEntry, order: int):
    """Sort key for choosing among successors; smaller is better for ``mover``."""
    v = entry.value if mover is Mark.X else -entry.value
    if v > 0:
        tie = entry.distance
    elif v < 0:
        tie = -entry.distance
    else:
        tie = 0
    return (-v, tie, order)


class OracleTable:
    """Map from canonical state to :class:`OracleEntry` for one game."""

    def __init__(self, game: Game, entries: dict[GameState, OracleEntry]):
        self.game = game
        self.entries = entries

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, state: GameState) -> bool:
        return self.game.canonical_form(state) in self.entries

    def entry(self, state: GameState) -> OracleEntry:
        try:
            return self.entries[self.game.canonical_form(state)]
        except KeyError:
            raise OracleLookupError(f"{state} not in {self.game.game_id.value} oracle") from None

    def expected_outcome(self, state: GameState) -> int:
        return self.entry(state).value

    def best_reply(self, state: GameState) -> GameState:
        """Deterministic optimal move for the side to move in ``state``."""
        moves = self.game.successors(state)
        if not moves:
            raise ValueError(f"best_reply called on terminal state {state}")
        keyed = [
            (_reply_key(state.to_move, self.entry(s), i), s) for i, s in enumerate(moves)
        ]
        return min(keyed, key=lambda t: t[0])[1]

    def minimax_regret(self, initial: GameState, actual: int) -> int:
        expected = self.expected_outcome(initial)
        if actual not in (-1, 0, 1):
            raise ValueError(f"actual outcome must be -1, 0 or 1, got {actual}")
        if actual > expected:
            raise RegretInvariantError(
                f"outcome {actual} exceeds expected {expected} from {initial}"
            )
        return expected - actual

    def save(self, path: str | Path) -> None:
        lines = [f"oracle {self.game.game_id.value} v1"]
        rows = sorted((s.serialize(), e) for s, e in self.entries.items())
        lines += [f"{s} {_value_str(e.value)} {e.distance}" for s, e in rows]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "OracleTable":
        lines = Path(path).read_text().splitlines()
        head = lines[0].split() if lines else []
        if len(head) != 3 or head[0] != "oracle" or head[2] != "v1":
            raise ValueError(f"{path}: bad oracle header {lines[:1]}")
        game = get_game(GameId(head[1]))
        entries = {}
        for n, line in enumerate(lines[1:], start=2):
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"{path}:{n}: expected 4 fields")
            state = GameState.parse(" ".join(parts[:2]))
            entries[state] = OracleEntry(int(parts[2]), int(parts[3]))
        return cls(game, entries)


def solve(game: Game | GameId | str) -> OracleTable:
    """Solve every canonical state reachable from the start position."""
    if not isinstance(game, Game):
        game = get_game(game)
    entries: dict[GameState, OracleEntry] = {}
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10_000))

    def visit(state: GameState) -> OracleEntry:
        canon = game.canonical_form(state)
        hit = entries.get(canon)
        if hit is not None:
            return hit
        terminal = game.outcome(canon)
        if terminal is not None:
            entry = OracleEntry(terminal, 0)
        else:
            children = [visit(s) for s in game.legal_moves(canon)]
            best = min(
                (_reply_key(canon.to_move, e, i), e) for i, e in enumerate(children)
            )[1]
            if best.value == 0:
                dist = min(e.distance for e in children if e.value == 0)
            else:
                dist = best.distance
            entry = OracleEntry(best.value, dist + 1)
        entries[canon] = entry
        return entry

    try:
        visit(game.start_state())
    finally:
        sys.setrecursionlimit(limit)
    return OracleTable(game, entries)


_SOLVED: dict[GameId, OracleTable] = {}


def get_oracle(game_id: GameId | str) -> OracleTable:
    """Process-wide cache of solved tables."""
    game_id = GameId(game_id)
    if game_id not in _SOLVED:
        _SOLVED[game_id] = solve(game_id)
    return _SOLVED[game_id]
