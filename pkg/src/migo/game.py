"""Board games: Noughts-and-Crosses, Hexapawn3 and Hexapawn4.

Boards are row-major strings read from the top-left cell, one character per
cell (``x``, ``o`` or ``.``).  X is always the learner and always moves first.
In Hexapawn X plays the pawns starting on the bottom row and moves up the
board; O starts on the top row and moves down.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache


class GameError(ValueError):
    """Raised for malformed states or serializations."""


class Mark(str, Enum):
    X = "x"
    O = "o"
    EMPTY = "."

    @property
    def opponent(self) -> "Mark":
        if self is Mark.EMPTY:
            raise GameError("empty cell has no opponent")
        return Mark.O if self is Mark.X else Mark.X


class GameId(str, Enum):
    NOUGHTS_AND_CROSSES = "ox"
    HEXAPAWN3 = "hexapawn3"
    HEXAPAWN4 = "hexapawn4"


@dataclass(frozen=True, order=True)
class GameState:
    board: str
    to_move: Mark

    def __post_init__(self):
        if not isinstance(self.to_move, Mark):
            object.__setattr__(self, "to_move", Mark(self.to_move))
        if self.to_move is Mark.EMPTY:
            raise GameError("to_move must be X or O")
        if any(c not in "xo." for c in self.board):
            raise GameError(f"invalid cell character in {self.board!r}")

    def count(self, mark: Mark) -> int:
        return self.board.count(mark.value)

    def serialize(self) -> str:
        width = _width_for(len(self.board))
        rows = [self.board[i:i + width] for i in range(0, len(self.board), width)]
        return "/".join(rows) + " " + self.to_move.value

    @classmethod
    def parse(cls, text: str) -> "GameState":
        """Inverse of :meth:`serialize`; the ``/`` row separators are optional."""
        parts = text.split()
        if len(parts) != 2 or parts[1] not in ("x", "o"):
            raise GameError(f"malformed state {text!r}")
        rows = parts[0].split("/")
        board = "".join(rows)
        width = _width_for(len(board))
        if len(rows) > 1 and any(len(r) != width for r in rows):
            raise GameError(f"malformed rows in {text!r}")
        return cls(board, Mark(parts[1]))

    def __str__(self) -> str:
        return self.serialize()


def _width_for(n_cells: int) -> int:
    if n_cells == 9:
        return 3
    if n_cells == 16:
        return 4
    raise GameError(f"unsupported board length {n_cells}")


def _dihedral_perms(width: int) -> tuple[tuple[int, ...], ...]:
    # new[i] = old[perm[i]]
    def idx(r, c):
        return r * width + c

    n = width - 1
    maps = [
        lambda r, c: (r, c),
        lambda r, c: (n - c, r),
        lambda r, c: (n - r, n - c),
        lambda r, c: (c, n - r),
        lambda r, c: (r, n - c),
        lambda r, c: (n - r, c),
        lambda r, c: (c, r),
        lambda r, c: (n - c, n - r),
    ]
    return tuple(
        tuple(idx(*f(r, c)) for r in range(width) for c in range(width)) for f in maps
    )


class Game:
    """Common interface; subclasses supply the rules."""

    game_id: GameId
    width: int
    symmetries: tuple[tuple[int, ...], ...]

    @property
    def n_cells(self) -> int:
        return self.width * self.width

    def start_state(self) -> GameState:
        raise NotImplementedError

    def validate(self, state: GameState) -> None:
        if len(state.board) != self.n_cells:
            raise GameError(
                f"{self.game_id.value} needs {self.n_cells} cells, got {len(state.board)}"
            )

    def legal_moves(self, state: GameState) -> list[GameState]:
        raise NotImplementedError

    def won(self, state: GameState, player: Mark) -> bool:
        raise NotImplementedError

    def drawn(self, state: GameState) -> bool:
        raise NotImplementedError

    def winner(self, state: GameState) -> Mark | None:
        for player in (Mark.X, Mark.O):
            if self.won(state, player):
                return player
        return None

    def is_terminal(self, state: GameState) -> bool:
        return self.winner(state) is not None or self.drawn(state)

    def outcome(self, state: GameState) -> int | None:
        """Value of a terminal state for X (+1, 0, -1); None if play continues."""
        w = self.winner(state)
        if w is Mark.X:
            return 1
        if w is Mark.O:
            return -1
        if self.drawn(state):
            return 0
        return None

    def successors(self, state: GameState) -> list[GameState]:
        """Moves available during play: none once the game is over."""
        if self.is_terminal(state):
            return []
        return self.legal_moves(state)

    def transform(self, state: GameState, perm: tuple[int, ...]) -> GameState:
        return GameState("".join(state.board[j] for j in perm), state.to_move)

    def orbit(self, state: GameState) -> list[GameState]:
        return [self.transform(state, p) for p in self.symmetries]

    def canonical_form(self, state: GameState) -> GameState:
        return _canonical(self, state)

    def initial_board_set(self) -> list[GameState]:
        """Symmetry-reduced boards one full move (X then O) after the start."""
        boards = set()
        for s1 in self.successors(self.start_state()):
            for s2 in self.successors(s1):
                boards.add(self.canonical_form(s2))
        return sorted(boards, key=GameState.serialize)

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


@lru_cache(maxsize=None)
def _canonical(game: Game, state: GameState) -> GameState:
    return min(game.orbit(state), key=GameState.serialize)


class NoughtsAndCrosses(Game):
    game_id = GameId.NOUGHTS_AND_CROSSES
    width = 3
    symmetries = _dihedral_perms(3)
    LINES = (
        (0, 1, 2), (3, 4, 5), (6, 7, 8),
        (0, 3, 6), (1, 4, 7), (2, 5, 8),
        (0, 4, 8), (2, 4, 6),
    )

    def start_state(self) -> GameState:
        return GameState("." * 9, Mark.X)

    def validate(self, state: GameState) -> None:
        super().validate(state)
        diff = state.count(Mark.X) - state.count(Mark.O)
        if diff not in (0, 1):
            raise GameError(f"invalid mark counts in {state}")
        expected = Mark.X if diff == 0 else Mark.O
        if state.to_move is not expected:
            raise GameError(f"wrong side to move in {state}")

    def legal_moves(self, state: GameState) -> list[GameState]:
        self.validate(state)
        return _ox_moves(state)

    def won(self, state: GameState, player: Mark) -> bool:
        b, p = state.board, player.value
        return any(b[i] == p and b[j] == p and b[k] == p for i, j, k in self.LINES)

    def drawn(self, state: GameState) -> bool:
        return "." not in state.board and self.winner(state) is None


@lru_cache(maxsize=None)
def _ox_moves(state: GameState) -> list[GameState]:
    b, m = state.board, state.to_move
    nxt = m.opponent
    return [
        GameState(b[:i] + m.value + b[i + 1:], nxt) for i, c in enumerate(b) if c == "."
    ]


class Hexapawn(Game):
    """Hexapawn on a width x width board with a full row of pawns per side.

    A pawn moves one square forward onto an empty square or captures an
    opposing pawn diagonally forward.  Reaching the far row wins; a player
    to move without a legal move is drawn.
    """

    def __init__(self, width: int):
        self.width = width
        self.game_id = {3: GameId.HEXAPAWN3, 4: GameId.HEXAPAWN4}[width]
        self.symmetries = (
            tuple(range(width * width)),
            tuple(r * width + (width - 1 - c) for r in range(width) for c in range(width)),
        )

    def __repr__(self) -> str:
        return f"Hexapawn({self.width})"

    def start_state(self) -> GameState:
        w = self.width
        return GameState("o" * w + "." * (w * (w - 2)) + "x" * w, Mark.X)

    def validate(self, state: GameState) -> None:
        super().validate(state)
        for mark in (Mark.X, Mark.O):
            if state.count(mark) > self.width:
                raise GameError(f"too many {mark.value} pawns in {state}")

    def legal_moves(self, state: GameState) -> list[GameState]:
        self.validate(state)
        return _hexapawn_moves(self.width, state)

    def won(self, state: GameState, player: Mark) -> bool:
        w = self.width
        far = state.board[:w] if player is Mark.X else state.board[-w:]
        return player.value in far

    def drawn(self, state: GameState) -> bool:
        return self.winner(state) is None and not self.legal_moves(state)


@lru_cache(maxsize=None)
def _hexapawn_moves(width: int, state: GameState) -> list[GameState]:
    b, m = state.board, state.to_move
    me, other = m.value, m.opponent.value
    step = -width if m is Mark.X else width
    out = []
    for src, c in enumerate(b):
        if c != me:
            continue
        row, col = divmod(src, width)
        dst_row = row + step // width
        if not 0 <= dst_row < width:
            continue
        targets = []
        fwd = src + step
        if b[fwd] == ".":
            targets.append(fwd)
        for dc in (-1, 1):
            if 0 <= col + dc < width and b[fwd + dc] == other:
                targets.append(fwd + dc)
        for dst in targets:
            cells = list(b)
            cells[src] = "."
            cells[dst] = me
            out.append(GameState("".join(cells), m.opponent))
    return out


@lru_cache(maxsize=None)
def get_game(game_id: GameId | str) -> Game:
    game_id = GameId(game_id)
    if game_id is GameId.NOUGHTS_AND_CROSSES:
        return NoughtsAndCrosses()
    if game_id is GameId.HEXAPAWN3:
        return Hexapawn(3)
    return Hexapawn(4)
