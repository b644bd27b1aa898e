"""Comparison learners: MENACE bead boxes, tabular Q-learning and a small DQN.

Every agent plays X against the optimal opponent and exposes the same two
calls as the MIGO learner: ``select_move(state, rng)`` during play and
``observe(trace, outcome)`` once the game is over.  Rewards are +1/0/-1 at
the terminal transition only, on the same scale as the regret.
"""

from __future__ import annotations

import json
import math
import random
from collections import deque
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .game import Game, GameId, GameState, Mark, get_game


class AgentConfigError(ValueError):
    pass


class DqnTrainingError(RuntimeError):
    """Raised when the TD loss stops being finite."""


def learner_transitions(trace: list[GameState], outcome: int):
    """(s, s_after_move, reward, s_next or None) for each learner move.

    ``s_next`` is the state after the opponent's reply, or None when the
    game ended on this move or on that reply.
    """
    n = len(trace) - 1
    out = []
    for i in range(0, n, 2):
        nxt = i + 2
        if nxt < n:
            out.append((trace[i], trace[i + 1], 0, trace[nxt]))
        else:
            out.append((trace[i], trace[i + 1], outcome, None))
    return out


def _canonical_moves(game: Game, state: GameState, canon: bool) -> dict[GameState, GameState]:
    """Move key -> one concrete successor, in move order."""
    keys: dict[GameState, GameState] = {}
    for s in game.successors(state):
        k = game.canonical_form(s) if canon else s
        keys.setdefault(k, s)
    return keys


def _read_checkpoint(path: str | Path, kind: str):
    lines = Path(path).read_text().splitlines()
    head = lines[0].split() if lines else []
    if len(head) != 3 or head[0] != kind or head[1] != "v1" or not head[2].startswith("game="):
        raise ValueError(f"{path}: not a {kind} v1 checkpoint")
    game = get_game(head[2][len("game="):])
    rows = []
    for n, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}:{n}: expected 3 tab-separated fields")
        rows.append((GameState.parse(parts[0]), GameState.parse(parts[1]), parts[2]))
    return game, rows


class RandomAgent:
    name = "random"

    def __init__(self, game: Game, seed: int = 0):
        self.game = game

    def select_move(self, state: GameState, rng: random.Random) -> GameState:
        moves = self.game.successors(state)
        return moves[rng.randrange(len(moves))]

    def observe(self, trace, outcome) -> bool:
        return False

    def hyperparameters(self) -> dict:
        return {}


# -- MENACE ------------------------------------------------------------------


@dataclass(frozen=True)
class MenaceConfig:
    initial_beads: int = 4
    win_beads: int = 3
    draw_beads: int = 1
    loss_beads: int = 1


class BeadBox:
    """One matchbox per canonical position; beads keyed by canonical successor."""

    def __init__(self, game: Game, config: MenaceConfig = MenaceConfig()):
        if game.game_id is GameId.HEXAPAWN4:
            raise AgentConfigError("MENACE is defined only for the 3x3 games")
        self.game = game
        self.config = config
        self.boxes: dict[GameState, dict[GameState, int]] = {}

    def box(self, state: GameState) -> dict[GameState, int]:
        c = self.game.canonical_form(state)
        b = self.boxes.get(c)
        if b is None:
            b = {k: self.config.initial_beads for k in _canonical_moves(self.game, c, True)}
            self.boxes[c] = b
        return b

    def select(self, state: GameState, rng: random.Random) -> GameState:
        moves = _canonical_moves(self.game, state, True)
        beads = self.box(state)
        keys = list(moves)
        weights = [beads[k] for k in keys]
        total = sum(weights)
        if total == 0:
            return moves[keys[rng.randrange(len(keys))]]
        pick = rng.randrange(total)
        for k, w in zip(keys, weights):
            if pick < w:
                return moves[k]
            pick -= w
        raise AssertionError("unreachable")

    def update(self, trace: list[GameState], outcome: int) -> None:
        cfg = self.config
        delta = {1: cfg.win_beads, 0: cfg.draw_beads, -1: -cfg.loss_beads}[outcome]
        for i in range(0, len(trace) - 1, 2):
            beads = self.box(trace[i])
            k = self.game.canonical_form(trace[i + 1])
            beads[k] = max(0, beads[k] + delta)

    def save(self, path: str | Path) -> None:
        lines = [f"beads v1 game={self.game.game_id.value}"]
        for s in sorted(self.boxes, key=GameState.serialize):
            for m, n in sorted(self.boxes[s].items(), key=lambda t: t[0].serialize()):
                lines.append(f"{s.serialize()}\t{m.serialize()}\t{n}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path, config: MenaceConfig = MenaceConfig()) -> "BeadBox":
        game, rows = _read_checkpoint(path, "beads")
        box = cls(game, config)
        for s, m, n in rows:
            box.boxes.setdefault(s, {})[m] = int(n)
        return box


class MenaceAgent:
    name = "menace"

    def __init__(self, game: Game, seed: int = 0, config: MenaceConfig = MenaceConfig()):
        self.beads = BeadBox(game, config)

    def select_move(self, state, rng):
        return self.beads.select(state, rng)

    def observe(self, trace, outcome) -> bool:
        self.beads.update(trace, outcome)
        return True

    def hyperparameters(self) -> dict:
        return asdict(self.beads.config)


# -- Tabular Q-learning --------------------------------------------------------


@dataclass(frozen=True)
class QConfig:
    alpha: float = 0.3
    gamma: float = 0.9
    q_init: float = 1.0
    epsilon: float = 0.0
    canonical: bool = True


class QTable:
    """Q-values keyed by (state, successor), canonicalized unless disabled."""

    def __init__(self, game: Game, config: QConfig = QConfig()):
        self.game = game
        self.config = config
        self.q: dict[tuple[GameState, GameState], float] = {}

    def _key(self, state: GameState, succ: GameState):
        if not self.config.canonical:
            return (state, succ)
        c = self.game.canonical_form(state)
        perm = next(p for p in self.game.symmetries if self.game.transform(state, p) == c)
        return (c, self.game.canonical_form(self.game.transform(succ, perm)))

    def value(self, state: GameState, succ: GameState) -> float:
        return self.q.get(self._key(state, succ), self.config.q_init)

    def best_value(self, state: GameState) -> float:
        return max(self.value(state, s) for s in self.game.successors(state))

    def select(self, state: GameState, rng: random.Random) -> GameState:
        moves = self.game.successors(state)
        if self.config.epsilon > 0 and rng.random() < self.config.epsilon:
            return moves[rng.randrange(len(moves))]
        vals = [self.value(state, s) for s in moves]
        top = max(vals)
        best = [s for s, v in zip(moves, vals) if v == top]
        return best[rng.randrange(len(best))]

    def update(self, state, succ, reward: float, nxt: GameState | None) -> float:
        cfg = self.config
        future = 0.0 if nxt is None else self.best_value(nxt)
        key = self._key(state, succ)
        old = self.q.get(key, cfg.q_init)
        new = old + cfg.alpha * (reward + cfg.gamma * future - old)
        self.q[key] = new
        return new

    def save(self, path: str | Path) -> None:
        lines = [f"qtable v1 game={self.game.game_id.value}"]
        for (s, m), v in sorted(self.q.items(), key=lambda t: (t[0][0].serialize(), t[0][1].serialize())):
            lines.append(f"{s.serialize()}\t{m.serialize()}\t{v!r}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path, config: QConfig = QConfig()) -> "QTable":
        game, rows = _read_checkpoint(path, "qtable")
        table = cls(game, config)
        for s, m, v in rows:
            table.q[(s, m)] = float(v)
        return table


class QAgent:
    name = "qlearning"

    def __init__(self, game: Game, seed: int = 0, config: QConfig = QConfig()):
        self.table = QTable(game, config)

    def select_move(self, state, rng):
        return self.table.select(state, rng)

    def observe(self, trace, outcome) -> bool:
        for s, a, r, nxt in learner_transitions(trace, outcome):
            self.table.update(s, a, r, nxt)
        return True

    def hyperparameters(self) -> dict:
        return asdict(self.table.config)


# -- Deep Q-learning ---------------------------------------------------------


@dataclass(frozen=True)
class DqnConfig:
    discount: float = 0.8
    l2_strength: float = 0.01
    target_update_rate: float = 0.01
    eps_initial: float = 0.6
    eps_final: float = 0.1
    eps_horizon: int = 1000
    hidden: int = 64
    batch_size: int = 32
    buffer_size: int = 10_000
    learning_rate: float = 0.01

    def __post_init__(self):
        if not 0 <= self.discount <= 1:
            raise AgentConfigError("discount must lie in [0, 1]")
        if not 0 < self.target_update_rate <= 1:
            raise AgentConfigError("target update rate must lie in (0, 1]")
        if not 0 <= self.eps_final <= self.eps_initial <= 1:
            raise AgentConfigError("need 0 <= eps_final <= eps_initial <= 1")
        if min(self.eps_horizon, self.hidden, self.batch_size, self.buffer_size) < 1:
            raise AgentConfigError("sizes and horizon must be positive")
        if self.l2_strength < 0 or self.learning_rate <= 0:
            raise AgentConfigError("bad regularization or learning rate")


def epsilon_at(config: DqnConfig, step: int) -> float:
    frac = min(max(step, 0) / config.eps_horizon, 1.0)
    return config.eps_initial + frac * (config.eps_final - config.eps_initial)


def action_size(game: Game) -> int:
    return game.n_cells if game.game_id is GameId.NOUGHTS_AND_CROSSES else 3 * game.n_cells


def action_of(game: Game, state: GameState, succ: GameState) -> int:
    """Placement cell for noughts and crosses; 3*source + kind for Hexapawn."""
    changed = [i for i, (a, b) in enumerate(zip(state.board, succ.board)) if a != b]
    if game.game_id is GameId.NOUGHTS_AND_CROSSES:
        return changed[0]
    me = state.to_move.value
    src = next(i for i in changed if state.board[i] == me)
    dst = next(i for i in changed if succ.board[i] == me)
    kind = {0: 0, -1: 1, 1: 2}[dst % game.width - src % game.width]
    return 3 * src + kind


def legal_actions(game: Game, state: GameState) -> dict[int, GameState]:
    return {action_of(game, state, s): s for s in game.successors(state)}


def encode(game: Game, state: GameState) -> np.ndarray:
    """One-hot (empty, x, o) per cell followed by a side-to-move bit."""
    n = game.n_cells
    x = np.zeros(3 * n + 1)
    for i, c in enumerate(state.board):
        x[3 * i + ".xo".index(c)] = 1.0
    x[-1] = 1.0 if state.to_move is Mark.X else 0.0
    return x


PARAM_NAMES = ("W1", "b1", "W2", "b2")


def init_params(n_in: int, n_hidden: int, n_out: int, rng: np.random.Generator) -> dict:
    return {
        "W1": rng.normal(0, math.sqrt(2 / n_in), (n_in, n_hidden)),
        "b1": np.zeros(n_hidden),
        "W2": rng.normal(0, math.sqrt(1 / n_hidden), (n_hidden, n_out)),
        "b2": np.zeros(n_out),
    }


def forward(params: dict, x: np.ndarray):
    h_pre = x @ params["W1"] + params["b1"]
    h = np.maximum(h_pre, 0.0)
    return h @ params["W2"] + params["b2"], (x, h_pre, h)


def td_loss(params: dict, x, actions, targets, l2: float):
    """Loss and gradients for 0.5*mean((Q(x,a) - target)^2) + 0.5*l2*|W|^2."""
    q, (x, h_pre, h) = forward(params, x)
    m = len(actions)
    rows = np.arange(m)
    err = q[rows, actions] - targets
    loss = 0.5 * np.mean(err ** 2) + 0.5 * l2 * (np.sum(params["W1"] ** 2) + np.sum(params["W2"] ** 2))
    dq = np.zeros_like(q)
    dq[rows, actions] = err / m
    grads = {"W2": h.T @ dq + l2 * params["W2"], "b2": dq.sum(axis=0)}
    dh = (dq @ params["W2"].T) * (h_pre > 0)
    grads["W1"] = x.T @ dh + l2 * params["W1"]
    grads["b1"] = dh.sum(axis=0)
    return float(loss), grads


def soft_update(target: dict, online: dict, tau: float) -> dict:
    """(1 - tau) * target + tau * online, written so equal inputs come back unchanged."""
    return {k: target[k] + tau * (online[k] - target[k]) for k in target}


def save_params(path: str | Path, params: dict) -> None:
    """JSON shape header line, then the flattened float64 array."""
    header = {"format": "mlp v1", "dtype": "<f8",
              "shapes": {k: list(params[k].shape) for k in PARAM_NAMES}}
    flat = np.concatenate([params[k].ravel() for k in PARAM_NAMES]).astype("<f8")
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode())
        fh.write(flat.tobytes())


def load_params(path: str | Path) -> dict:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != "mlp v1":
            raise ValueError(f"{path}: not an mlp v1 checkpoint")
        flat = np.frombuffer(fh.read(), dtype=header["dtype"])
    out, pos = {}, 0
    for k in PARAM_NAMES:
        shape = tuple(header["shapes"][k])
        size = int(np.prod(shape))
        out[k] = flat[pos:pos + size].reshape(shape).copy()
        pos += size
    if pos != flat.size:
        raise ValueError(f"{path}: size mismatch")
    return out


class DqnAgent:
    name = "dqn"

    def __init__(self, game: Game, seed: int = 0, config: DqnConfig = DqnConfig()):
        self.game = game
        self.config = config
        self.np_rng = np.random.default_rng(seed)
        n_in = 3 * game.n_cells + 1
        self.params = init_params(n_in, config.hidden, action_size(game), self.np_rng)
        self.target = {k: v.copy() for k, v in self.params.items()}
        self.buffer: deque = deque(maxlen=config.buffer_size)
        self.step = 0

    def q_values(self, state: GameState, params: dict | None = None) -> np.ndarray:
        q, _ = forward(self.params if params is None else params, encode(self.game, state)[None, :])
        return q[0]

    def greedy(self, state: GameState, params: dict | None = None) -> tuple[int, float]:
        legal = legal_actions(self.game, state)
        q = self.q_values(state, params)
        masked = np.full_like(q, -np.inf)
        idx = list(legal)
        masked[idx] = q[idx]
        a = int(np.argmax(masked))
        return a, float(masked[a])

    def select_move(self, state: GameState, rng: random.Random) -> GameState:
        legal = legal_actions(self.game, state)
        eps = epsilon_at(self.config, self.step)
        self.step += 1
        if rng.random() < eps:
            keys = sorted(legal)
            return legal[keys[rng.randrange(len(keys))]]
        return legal[self.greedy(state)[0]]

    def observe(self, trace, outcome) -> bool:
        n_act = action_size(self.game)
        for s, a, r, nxt in learner_transitions(trace, outcome):
            mask = np.zeros(n_act, dtype=bool)
            if nxt is not None:
                mask[list(legal_actions(self.game, nxt))] = True
                x_next = encode(self.game, nxt)
            else:
                x_next = np.zeros(3 * self.game.n_cells + 1)
            self.buffer.append((encode(self.game, s), action_of(self.game, s, a), float(r), x_next, mask))
            if len(self.buffer) >= self.config.batch_size:
                self.train_step()
        return True

    def train_step(self) -> float:
        cfg = self.config
        idx = self.np_rng.choice(len(self.buffer), cfg.batch_size, replace=False)
        batch = [self.buffer[i] for i in idx]
        x = np.stack([b[0] for b in batch])
        actions = np.array([b[1] for b in batch])
        rewards = np.array([b[2] for b in batch])
        masks = np.stack([b[4] for b in batch])
        q_next, _ = forward(self.target, np.stack([b[3] for b in batch]))
        live = masks.any(axis=1)
        best = np.where(masks, q_next, -np.inf).max(axis=1)
        targets = rewards + cfg.discount * np.where(live, best, 0.0)
        loss, grads = td_loss(self.params, x, actions, targets, cfg.l2_strength)
        if not math.isfinite(loss):
            norms = ", ".join(f"{k}: {np.linalg.norm(v):.3g}" for k, v in self.params.items())
            raise DqnTrainingError(f"non-finite loss {loss} at step {self.step}; param norms {norms}")
        self.params = {k: self.params[k] - cfg.learning_rate * grads[k] for k in self.params}
        self.target = soft_update(self.target, self.params, cfg.target_update_rate)
        return loss

    def hyperparameters(self) -> dict:
        return asdict(self.config)
