"""SLD resolution with negation as failure over ground game states.

Answers to calls whose first argument is ground are tabled in a cache owned
by the primitives object, keyed by a structural fingerprint of the called
predicate's definition.  Two programs that define a predicate the same way
therefore share answers, which keeps relearning from scratch cheap.
"""

from __future__ import annotations

from typing import Iterator

from ..game import Game, GameState
from .logic import PRIMITIVE_ARITY, Clause, Literal, Program, ProgramError, is_var

DEFAULT_DEPTH = 64


class FlounderError(ProgramError):
    """Negated call with an unbound shared variable."""


class InstantiationError(ProgramError):
    """Primitive called without its input argument bound."""


class GamePrimitives:
    """``move/2``, ``won/1`` and ``drawn/1`` evaluated against a game.

    ``move`` enumerates the moves available during play, so it has no
    solutions from a finished game.  ``won`` holds when either side has won.
    """

    arity = PRIMITIVE_ARITY

    def __init__(self, game: Game):
        self.game = game
        self.table: dict = {}
        self._moves: dict[GameState, list[tuple]] = {}

    def call(self, pred: str, args: tuple) -> list[tuple]:
        first = args[0]
        if first is None:
            raise InstantiationError(f"{pred}/{len(args)} needs a bound first argument")
        if pred == "move":
            rows = self._moves.get(first)
            if rows is None:
                rows = [(first, s) for s in self.game.successors(first)]
                self._moves[first] = rows
            if args[1] is not None:
                return [r for r in rows if r[1] == args[1]]
            return rows
        if pred == "won":
            return [args] if self.game.winner(first) is not None else []
        if pred == "drawn":
            return [args] if self.game.drawn(first) else []
        raise ProgramError(f"unknown primitive {pred}")


def _match(pattern: tuple, answer: tuple, bindings: dict) -> dict | None:
    out = bindings
    for t, v in zip(pattern, answer):
        if is_var(t):
            bound = out.get(t)
            if bound is None:
                if out is bindings:
                    out = dict(bindings)
                out[t] = v
            elif bound != v:
                return None
        elif t != v:
            return None
    return out


class Prover:
    def __init__(self, program: Program, primitives: GamePrimitives,
                 depth_bound: int = DEFAULT_DEPTH, cache: dict | None = None):
        self.program = program
        self.primitives = primitives
        self.depth_bound = depth_bound
        self.cache = primitives.table if cache is None else cache
        self._info: dict[str, tuple | None] = {}

    def _definition(self, pred: str, visiting: frozenset = frozenset()):
        """(fingerprint, static call depth), or None for recursive definitions."""
        if pred in self._info:
            return self._info[pred]
        if pred in self.primitives.arity:
            return (("prim", pred), 1)
        if pred in visiting:
            return None
        clauses = self.program.clauses_for(pred)
        parts, depth = [], 1
        for c in clauses:
            body = []
            for lit in c.body:
                sub = self._definition(lit.pred, visiting | {pred})
                if sub is None:
                    self._info[pred] = None
                    return None
                body.append(sub[0])
                depth = max(depth, 1 + sub[1])
            parts.append((str(c), tuple(body)))
        info = ((pred, tuple(parts)), depth)
        self._info[pred] = info
        return info

    def answers(self, pred: str, args: tuple, depth: int | None = None) -> list[tuple]:
        """Ground argument tuples of ``pred`` compatible with ``args`` (None = unbound)."""
        if depth is None:
            depth = self.depth_bound
        if depth <= 0:
            return []
        if pred in self.primitives.arity:
            return self.primitives.call(pred, args)
        clauses = self.program.clauses_for(pred)
        if not clauses:
            raise ProgramError(f"unknown predicate {pred}/{len(args)}")
        if args[0] is None:
            return self._evaluate(clauses, args, depth)
        if len(args) == 2 and args[1] is not None:
            return [a for a in self.answers(pred, (args[0], None), depth) if a[1] == args[1]]
        info = self._definition(pred)
        if info is None or depth < info[1]:
            return self._evaluate(clauses, args, depth)
        key = (info[0], args)
        hit = self.cache.get(key)
        if hit is None:
            hit = self._evaluate(clauses, args, depth)
            self.cache[key] = hit
        return hit

    def _evaluate(self, clauses, args, depth) -> list[tuple]:
        out, seen = [], set()
        for clause in clauses:
            for b in self._solve_clause(clause, args, depth):
                ans = tuple(b.get(h) if is_var(h) else h for h in clause.head.args)
                if None in ans:
                    raise InstantiationError(f"unbound head variable in {clause}")
                if ans not in seen:
                    seen.add(ans)
                    out.append(ans)
        return out

    def _solve_clause(self, clause: Clause, args, depth) -> Iterator[dict]:
        b = {}
        for h, a in zip(clause.head.args, args):
            if a is None:
                continue
            if is_var(h):
                if b.setdefault(h, a) != a:
                    return
            elif h != a:
                return
        yield from self._solve_body(clause, 0, b, depth)

    def _solve_body(self, clause: Clause, i: int, b: dict, depth: int) -> Iterator[dict]:
        if i == len(clause.body):
            yield b
            return
        lit = clause.body[i]
        resolved = tuple(b.get(t) if is_var(t) else t for t in lit.args)
        if lit.negated:
            self._check_flounder(clause, i, resolved)
            for ans in self.answers(lit.pred, resolved, depth - 1):
                if _match(lit.args, ans, b) is not None:
                    return
            yield from self._solve_body(clause, i + 1, b, depth)
            return
        for ans in self.answers(lit.pred, resolved, depth - 1):
            nb = _match(lit.args, ans, b)
            if nb is not None:
                yield from self._solve_body(clause, i + 1, nb, depth)

    @staticmethod
    def _check_flounder(clause: Clause, i: int, resolved: tuple) -> None:
        lit = clause.body[i]
        if resolved[0] is None:
            raise FlounderError(f"negated call {lit} with unbound first argument in {clause}")
        others = [clause.head] + [l for j, l in enumerate(clause.body) if j != i]
        shared = set().union(*(l.variables() for l in others))
        for t, r in zip(lit.args, resolved):
            if r is None and t in shared:
                raise FlounderError(f"negated call {lit} shares unbound {t} in {clause}")

    def prove(self, goal: Literal) -> bool:
        return bool(self.solutions(goal.positive())) != goal.negated

    def solutions(self, goal: Literal) -> list[dict]:
        """Bindings for the goal's variables, in proof order."""
        resolved = tuple(None if is_var(t) else t for t in goal.args)
        out = []
        for ans in self.answers(goal.pred, resolved):
            b = _match(goal.args, ans, {})
            if b is not None:
                out.append(b)
        return out

    def holds(self, pred: str, *args) -> bool:
        return bool(self.answers(pred, tuple(args)))


def prove(goal: Literal, program: Program, primitives: GamePrimitives,
          depth_bound: int = DEFAULT_DEPTH) -> bool:
    return Prover(program, primitives, depth_bound).prove(goal)
