"""Datalog-with-negation terms restricted to the H22 language.

Variables are the strings ``"A"``, ``"B"`` and ``"C"``; anything else in an
argument position is a ground constant (a game state).  Predicates have
arity one or two and clause bodies have at most two literals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

VARIABLES = ("A", "B", "C")

PRIMITIVE_ARITY = {"move": 2, "won": 1, "drawn": 1}


class ProgramError(ValueError):
    """A clause or program outside the supported language."""


def is_var(term: Any) -> bool:
    return isinstance(term, str) and term in VARIABLES


@dataclass(frozen=True)
class Literal:
    pred: str
    args: tuple
    negated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not 1 <= len(self.args) <= 2:
            raise ProgramError(f"{self.pred}: arity must be 1 or 2, got {len(self.args)}")

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> set[str]:
        return {a for a in self.args if is_var(a)}

    def positive(self) -> "Literal":
        return Literal(self.pred, self.args)

    def __str__(self) -> str:
        inner = f"{self.pred}({','.join(map(str, self.args))})"
        return f"not({inner})" if self.negated else inner


@dataclass(frozen=True)
class Clause:
    head: Literal
    body: tuple[Literal, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        if self.head.negated:
            raise ProgramError(f"negated head in {self}")
        if len(self.body) > 2:
            raise ProgramError(f"more than two body literals in {self}")
        positive_vars = set().union(*(l.variables() for l in self.body if not l.negated))
        unsafe = self.head.variables() - positive_vars
        if unsafe:
            raise ProgramError(f"unsafe head variable(s) {sorted(unsafe)} in {self}")

    def check_modes(self) -> None:
        """Reject clauses that cannot be run left to right from a bound ``A``.

        Every body literal needs its first argument bound by the head's first
        argument or an earlier positive literal, and variables left unbound
        inside a negation may not occur anywhere else in the clause.
        """
        bound = {self.head.args[0]} if is_var(self.head.args[0]) else set()
        for i, lit in enumerate(self.body):
            first = lit.args[0]
            if is_var(first) and first not in bound:
                raise ProgramError(f"{lit} is called with {first} unbound in {self}")
            if lit.negated:
                local = lit.variables() - bound
                elsewhere = set().union(self.head.variables(),
                                        *(l.variables() for j, l in enumerate(self.body) if j != i))
                if local & elsewhere:
                    raise ProgramError(f"{lit} shares unbound {sorted(local & elsewhere)} in {self}")
            else:
                bound |= lit.variables()

    def body_preds(self) -> list[str]:
        return [l.pred for l in self.body]

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class Program:
    """Ordered, duplicate-free clause list."""

    clauses: tuple[Clause, ...] = ()
    _by_pred: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        seen, unique = set(), []
        for c in self.clauses:
            if c not in seen:
                seen.add(c)
                unique.append(c)
        object.__setattr__(self, "clauses", tuple(unique))
        by_pred: dict[str, list[Clause]] = {}
        arity: dict[str, int] = dict(PRIMITIVE_ARITY)
        for c in self.clauses:
            if c.head.pred in PRIMITIVE_ARITY:
                raise ProgramError(f"cannot redefine primitive {c.head.pred}")
            by_pred.setdefault(c.head.pred, []).append(c)
            for lit in (c.head, *c.body):
                if arity.setdefault(lit.pred, lit.arity) != lit.arity:
                    raise ProgramError(f"{lit.pred} used with arity {lit.arity} and {arity[lit.pred]}")
        object.__setattr__(self, "_by_pred", {k: tuple(v) for k, v in by_pred.items()})

    @property
    def defined(self) -> tuple[str, ...]:
        """Defined predicate names in order of first definition."""
        return tuple(self._by_pred)

    def clauses_for(self, pred: str) -> tuple[Clause, ...]:
        return self._by_pred.get(pred, ())

    def arity_of(self, pred: str) -> int | None:
        if pred in PRIMITIVE_ARITY:
            return PRIMITIVE_ARITY[pred]
        cs = self._by_pred.get(pred)
        return cs[0].head.arity if cs else None

    def undefined(self) -> list[str]:
        """Body predicates that are neither primitives nor defined here."""
        called = {p for c in self.clauses for p in c.body_preds()}
        return sorted(called - set(self._by_pred) - set(PRIMITIVE_ARITY))

    def extend(self, clauses: Iterable[Clause]) -> "Program":
        return Program(self.clauses + tuple(clauses))

    def restrict(self, preds: Iterable[str]) -> "Program":
        """Sub-program defining ``preds`` and everything they call."""
        keep, todo = set(), list(preds)
        while todo:
            p = todo.pop()
            if p in keep or p not in self._by_pred:
                continue
            keep.add(p)
            for c in self._by_pred[p]:
                todo.extend(c.body_preds())
        return Program(tuple(c for c in self.clauses if c.head.pred in keep))

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)

    def __str__(self) -> str:
        return "\n".join(map(str, self.clauses))


@dataclass(frozen=True)
class Metarule:
    """Second-order template ``P(A,B) <- Q(A,B), [not] R(B[,C])``."""

    name: str
    r_arity: int
    negated: bool

    def instantiate(self, p: str, q: str, r: str) -> Clause:
        r_args = ("B", "C") if self.r_arity == 2 else ("B",)
        return Clause(
            Literal(p, ("A", "B")),
            (Literal(q, ("A", "B")), Literal(r, r_args, self.negated)),
        )


POSTCOND = Metarule("postcond", r_arity=1, negated=False)
NEGATION = Metarule("negation", r_arity=2, negated=True)
METARULES = (POSTCOND, NEGATION)


@dataclass(frozen=True)
class MetaSub:
    metarule: Metarule
    p: str
    q: str
    r: str

    def clause(self) -> Clause:
        return self.metarule.instantiate(self.p, self.q, self.r)

    def __str__(self) -> str:
        return f"{self.metarule.name}(P={self.p}, Q={self.q}, R={self.r})"
