"""Metarule-driven induction of H22 programs from positive examples.

The search is iterative deepening on the number of clauses.  Examples are
proved in order; each one is first tried deductively against the clauses
already in the hypothesis, and only then by adding a clause built from a
metarule.  Candidate predicates for the ``Q`` and ``R`` slots are ordered by
:func:`signature`.
"""

from __future__ import annotations

import re
from typing import Iterable, Iterator, Sequence

from .logic import METARULES, PRIMITIVE_ARITY, Clause, Metarule, Program, ProgramError
from .prover import DEFAULT_DEPTH, GamePrimitives, Prover

Example = tuple  # (from_state, to_state)


def _pairs(examples) -> list[Example]:
    out = []
    for e in examples:
        if hasattr(e, "pair"):
            e = e.pair
        out.append(tuple(e))
    return out


INVENTED_RE = re.compile(r"^[a-z][a-z0-9]*_\d+_\d+_\d+$")


def family(pred: str) -> str:
    """Task family of a predicate name: ``win_2_1_1`` and ``win_3`` are both ``win``."""
    return pred.split("_", 1)[0]


def is_invented(pred: str) -> bool:
    return bool(INVENTED_RE.match(pred))


def signature(background: Program, arity: int, task: str) -> list[str]:
    """Predicates usable in a body slot of the given arity, in search order.

    Same-family predicates come first, newest first, so each stage builds on
    the one before.  Other families contribute only their task predicates,
    oldest first; their invented helpers stay private.  Primitives go last.
    """
    fam = family(task)
    defined = [p for p in background.defined if background.arity_of(p) == arity]
    same = [p for p in reversed(defined) if family(p) == fam]
    other = [p for p in defined if family(p) != fam and not is_invented(p)]
    prims = [p for p, a in PRIMITIVE_ARITY.items() if a == arity]
    return same + other + prims


class _Search:
    def __init__(self, task, background, primitives, metarules, invent, depth_bound, namer):
        self.task = task
        self.background = background
        self.primitives = primitives
        self.metarules = tuple(metarules)
        self.invent = invent
        self.depth_bound = depth_bound
        self.namer = namer
        self.q_preds = signature(background, 2, task)
        self.r_preds = {1: signature(background, 1, task), 2: signature(background, 2, task)}
        self._bk_prover = Prover(background, primitives, depth_bound)
        self.dead: set = set()

    def prover(self, hyp: tuple[Clause, ...]) -> Prover:
        if not hyp:
            return self._bk_prover
        return Prover(self.background.extend(hyp), self.primitives, self.depth_bound)

    def holds(self, hyp, pred, a, b) -> bool:
        return self.prover(hyp).holds(pred, a, b)

    def prove(self, pred: str, a, b, hyp: tuple, budget: int, index: int) -> Iterator[tuple]:
        """Hypotheses (extensions of ``hyp``) under which ``pred(a, b)`` holds."""
        defined_here = {c.head.pred for c in hyp}
        if pred in defined_here and self.holds(hyp, pred, a, b):
            yield hyp
        # grow invented predicates already called by clauses of pred
        for c in hyp:
            q = c.body[0].pred
            if c.head.pred == pred and q in defined_here and q != pred:
                for h2 in self.prove(q, a, b, hyp, budget, index):
                    if h2 != hyp and self.holds(h2, pred, a, b):
                        yield h2
        if len(hyp) >= budget:
            return
        for mr in self.metarules:
            for q in self.q_preds:
                for r in self.r_preds[mr.r_arity]:
                    clause = mr.instantiate(pred, q, r)
                    if clause in hyp:
                        continue
                    h2 = hyp + (clause,)
                    if self.holds(h2, pred, a, b):
                        yield h2
            if self.invent and len(hyp) + 2 <= budget:
                name = self.namer(index, defined_here | set(self.background.defined))
                for r in self.r_preds[mr.r_arity]:
                    clause = mr.instantiate(pred, name, r)
                    for h2 in self.prove(name, a, b, hyp + (clause,), budget, index):
                        if self.holds(h2, pred, a, b):
                            yield h2

    def prove_all(self, examples, i, hyp, budget) -> Iterator[tuple]:
        if i == len(examples):
            yield hyp
            return
        key = (frozenset(hyp), i, budget)
        if key in self.dead:
            return
        self.dead.add(key)
        a, b = examples[i]
        for h2 in self.prove(self.task, a, b, hyp, budget, i + 1):
            yield from self.prove_all(examples, i + 1, h2, budget)


def learn(examples: Iterable, task: str, background: Program, primitives: GamePrimitives,
          metarules: Sequence[Metarule] = METARULES, max_clauses: int = 2, *,
          invent: bool = True, depth_bound: int = DEFAULT_DEPTH, namer=None) -> Program | None:
    """Smallest program (in clauses) defining ``task`` that proves every example.

    Returns only the new clauses, or None when no program within
    ``max_clauses`` exists.  Invented predicates are named by
    ``namer(example_index, taken_names)``.
    """
    examples = _pairs(examples)
    if not examples:
        raise ValueError("learn needs at least one example")
    if task in background.defined or task in PRIMITIVE_ARITY:
        raise ProgramError(f"task {task} is already defined")
    if namer is None:
        namer = default_namer(task)
    search = _Search(task, background, primitives, metarules, invent, depth_bound, namer)
    for budget in range(1, max_clauses + 1):
        for hyp in search.prove_all(examples, 0, (), budget):
            return Program(hyp)
    return None


def default_namer(task: str):
    """Names ``<task>_<example-index>_<counter>`` not already taken."""
    def namer(index: int, taken: set) -> str:
        counter = 1
        while f"{task}_{index}_{counter}" in taken:
            counter += 1
        return f"{task}_{index}_{counter}"
    return namer


def add_to_background(background: Program, learned: Program) -> Program:
    clash = set(background.defined) & set(learned.defined)
    if clash:
        raise ProgramError(f"predicates already in background: {sorted(clash)}")
    return background.extend(learned.clauses)
