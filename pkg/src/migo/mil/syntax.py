"""Reading and writing rule files.

One clause per line, rendered exactly as ``head :- lit, lit.``; parsing is
whitespace-tolerant.  Files may start with a ``rules v1 game=<id>`` header.
"""

from __future__ import annotations

import re
from pathlib import Path

from .logic import Clause, Literal, Program, ProgramError, is_var

HEADER_RE = re.compile(r"^rules\s+v1(?:\s+game=(\S+))?\s*$")
TOKEN_RE = re.compile(r"\s*(:-|[a-z][a-z0-9_]*|[A-Z][A-Za-z0-9_]*|[(),.]|\S)")


class RuleSyntaxError(ProgramError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


class _Parser:
    def __init__(self, text: str, lineno: int):
        self.lineno = lineno
        self.toks = []
        pos = 0
        while pos < len(text):
            m = TOKEN_RE.match(text, pos)
            if m is None:
                break
            if m.group(1):
                self.toks.append((m.group(1), m.start(1) + 1))
            pos = m.end()
        self.i = 0

    def error(self, msg):
        if self.i < len(self.toks):
            col = self.toks[self.i][1]
        elif self.toks:
            tok, start = self.toks[-1]
            col = start + len(tok)
        else:
            col = 1
        raise RuleSyntaxError(msg, self.lineno, col)

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def expect(self, tok):
        if self.peek() != tok:
            self.error(f"expected {tok!r}, found {self.peek()!r}")
        self.i += 1

    def ident(self):
        tok = self.peek()
        if tok is None or not re.fullmatch(r"[a-z][a-z0-9_]*", tok):
            self.error(f"expected predicate name, found {tok!r}")
        self.i += 1
        return tok

    def atom(self, negated=False):
        pred = self.ident()
        self.expect("(")
        args = [self.var()]
        if self.peek() == ",":
            self.i += 1
            args.append(self.var())
        self.expect(")")
        return Literal(pred, tuple(args), negated)

    def var(self):
        tok = self.peek()
        if not is_var(tok):
            self.error(f"expected variable A, B or C, found {tok!r}")
        self.i += 1
        return tok

    def literal(self):
        if self.peek() == "not" and self.i + 1 < len(self.toks) and self.toks[self.i + 1][0] == "(":
            self.i += 2
            lit = self.atom(negated=True)
            self.expect(")")
            return lit
        return self.atom()

    def clause(self):
        head = self.atom()
        body = []
        if self.peek() == ":-":
            self.i += 1
            body.append(self.literal())
            while self.peek() == ",":
                self.i += 1
                body.append(self.literal())
        self.expect(".")
        if self.peek() is not None:
            self.error("trailing input after clause")
        try:
            clause = Clause(head, tuple(body))
            clause.check_modes()
            return clause
        except ProgramError as exc:
            raise RuleSyntaxError(str(exc), self.lineno, 1) from None


def parse_rules(text: str) -> Program:
    clauses = []
    for n, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        if HEADER_RE.match(stripped):
            if clauses:
                raise RuleSyntaxError("header after clauses", n, 1)
            continue
        clauses.append(_Parser(line, n).clause())
    try:
        return Program(tuple(clauses))
    except RuleSyntaxError:
        raise
    except ProgramError as exc:
        raise RuleSyntaxError(str(exc), 0, 0) from None


def render_rules(program: Program) -> str:
    for c in program:
        for lit in (c.head, *c.body):
            if not all(is_var(a) for a in lit.args):
                raise ProgramError(f"cannot render ground literal {lit}")
    return "".join(f"{c}\n" for c in program)


def read_header(text: str) -> str | None:
    """Game id from a ``rules v1 game=<id>`` header, if present."""
    for line in text.splitlines():
        if line.strip():
            m = HEADER_RE.match(line.strip())
            return m.group(1) if m else None
    return None


def save_rules(path: str | Path, program: Program, game_id: str) -> None:
    Path(path).write_text(f"rules v1 game={game_id}\n" + render_rules(program))


def load_rules(path: str | Path, closed: bool = True) -> Program:
    """Parse a rule file; with ``closed`` every called predicate must be defined."""
    program = parse_rules(Path(path).read_text())
    if closed and program.undefined():
        raise ProgramError(f"{path}: undefined predicates {program.undefined()}")
    return program
