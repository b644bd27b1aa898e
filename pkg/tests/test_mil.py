import itertools

import pytest
from hypothesis import given, settings, strategies as st

from migo.game import GameState, Mark
from migo.mil.induction import add_to_background, family, is_invented, learn, signature
from migo.mil.logic import (
    METARULES, NEGATION, POSTCOND, PRIMITIVE_ARITY, Clause, Literal, MetaSub, Program, ProgramError,
)
from migo.mil.prover import FlounderError, GamePrimitives, InstantiationError, Prover, prove
from migo.mil.syntax import RuleSyntaxError, load_rules, parse_rules, read_header, render_rules

from derived import FIXTURES, golden

WIN_1 = "win_1(A,B) :- win_1_1_1(A,B), won(B).\nwin_1_1_1(A,B) :- move(A,B), won(B).\n"


@pytest.fixture(scope="module")
def ox_prim(ox):
    return GamePrimitives(ox)


@pytest.fixture(scope="module")
def gold():
    return golden("ox")


# -- clauses and programs ----------------------------------------------------

def test_clause_limits():
    a, b = Literal("p", ("A", "B")), Literal("move", ("A", "B"))
    with pytest.raises(ProgramError):
        Clause(a, (b, b, b))
    with pytest.raises(ProgramError):
        Clause(Literal("p", ("A", "B"), negated=True), (b,))
    with pytest.raises(ProgramError):
        Literal("p", ("A", "B", "C"))
    # C only occurs under negation, so the head is unsafe
    with pytest.raises(ProgramError):
        Clause(Literal("p", ("A", "C")), (b, Literal("q", ("B", "C"), negated=True)))


def test_program_rejects_arity_clash_and_primitive_heads():
    with pytest.raises(ProgramError):
        Program((POSTCOND.instantiate("p", "move", "won"), POSTCOND.instantiate("q", "move", "p")))
    with pytest.raises(ProgramError):
        Program((POSTCOND.instantiate("move", "move", "won"),))


def test_program_dedups_and_restricts(gold):
    c = POSTCOND.instantiate("p", "move", "won")
    assert len(Program((c, c))) == 1
    sub = gold.restrict(["win_2"])
    assert set(sub.defined) == {"win_1", "win_1_1_1", "win_2", "win_2_1_1"}
    assert gold.undefined() == []


def test_metasub_projects_to_clause():
    sub = MetaSub(NEGATION, "win_2", "win_2_1_1", "win_2_1_1")
    assert str(sub.clause()) == "win_2(A,B) :- win_2_1_1(A,B), not(win_2_1_1(B,C))."
    assert str(MetaSub(POSTCOND, "p", "move", "won").clause()) == "p(A,B) :- move(A,B), won(B)."


# -- rule files ----------------------------------------------------------------

def test_parse_empty():
    assert len(parse_rules("")) == 0
    assert len(parse_rules("rules v1 game=ox\n\n% nothing\n")) == 0


def test_render_golden_win_1(gold):
    assert render_rules(gold.restrict(["win_1"])) == WIN_1


def test_golden_round_trip(gold):
    assert parse_rules(render_rules(gold)) == gold
    first_ten = Program(gold.clauses[:10])
    assert len(first_ten) == 10
    assert parse_rules(render_rules(first_ten)) == first_ten
    assert render_rules(parse_rules(render_rules(first_ten))) == render_rules(first_ten)


def test_header():
    assert read_header((FIXTURES / "golden_ox.rules").read_text()) == "ox"
    assert read_header(WIN_1) is None
    with pytest.raises(RuleSyntaxError):
        parse_rules(WIN_1 + "rules v1 game=ox\n")


@pytest.mark.parametrize("text, line, col", [
    ("win_1(A,B) :- move(A,D).", 1, 22),
    ("p(A,B) :- move(A,B)\n", 1, 20),
    ("p(A,B) :- move(A,B).\nq(A,B) :- move(A,B), won(B), won(A).", 2, 1),
    ("p(A,B) :- move(A,B).\n\nq(A,B) :- Move(A,B).", 3, 11),
    ("p(A,B) :- move(A,B). x", 1, 22),
    ("p(A,B) :- won(C), move(A,B).", 1, 1),
])
def test_syntax_errors_carry_position(text, line, col):
    with pytest.raises(RuleSyntaxError) as info:
        parse_rules(text)
    assert (info.value.line, info.value.col) == (line, col)
    assert f"line {line}, column {col}" in str(info.value)


def test_arity_violation_across_clauses():
    with pytest.raises(ProgramError):
        parse_rules("p(A,B) :- move(A,B), won(B).\nq(A,B) :- move(A,B), p(B).")


def test_load_rejects_undefined(tmp_path):
    path = tmp_path / "r.rules"
    path.write_text("p(A,B) :- q(A,B), won(B).\n")
    with pytest.raises(ProgramError):
        load_rules(path)
    assert len(load_rules(path, closed=False)) == 1


def test_render_rejects_ground_literals(ox):
    s = ox.start_state()
    clause = Clause(Literal("p", ("A", "B")), (Literal("move", ("A", "B")), Literal("won", (s,))))
    with pytest.raises(ProgramError):
        render_rules(Program((clause,)))


NAMES = st.sampled_from(["p", "q", "r", "win_1", "draw_2_1_3", "t0"])


@st.composite
def programs(draw):
    clauses = []
    for _ in range(draw(st.integers(0, 6))):
        mr = draw(st.sampled_from(METARULES))
        p, q = draw(NAMES), draw(st.sampled_from(["move", "p", "q", "win_1"]))
        r = draw(st.sampled_from(["won", "drawn"])) if mr is POSTCOND else draw(st.sampled_from(["move", "q", "r", "win_1"]))
        clauses.append(mr.instantiate(p, q, r))
    try:
        return Program(tuple(clauses))
    except ProgramError:
        return Program()


@given(programs())
def test_round_trip_property(program):
    assert parse_rules(render_rules(program)) == program


@given(programs(), st.sampled_from([" ", "  ", "\t"]))
def test_parse_is_whitespace_tolerant(program, ws):
    text = render_rules(program).replace(" ", ws).replace(",", "," + ws)
    assert parse_rules(text) == program


# -- proving -------------------------------------------------------------------

def test_win_1_binds_winning_placement(gold, ox_prim):
    a = GameState.parse("xx./oo./... x")
    prover = Prover(gold, ox_prim)
    assert prover.answers("win_1", (a, None)) == [(a, GameState.parse("xxx/oo./... o"))]
    sols = prover.solutions(Literal("win_1", (a, "B")))
    assert sols == [{"B": GameState.parse("xxx/oo./... o")}]


def test_won_fails_on_empty_board(gold, ox, ox_prim):
    assert not prove(Literal("won", (ox.start_state(),)), gold, ox_prim)


def test_win_2_finds_double_attack_for_o(gold, ox_states, ox_oracle, ox_prim):
    """An O-to-move position where the golden rules choose a fork."""
    prover = Prover(gold, ox_prim)
    a = next(s for s in ox_states if s.to_move is Mark.O and not prover.holds("win_1", s, None)
             and prover.holds("win_2", s, None))
    (_, b), = prover.answers("win_2", (a, None))[:1]
    entry = ox_oracle.entry(b)
    assert entry.value == -1 and entry.distance == 2
    for reply in ox_prim.game.successors(b):
        assert prover.holds("win_1", reply, None)


def test_negation_as_failure_inside_clause(ox, ox_states, ox_prim, gold):
    clause = NEGATION.instantiate("safe", "move", "win_1")
    program = gold.restrict(["win_1"]).extend([clause])
    prover = Prover(program, ox_prim)
    for a in ox_states[:400]:
        got = {b for _, b in prover.answers("safe", (a, None))}
        want = {b for b in ox.successors(a) if not prover.answers("win_1", (b, None))}
        assert got == want


@given(st.integers(0, 5477), st.sampled_from(["win_1", "win_2", "draw_1", "win_2_1_1"]))
def test_naf_consistency(ox_states, gold, ox_prim, i, pred):
    b = ox_states[i]
    prover = Prover(gold, ox_prim)
    pos = prover.prove(Literal(pred, (b, "C")))
    neg = prover.prove(Literal(pred, (b, "C"), negated=True))
    assert pos != neg


def test_floundering_is_an_error(ox, ox_prim):
    bad = Clause(Literal("p", ("A", "B")), (Literal("move", ("A", "B")), Literal("move", ("C", "B"), negated=True)))
    with pytest.raises(FlounderError):
        check = Prover(Program((bad,)), ox_prim)
        check.answers("p", (ox.start_state(), None))
    with pytest.raises(ProgramError):
        bad.check_modes()


def test_primitive_needs_bound_input(ox_prim):
    with pytest.raises(InstantiationError):
        ox_prim.call("move", (None, None))


def test_depth_exhaustion_fails_quietly(gold, ox_prim):
    a = GameState.parse("xx./oo./... x")
    assert Prover(gold, ox_prim, depth_bound=2).answers("win_1", (a, None)) == []
    assert Prover(gold, ox_prim, depth_bound=3).answers("win_1", (a, None))


def test_unknown_predicate(gold, ox, ox_prim):
    with pytest.raises(ProgramError):
        Prover(gold, ox_prim).answers("nope", (ox.start_state(), None))


def test_proving_is_pure_and_cache_transparent(gold, ox, ox_states):
    before = render_rules(gold)
    shared = GamePrimitives(ox)
    for s in ox_states[::37]:
        for pred in ("win_2", "draw_2", "win_3"):
            fresh = Prover(gold, GamePrimitives(ox), cache={}).answers(pred, (s, None))
            assert Prover(gold, shared).answers(pred, (s, None)) == fresh
            assert Prover(gold, shared).answers(pred, (s, None)) == fresh
    assert render_rules(gold) == before


def test_hexapawn_rules_run_on_noughts_and_crosses(ox_states, ox_prim):
    rules = golden("hexapawn3")
    prover = Prover(rules, ox_prim)
    for pred in rules.defined:
        for s in ox_states[::50]:
            prover.answers(pred, (s, None))


# -- induction -----------------------------------------------------------------

def win_move(ox_states, ox):
    return next((s, t) for s in ox_states if s.to_move is Mark.X for t in ox.successors(s) if ox.won(t, Mark.X))


def test_learn_one_shot_win(ox, ox_states, ox_prim):
    ex = win_move(ox_states, ox)
    prog = learn([ex], "win_1_1_1", Program(), ox_prim, max_clauses=1, invent=False)
    assert render_rules(prog) == "win_1_1_1(A,B) :- move(A,B), won(B).\n"


def test_learn_win_2_with_negation(gold, ox_states, ox, ox_prim):
    bk = gold.restrict(["win_1", "win_2_1_1"])
    prover = Prover(gold, ox_prim)
    ex = next((a, b) for a in ox_states if a.to_move is Mark.X and not prover.holds("win_1", a, None)
              for _, b in prover.answers("win_2", (a, None)))
    prog = learn([ex], "win_2", bk, ox_prim)
    assert render_rules(prog) == "win_2(A,B) :- win_2_1_1(A,B), not(win_2_1_1(B,C)).\n"


def test_learn_fails_within_bound(ox, ox_prim):
    s = ox.start_state()
    ex = (s, ox.successors(s)[0])
    assert learn([ex], "t", Program(), ox_prim, max_clauses=1) is None


def test_learn_input_errors(gold, ox, ox_prim):
    with pytest.raises(ValueError):
        learn([], "t", Program(), ox_prim)
    s = ox.start_state()
    with pytest.raises(ProgramError):
        learn([(s, ox.successors(s)[0])], "win_1", gold, ox_prim)


def test_add_to_background(gold, ox, ox_states, ox_prim):
    win_1 = gold.restrict(["win_1"])
    assert add_to_background(win_1, Program()) == win_1
    with pytest.raises(ProgramError):
        add_to_background(win_1, win_1)
    bk = add_to_background(Program(), win_1)
    a, b = win_move(ox_states, ox)
    assert Prover(bk, ox_prim).holds("win_1", a, b)
    bk = add_to_background(bk, Program(gold.clauses_for("win_2_1_1")))
    bk = add_to_background(bk, Program(gold.clauses_for("win_2")))
    calls = {c.head.pred: c.body_preds() for c in bk}
    assert calls == {
        "win_1": ["win_1_1_1", "won"], "win_1_1_1": ["move", "won"],
        "win_2_1_1": ["move", "win_1"], "win_2": ["win_2_1_1", "win_2_1_1"],
    }


def test_signature_order(gold):
    bk = gold.restrict(["win_2", "draw_1"])
    sig = signature(bk, 2, "draw_2")
    assert sig[0] in ("draw_1", "draw_1_1_3")
    assert all(family(p) == "draw" for p in sig[:2])
    assert "win_2_1_1" not in sig and "win_1_1_1" not in sig
    assert sig[-1] == "move"
    assert sig.index("win_1") < sig.index("win_2")
    assert signature(Program(), 1, "win_1") == ["won", "drawn"]
    assert is_invented("win_2_1_1") and not is_invented("win_2")


def exhaustive_one_clause(examples, task, bk, prim):
    """Every single clause over the vocabulary that covers all examples."""
    preds = list(bk.defined) + list(PRIMITIVE_ARITY)
    out = []
    for mr in METARULES:
        rs = [p for p in preds if (bk.arity_of(p) or 0) == mr.r_arity]
        qs = [p for p in preds if (bk.arity_of(p) or 0) == 2]
        for q, r in itertools.product(qs, rs):
            prover = Prover(bk.extend([mr.instantiate(task, q, r)]), prim)
            if all(prover.holds(task, a, b) for a, b in examples):
                out.append((q, r))
    return out


@settings(max_examples=25)
@given(st.lists(st.integers(0, 10_000), min_size=1, max_size=3))
def test_learn_is_sound_and_minimal(gold, ox, ox_states, ox_prim, picks):
    win_moves = [(s, t) for s in ox_states[:2000] if s.to_move is Mark.X and not ox.is_terminal(s)
                 for t in ox.successors(s)]
    examples = [win_moves[i % len(win_moves)] for i in picks]
    bk = gold.restrict(["win_1"])
    prog = learn(examples, "task", bk, ox_prim)
    one = exhaustive_one_clause(examples, "task", bk, ox_prim)
    if prog is None:
        assert one == []
        return
    prover = Prover(bk.extend(prog.clauses), ox_prim)
    assert all(prover.holds("task", a, b) for a, b in examples)
    assert (len(prog) == 1) == bool(one)
    for c in prog:
        assert c.head.pred == "task" or is_invented(c.head.pred)
