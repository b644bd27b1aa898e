import random

import pytest
from hypothesis import given, settings, strategies as st

from migo.game import GameError, GameState, Mark
from migo.learner import (
    DRAW, WIN, ExampleStore, LearnerMode, MigoContext, MigoLearner, MoveExample, Strategy,
    label_episode, migo_learn, select_move, transfer_in,
)
from migo.mil.prover import GamePrimitives, Prover

from derived import FIXTURES, golden


@pytest.fixture(scope="module")
def prim(ox):
    return GamePrimitives(ox)


def play(game, oracle, initial, choose):
    trace = [initial]
    s = initial
    while not game.is_terminal(s):
        s = choose(s) if s.to_move is Mark.X else oracle.best_reply(s)
        trace.append(s)
    return trace, game.outcome(s)


def test_won_game_labels(ox, prim):
    # X forks on row 2 and column 0, O blocks the row, X completes the column
    trace = [GameState.parse("x.o/.o./x.. x"), GameState.parse("x.o/.o./xx. o"),
             GameState.parse("x.o/.o./xxo x"), GameState.parse("x.o/xo./xxo o")]
    labels = label_episode(trace, 1, Strategy(), prim)
    assert [(e.task, e.depth) for e in labels] == [(WIN, 2), (WIN, 1)]
    assert labels[0].pair == (trace[0], trace[1])
    assert labels[1].pair == (trace[2], trace[3])


def test_lost_game_has_no_labels(ox, prim):
    trace = [GameState.parse("x../oo./x.. x"), GameState.parse("x.x/oo./x.. o"),
             GameState.parse("x.x/ooo/x.. x")]
    assert label_episode(trace, -1, Strategy(), prim) == []


def test_drawn_game_labels_every_move(ox, ox_oracle, prim):
    drawn = next(b for b in ox.initial_board_set() if ox_oracle.expected_outcome(b) == 0)
    trace, outcome = play(ox, ox_oracle, drawn, lambda s: next(
        t for t in ox.successors(s) if ox_oracle.expected_outcome(t) == 0))
    assert outcome == 0
    labels = label_episode(trace, 0, Strategy(), prim)
    n = len(trace) - 1
    assert len(labels) == n
    assert {e.task for e in labels} == {DRAW}
    assert [e.depth for e in labels] == [-(-(n - i) // 2) for i in range(n)]
    assert {e.from_state.to_move for e in labels} == {Mark.X, Mark.O}


def test_drawn_game_with_firing_win_rule_has_no_labels(ox, prim):
    s = GameState.parse("xx./oo./... x")
    trace = [s, GameState.parse("xx./oo./x.. o")]
    win = Strategy.from_program(golden("ox")).win_program
    assert label_episode(trace, 0, win, prim) == []


def test_malformed_traces(ox, prim):
    s = ox.start_state()
    with pytest.raises(GameError):
        label_episode([s], 0, Strategy(), prim)
    with pytest.raises(GameError):
        label_episode([s, ox.successors(s)[0], ox.successors(s)[1]], 0, Strategy(), prim)
    o_first = ox.successors(s)[0]
    with pytest.raises(GameError):
        label_episode([o_first, ox.successors(o_first)[0]], 0, Strategy(), prim)


@settings(max_examples=60)
@given(st.sampled_from(["ox", "hexapawn3"]), st.integers(0, 11), st.integers(0, 2**32))
def test_credit_assignment_soundness(game_id, board, seed):
    """Win labels always keep the win; draw labels from drawn boards keep the draw."""
    from migo.game import get_game
    from migo.oracle import get_oracle
    game, oracle = get_game(game_id), get_oracle(game_id)
    boards = game.initial_board_set()
    initial = boards[board % len(boards)]
    rng = random.Random(seed)
    trace, outcome = play(game, oracle, initial, lambda s: rng.choice(game.successors(s)))
    for e in label_episode(trace, outcome, Strategy(), GamePrimitives(game)):
        if e.task == WIN:
            assert oracle.expected_outcome(e.from_state) == 1
            assert oracle.expected_outcome(e.to_state) == 1
        elif oracle.expected_outcome(initial) == 0:
            assert oracle.expected_outcome(e.from_state) == 0
            assert oracle.expected_outcome(e.to_state) == 0


def test_store_dedups_symmetric_examples(ox):
    store = ExampleStore(ox)
    a = GameState.parse("xx./oo./... x")
    b = GameState.parse("xxx/oo./... o")
    mirror = ox.symmetries[4]
    assert store.add(MoveExample(a, b, WIN, 1))
    assert not store.add(MoveExample(ox.transform(a, mirror), ox.transform(b, mirror), WIN, 1))
    assert len(store) == 1
    assert store.depths(WIN) == [1] and store.depths(DRAW) == []


def test_learn_golden_win_1_from_one_example(ox, prim):
    store = ExampleStore(ox)
    store.add(MoveExample(GameState.parse("xx./oo./... x"), GameState.parse("xxx/oo./... o"), WIN, 1))
    strategy = migo_learn(store, MigoContext(prim))
    assert strategy.win_depths == (1,) and strategy.draw_depths == ()
    assert set(strategy.program) == set(golden("ox").restrict(["win_1"]))


def test_empty_store_and_draws_only(ox, ox_oracle, prim):
    assert not migo_learn(ExampleStore(ox), MigoContext(prim))
    store = ExampleStore(ox)
    drawn = next(b for b in ox.initial_board_set() if ox_oracle.expected_outcome(b) == 0)
    trace, _ = play(ox, ox_oracle, drawn, lambda s: next(
        t for t in ox.successors(s) if ox_oracle.expected_outcome(t) == 0))
    for e in label_episode(trace, 0, Strategy(), prim):
        store.add(e, trace[0])
    # draw tasks wait for a win task
    assert not migo_learn(store, MigoContext(prim))


def test_select_move(ox, prim):
    win_1 = Strategy.from_program(golden("ox").restrict(["win_1"]))
    s = GameState.parse("xx./oo./... x")
    assert select_move(s, win_1, random.Random(0), prim) == GameState.parse("xxx/oo./... o")
    start = ox.start_state()
    picks = {select_move(start, Strategy(), random.Random(i), prim) for i in range(200)}
    assert picks == set(ox.successors(start))
    rng_a, rng_b = random.Random(3), random.Random(3)
    assert select_move(start, Strategy(), rng_a, prim) == ox.successors(start)[rng_b.randrange(9)]
    with pytest.raises(ValueError):
        select_move(GameState.parse("xxx/oo./... o"), Strategy(), random.Random(0), prim)


def test_select_move_double_attack_for_o(ox, ox_states, ox_oracle, prim):
    strategy = Strategy.from_program(golden("ox").restrict(["win_1", "win_2"]))
    prover = Prover(strategy.program, prim)
    a = next(s for s in ox_states if s.to_move is Mark.O and not prover.holds("win_1", s, None)
             and prover.holds("win_2", s, None))
    b = select_move(a, strategy, random.Random(0), prim)
    assert ox_oracle.entry(b).value == -1
    assert all(prover.holds("win_1", t, None) for t in ox.successors(b))


def test_transfer_in(tmp_path, ox, prim):
    empty = tmp_path / "empty.rules"
    empty.write_text("rules v1 game=hexapawn3\n")
    assert not transfer_in(empty)
    seeded = transfer_in(FIXTURES / "golden_hexapawn3.rules")
    assert seeded.win_depths == (1, 2) and seeded.draw_depths == ()
    assert transfer_in(FIXTURES / "golden_hexapawn3.rules", include_draws=True).draw_depths == (1, 2)
    learner = MigoLearner(ox, base=seeded.program)
    s = GameState.parse("xx./oo./... x")
    assert learner.select_move(s, random.Random(0)) == GameState.parse("xxx/oo./... o")


def test_learner_mode():
    assert not LearnerMode.mixed().separated
    assert LearnerMode(5).separated and str(LearnerMode(5)) == "separated(5)"
    with pytest.raises(ValueError):
        LearnerMode(0)


def run_learner(game, oracle, learner, boards, seed):
    rng = random.Random(seed)
    traces = []
    for b in boards:
        trace, outcome = play(game, oracle, b, lambda s: learner.select_move(s, rng))
        learner.observe(trace, outcome)
        traces.append((trace, outcome))
    return traces


def test_mixed_store_contains_separated_store(hex3, hex3_oracle):
    rng = random.Random(11)
    boards = [rng.choice(hex3.initial_board_set()) for _ in range(40)]
    mixed = MigoLearner(hex3)
    separated = MigoLearner(hex3, LearnerMode(5))
    traces = run_learner(hex3, hex3_oracle, mixed, boards, 5)
    for trace, outcome in traces:
        separated.observe(trace, outcome)
        have = {(e.task, e.depth, e.pair) for e in mixed.store.all_examples()}
        assert {(e.task, e.depth, e.pair) for e in separated.store.all_examples()} <= have


def test_relearning_is_deterministic(ox, ox_oracle):
    rng = random.Random(2)
    boards = [rng.choice(ox.initial_board_set()) for _ in range(30)]
    learner = MigoLearner(ox)
    run_learner(ox, ox_oracle, learner, boards, 9)
    again = migo_learn(learner.store, MigoContext(GamePrimitives(ox)))
    assert again.render() == learner.strategy.render()


def test_win_tasks_come_first(hex3, hex3_oracle):
    rng = random.Random(4)
    boards = [rng.choice(hex3.initial_board_set()) for _ in range(60)]
    for mode in (LearnerMode.mixed(), LearnerMode(5)):
        learner = MigoLearner(hex3, mode)
        r = random.Random(8)
        for b in boards:
            trace, outcome = play(hex3, hex3_oracle, b, lambda s: learner.select_move(s, r))
            learner.observe(trace, outcome)
            if learner.strategy.draw_depths:
                assert learner.strategy.win_depths


def test_separated_ignores_draws_until_stable(hex3, hex3_oracle):
    learner = MigoLearner(hex3, LearnerMode(1000))
    rng = random.Random(1)
    boards = [rng.choice(hex3.initial_board_set()) for _ in range(40)]
    run_learner(hex3, hex3_oracle, learner, boards, 1)
    assert learner.store.depths(DRAW) == []
    assert learner.strategy.draw_depths == ()
