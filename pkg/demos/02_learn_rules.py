"""Play a MIGO learner against the optimal opponent and print what it learns."""

import random

from migo.game import Mark, get_game
from migo.learner import MigoLearner
from migo.oracle import get_oracle

game = get_game("hexapawn3")
oracle = get_oracle("hexapawn3")
learner = MigoLearner(game)
rng = random.Random(0)

regret = 0
for episode in range(60):
    s = rng.choice(game.initial_board_set())
    trace, start = [s], s
    while not game.is_terminal(s):
        s = learner.select_move(s, rng) if s.to_move is Mark.X else oracle.best_reply(s)
        trace.append(s)
    outcome = game.outcome(s)
    regret += oracle.minimax_regret(start, outcome)
    labels, changed = learner.observe(trace, outcome)
    if changed:
        print(f"episode {episode}: {len(labels)} labels, tasks now {sorted(learner.strategy.tasks)}")

print("cumulative regret:", regret)
print(learner.strategy.render())
