"""Solve noughts and crosses and look at the boards the learner starts from."""

from fractions import Fraction

from migo.game import get_game
from migo.oracle import get_oracle

game = get_game("ox")
oracle = get_oracle("ox")
print(len(oracle), "canonical states")
print("start value:", oracle.expected_outcome(game.start_state()))  # 0, a draw

# every episode starts after one full move
boards = game.initial_board_set()
for b in boards:
    e = oracle.entry(b)
    print(b.serialize(), "value", e.value, "distance", e.distance)

# losing every game would cost this much on average
worst = Fraction(sum(oracle.minimax_regret(b, -1) for b in boards), len(boards))
print("worst-case regret per episode:", worst)

# the opponent always plays the minimax reply
b = boards[0]
print(b.serialize(), "->", oracle.best_reply(game.successors(b)[0]).serialize())
