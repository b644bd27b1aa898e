"""Compare learners on matched board streams and plot mean cumulative regret."""

import sys

from migo.harness import ExperimentConfig, run_experiment

game = sys.argv[1] if len(sys.argv) > 1 else "hexapawn3"
learners = ["migo-mixed", "migo-separated", "menace", "qlearning", "dqn", "random"]

curves = {}
for name in learners:
    res = run_experiment(ExperimentConfig(game, name, 100, 10, seed=0))
    curves[name] = res.curve
    print(f"{name:15s} final mean {res.curve.mean[-1]:7.2f}  std {res.curve.std[-1]:6.2f}")

try:
    import matplotlib.pyplot as plt
except ImportError:  # plotting is optional
    sys.exit()

for name, c in curves.items():
    plt.plot(range(1, len(c.mean) + 1), c.mean, label=name)
plt.xlabel("episode")
plt.ylabel("mean cumulative regret")
plt.legend()
plt.savefig(f"regret_{game}.png")
print(f"saved regret_{game}.png")
