"""
Five search strategies on toy objectives
========================================

Every strategy in ``hpotune`` maximizes a black-box function of a
configuration dict over a :class:`~hpotune.space.SearchSpace`. Here the
objectives are cheap closed-form functions, so the whole script runs in a
few seconds and the optimum is known in advance.
"""

import numpy as np

from hpotune import SearchSpace, run_strategy
from hpotune.core import running_best
from hpotune.space import Categorical, ContinuousRange, IntegerRange, Values

# %%
# A mixed space: one continuous, one integer and one categorical axis.
# The objective peaks at x = 0.3, k = 7, kind = "b" with value 0.

space = SearchSpace([
    ("x", ContinuousRange(0.0, 1.0)),
    ("k", IntegerRange(1, 12)),
    ("kind", Categorical(["a", "b", "c"])),
])


def objective(c):
    penalty = {"a": 0.5, "b": 0.0, "c": 0.2}[c["kind"]]
    return -((c["x"] - 0.3) ** 2) - 0.01 * (c["k"] - 7) ** 2 - penalty


# %%
# Random search, GP-based Bayesian optimization, the genetic algorithm and
# particle swarm each get the same budget of 60 objective calls.

budget = 60
results = {
    "random": run_strategy("random", space, objective, budget, seed=1),
    "bayes": run_strategy("bayes", space, objective, budget, seed=1),
    "ga": run_strategy("ga", space, objective, budget, seed=1,
                       params={"population_size": 10, "generations": 5}),
    "pso": run_strategy("pso", space, objective, budget, seed=1,
                        params={"swarm_size": 10, "generations": 5}),
}

for name, r in results.items():
    print(f"{name:>6}: best {r.best_score:+.5f} at {r.best_config} after {len(r.history)} trials")

# %%
# The GA stops early: offspring that decode to an already scored
# configuration reuse that score without spending budget, and five
# generations of ten produce many repeats.
#
# The running best after 10, 20, 40 and 60 calls shows how quickly each
# strategy gets close. Bayesian optimization usually leads once its 10
# random initial points are spent.

for name, r in results.items():
    curve = running_best(r.history)
    marks = [curve[min(i, len(curve)) - 1] for i in (10, 20, 40, 60)]
    print(f"{name:>6}: " + "  ".join(f"{m:+.4f}" for m in marks))

# %%
# Grid search needs explicit value lists and always evaluates the full
# product, here 3 x 4 x 3 = 36 points.


grid = SearchSpace([
    ("x", Values([0.1, 0.3, 0.5])),
    ("k", Values([1, 4, 7, 10])),
    ("kind", Categorical(["a", "b", "c"])),
])
g = run_strategy("grid", grid, objective)
print(f"  grid: {len(g.history)} trials, best {g.best_score:+.5f} at {g.best_config}")

# %%
# Same seed, same trajectory: every strategy is a pure function of its seed.

again = run_strategy("pso", space, objective, budget, seed=1, params={"swarm_size": 10, "generations": 5})
print("pso repeatable:", [t.score for t in again.history] == [t.score for t in results["pso"].history])
print("distinct scores seen by pso:", len(np.unique([t.score for t in again.history])))
