"""Analytic benchmark problems with known optima.

* ``sphere``: maximize ``-(x1^2 + x2^2)`` on ``[-5, 5]^2`` with PSO (optimum 0).
* ``onemax``: ten ``{"0", "1"}`` genes, score = number of ``"1"`` genes, GA (optimum 10).
* ``smooth1d``: maximize ``-(x - 0.3)^2`` on ``[0, 1]`` with Bayes and random search, budget 20.
"""
from __future__ import annotations

import time

import numpy as np

from .space import Categorical, ContinuousRange, SearchSpace
from .strategies.bayes import bayes_optimize
from .strategies.ga import GAParams, ga_optimize
from .strategies.grid_random import random_search
from .strategies.pso import PSOParams, pso_optimize

SPHERE_SPACE = SearchSpace([("x1", ContinuousRange(-5.0, 5.0)), ("x2", ContinuousRange(-5.0, 5.0))])
ONEMAX_SPACE = SearchSpace([(f"g{i}", Categorical(["0", "1"])) for i in range(10)])
SMOOTH_SPACE = SearchSpace([("x", ContinuousRange(0.0, 1.0))])


def sphere(config: dict) -> float:
    return -(config["x1"] ** 2 + config["x2"] ** 2)


def onemax(config: dict) -> int:
    return sum(v == "1" for v in config.values())


def smooth1d(config: dict) -> float:
    return -((config["x"] - 0.3) ** 2)


def run_sphere(seeds=range(10)) -> dict:
    t0 = time.perf_counter()
    best = [pso_optimize(SPHERE_SPACE, sphere, PSOParams(), s).best_score for s in seeds]
    hits = sum(b >= -1e-2 for b in best)
    return {"name": "sphere/pso", "best": best, "hits": hits, "runs": len(best),
            "detail": f"{hits}/{len(best)} seeds reach >= -1e-2 (need 9)",
            "required": 9, "passed": hits >= 9, "seconds": time.perf_counter() - t0}


def run_onemax(seeds=range(10)) -> dict:
    t0 = time.perf_counter()
    best = [ga_optimize(ONEMAX_SPACE, onemax, GAParams(), s).best_score for s in seeds]
    hits = sum(b == 10 for b in best)
    return {"name": "onemax/ga", "best": best, "hits": hits, "runs": len(best),
            "detail": f"{hits}/{len(best)} seeds reach 10 (need 8)",
            "required": 8, "passed": hits >= 8, "seconds": time.perf_counter() - t0}


def run_smooth1d(seeds=range(20), budget: int = 20) -> dict:
    t0 = time.perf_counter()
    bayes = [bayes_optimize(SMOOTH_SPACE, smooth1d, budget, s) for s in seeds]
    rand = [random_search(SMOOTH_SPACE, smooth1d, budget, s) for s in seeds]
    bayes_best = [r.best_score for r in bayes]
    rand_best = [r.best_score for r in rand]
    near = sum(abs(r.best_config["x"] - 0.3) <= 0.05 for r in bayes)
    med_b, med_r = float(np.median(bayes_best)), float(np.median(rand_best))
    return {"name": "smooth1d/bayes-vs-random", "bayes_median": med_b, "random_median": med_r,
            "bayes_within_0.05": near, "runs": len(bayes_best),
            "detail": f"median best bayes {med_b:.3g} vs random {med_r:.3g}",
            "passed": med_b > med_r, "seconds": time.perf_counter() - t0}


SUITES = {"analytic": (run_sphere, run_onemax, run_smooth1d)}


def run_suite(name: str = "analytic") -> list[dict]:
    return [fn() for fn in SUITES[name]]
