"""Global-best particle swarm over the encoded search space.

Velocity update per dimension::

    v' = v + u1 * phi1 * (p_i - x) + u2 * phi2 * (p_g - x),   u1, u2 ~ U(0, 1)

clamped to half the encoded range of that dimension. There is no inertia
weight. Positions are left unclipped; only the decoded configuration handed
to the objective is clipped into the box.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import StrategyResult, TrialRecorder
from ..errors import DimensionMismatch, TuneError
from ..rng import SeededRandomStream
from ..space import SearchSpace, decode, encode, sample


@dataclass(frozen=True)
class PSOParams:
    swarm_size: int = 10
    generations: int = 40
    phi1: float = 0.5
    phi2: float = 0.5
    velocity_clamp: float = 0.5

    def __post_init__(self):
        if self.swarm_size < 1 or self.generations < 0:
            raise TuneError("PSO sizes must be positive")


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    best_position: np.ndarray
    best_score: float = float("-inf")


@dataclass
class Swarm:
    particles: list
    phi1: float = 0.5
    phi2: float = 0.5
    global_best: np.ndarray | None = None
    global_best_score: float = float("-inf")
    vmax: np.ndarray = field(default=None)


def init_swarm(space: SearchSpace, n: int, rng: SeededRandomStream, params: PSOParams = PSOParams()) -> Swarm:
    if n < 1:
        raise TuneError("swarm size must be at least 1")
    particles = []
    for _ in range(n):
        x = encode(space, sample(space, rng))
        particles.append(Particle(x, np.zeros_like(x), x.copy()))
    lo, hi = space.bounds()
    return Swarm(particles, params.phi1, params.phi2, vmax=params.velocity_clamp * (hi - lo))


def update_velocity(particle: Particle, p_g, phi1: float, phi2: float, rng: SeededRandomStream,
                    vmax=None) -> np.ndarray:
    x = particle.position
    p_g = np.asarray(p_g, dtype=float)
    if not (x.shape == particle.velocity.shape == particle.best_position.shape == p_g.shape):
        raise DimensionMismatch("particle vectors disagree in dimension")
    u1 = rng.generator.random(len(x))
    u2 = rng.generator.random(len(x))
    v = particle.velocity + u1 * phi1 * (particle.best_position - x) + u2 * phi2 * (p_g - x)
    if vmax is not None:
        v = np.clip(v, -vmax, vmax)
    return v


def update_position(particle: Particle) -> np.ndarray:
    return particle.position + particle.velocity


def pso_optimize(space: SearchSpace, objective, params: PSOParams = PSOParams(), seed: int = 0, *,
                 budget=None, sink=None, on_generation=None) -> StrategyResult:
    """Evaluate the initial swarm, then run ``params.generations`` synchronous steps.

    Every generation moves all particles using the global best from the start
    of that generation, evaluates them in particle order and then updates
    personal and global bests (strict improvement only). ``budget`` (if
    given) caps objective calls; the run stops once it is spent.
    """
    stream = SeededRandomStream(seed).child("pso")
    swarm = init_swarm(space, params.swarm_size, stream, params)
    rec = TrialRecorder(objective, space, budget, sink=sink)

    def evaluate_all() -> list | None:
        scores = []
        for p in swarm.particles:
            if rec.exhausted:
                return None
            scores.append(rec.evaluate(decode(space, p.position)))
        return scores

    def absorb(scores):
        for p, s in zip(swarm.particles, scores):
            if s > p.best_score:
                p.best_score = s
                p.best_position = p.position.copy()
            if s > swarm.global_best_score:
                swarm.global_best_score = s
                swarm.global_best = p.position.copy()

    completed = -1
    scores = evaluate_all()
    if scores is not None:
        absorb(scores)
        completed = 0
        if on_generation:
            on_generation(0, swarm)
        for gen in range(1, params.generations + 1):
            g = swarm.global_best.copy()
            for p in swarm.particles:
                p.velocity = update_velocity(p, g, swarm.phi1, swarm.phi2, stream, swarm.vmax)
                p.position = update_position(p)
            scores = evaluate_all()
            if scores is None:
                break
            absorb(scores)
            completed = gen
            if on_generation:
                on_generation(gen, swarm)
    return rec.result("pso", seed, generations_completed=completed)
