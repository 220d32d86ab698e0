"""Generational genetic algorithm (select, vary, replace wholesale).

Genes are the search-space encoding, one per hyperparameter. Variation uses
uniform crossover and per-gene resampling mutation, both of which keep genes
inside their domains. Replacement is non-elitist; the incumbent lives in the
trial history only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import StrategyResult, TrialRecorder
from ..errors import LengthMismatch, TuneError, UnsetFitness
from ..rng import SeededRandomStream
from ..space import SearchSpace, decode, encode, encode_value, sample, sample_value


@dataclass(frozen=True)
class GAParams:
    population_size: int = 10
    generations: int = 40
    crossover_prob: float = 0.9
    mutation_prob: float = 0.05
    tournament_size: int = 3

    def __post_init__(self):
        if self.population_size < 1 or self.generations < 0 or self.tournament_size < 1:
            raise TuneError("GA sizes must be positive")
        for p in (self.crossover_prob, self.mutation_prob):
            if not 0.0 <= p <= 1.0:
                raise TuneError(f"probabilities must lie in [0, 1], got {p}")


@dataclass
class Individual:
    genes: np.ndarray
    fitness: float | None = None

    def copy(self) -> Individual:
        return Individual(self.genes.copy(), self.fitness)


def init_population(space: SearchSpace, n: int, rng: SeededRandomStream) -> list[Individual]:
    if n < 1:
        raise TuneError("population size must be at least 1")
    return [Individual(encode(space, sample(space, rng))) for _ in range(n)]


def tournament_select(population: list[Individual], k: int, rng: SeededRandomStream) -> Individual:
    """Best of ``k`` uniform draws with replacement; ties go to the lower population index."""
    if any(ind.fitness is None for ind in population):
        raise UnsetFitness("every individual needs a fitness before selection")
    picks = rng.generator.integers(len(population), size=k)
    best = min(picks, key=lambda i: (-population[i].fitness, i))
    return population[best]


def crossover(a: Individual, b: Individual, rng: SeededRandomStream) -> tuple[Individual, Individual]:
    """Uniform crossover: each position swaps between the children with probability 1/2."""
    if a.genes.shape != b.genes.shape:
        raise LengthMismatch("parents have different gene counts")
    swap = rng.generator.random(len(a.genes)) < 0.5
    c1 = np.where(swap, b.genes, a.genes)
    c2 = np.where(swap, a.genes, b.genes)
    return Individual(c1), Individual(c2)


def mutate(ind: Individual, space: SearchSpace, per_gene_prob: float, rng: SeededRandomStream) -> Individual:
    """Resample each gene from its own domain with probability ``per_gene_prob``."""
    if not 0.0 <= per_gene_prob <= 1.0:
        raise TuneError("mutation probability must lie in [0, 1]")
    genes = ind.genes.copy()
    hits = rng.generator.random(len(genes)) < per_gene_prob
    for i in np.flatnonzero(hits):
        domain = space.params[i][1]
        genes[i] = encode_value(domain, sample_value(domain, rng))
    if not hits.any():
        return Individual(genes, ind.fitness)
    return Individual(genes)


def ga_optimize(space: SearchSpace, objective, params: GAParams = GAParams(), seed: int = 0, *,
                budget=None, sink=None, on_generation=None) -> StrategyResult:
    """Evaluate a random population, then run ``params.generations`` rounds of
    tournament selection, pairwise crossover, mutation and wholesale replacement.

    Configurations already scored in this run reuse their score instead of
    calling the objective again. ``budget`` (if given) caps objective calls;
    the run stops early once it is spent.
    """
    stream = SeededRandomStream(seed).child("ga")
    rec = TrialRecorder(objective, space, budget, sink=sink)
    seen: dict = {}

    def score(ind: Individual) -> bool:
        if ind.fitness is not None:
            return True
        config = decode(space, ind.genes)
        key = space.key(config)
        if key not in seen:
            if rec.exhausted:
                return False
            seen[key] = rec.evaluate(config)
        ind.fitness = seen[key]
        return True

    P = params.population_size
    population = init_population(space, P, stream)
    completed = -1
    if all(score(ind) for ind in population):
        completed = 0
        if on_generation:
            on_generation(0, population)
        for gen in range(1, params.generations + 1):
            parents = [tournament_select(population, params.tournament_size, stream).copy() for _ in range(P)]
            children = []
            for i in range(0, P - 1, 2):
                a, b = parents[i], parents[i + 1]
                if stream.generator.random() < params.crossover_prob:
                    a, b = crossover(a, b, stream)
                children += [a, b]
            if P % 2:
                children.append(parents[-1])
            children = [mutate(c, space, params.mutation_prob, stream) for c in children]
            if not all(score(c) for c in children):
                break
            population = children
            completed = gen
            if on_generation:
                on_generation(gen, population)
    return rec.result("ga", seed, generations_completed=completed)
