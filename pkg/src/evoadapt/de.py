"""Differential Evolution (best/1/bin) with externally injected F and CR.

Scale factor and crossover rate are stored per individual so that a single
global pair (broadcast), per-individual baselines (iDE) and policy-sampled
values all go through the same generation step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .benchmarks import BenchmarkFunction, BudgetExhausted, EvalBudget, evaluate

MIN_POPULATION = 4  # best + two distinct difference individuals + parent


@dataclass
class Population:
    genotypes: np.ndarray  # (NP, d)
    fitnesses: np.ndarray  # (NP,)
    generation_index: int = 0

    @property
    def size(self) -> int:
        return self.genotypes.shape[0]

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.fitnesses))

    @property
    def best_fitness(self) -> float:
        return float(self.fitnesses[self.best_index])


def init_population(fn: BenchmarkFunction, np_: int, rng: np.random.Generator,
                    budget: EvalBudget | None = None) -> Population:
    """Uniform random population within bounds; consumes NP evaluations."""
    if np_ < MIN_POPULATION:
        raise ValueError(f"population size must be >= {MIN_POPULATION}, got {np_}")
    genotypes = rng.uniform(fn.lower, fn.upper, size=(np_, fn.dimension))
    fitnesses = np.array([evaluate(fn, x, budget) for x in genotypes])
    return Population(genotypes, fitnesses, 0)


def mutate_best1(best: np.ndarray, a: np.ndarray, b: np.ndarray, f: float) -> np.ndarray:
    return best + f * (a - b)


def _pick_pair(np_: int, exclude: set[int], rng: np.random.Generator) -> tuple[int, int]:
    candidates = [j for j in range(np_) if j not in exclude]
    a, b = rng.choice(len(candidates), size=2, replace=False)
    return candidates[a], candidates[b]


def de_generation(pop: Population, F, CR, fn: BenchmarkFunction, rng: np.random.Generator,
                  budget: EvalBudget | None = None) -> tuple[Population, np.ndarray]:
    """One best/1/bin generation.

    Returns the next population and the boolean mask of parents that were
    replaced by their trial (child fitness <= parent fitness). Consumes
    exactly NP evaluations; if the budget cannot cover them, the generation
    is aborted before consuming anything.
    """
    np_, d = pop.genotypes.shape
    F = np.broadcast_to(np.asarray(F, dtype=float), (np_,))
    CR = np.broadcast_to(np.asarray(CR, dtype=float), (np_,))
    if budget is not None and budget.remaining < np_:
        raise BudgetExhausted(f"generation needs {np_} evaluations, {budget.remaining} left")

    best = pop.best_index
    children = np.empty_like(pop.genotypes)
    for i in range(np_):
        ia, ib = _pick_pair(np_, {i, best}, rng)
        mutant = mutate_best1(pop.genotypes[best], pop.genotypes[ia], pop.genotypes[ib], F[i])
        cross = rng.random(d) < CR[i]
        cross[rng.integers(d)] = True  # j_rand: at least one mutant gene
        child = np.where(cross, mutant, pop.genotypes[i])
        children[i] = np.clip(child, fn.lower, fn.upper)

    child_fit = np.array([evaluate(fn, c, budget) for c in children])
    replaced = child_fit <= pop.fitnesses
    genotypes = np.where(replaced[:, None], children, pop.genotypes)
    fitnesses = np.where(replaced, child_fit, pop.fitnesses)
    return Population(genotypes, fitnesses, pop.generation_index + 1), replaced
