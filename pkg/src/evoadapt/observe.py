"""State metrics (observations) and the per-generation reward.

All metrics are normalized so that the policy input stays in a fixed range
regardless of the objective's scale: fitness deltas are self-normalized with
a 1e-5 guard against division by zero, genotype deltas are normalized by the
search-space bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EPS = 1e-5


@dataclass
class RunTrace:
    """Per-generation record of one evolutionary run."""

    best_fitness: list = field(default_factory=list)
    best_genotype: list = field(default_factory=list)
    fitness_max: list = field(default_factory=list)
    fitness_min: list = field(default_factory=list)
    genotype_max: list = field(default_factory=list)
    genotype_min: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    rewards: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.best_fitness)

    def append_generation(self, genotypes: np.ndarray, fitnesses: np.ndarray,
                          action: np.ndarray) -> None:
        best = int(np.argmin(fitnesses))
        self.best_fitness.append(float(fitnesses[best]))
        self.best_genotype.append(np.array(genotypes[best], dtype=float))
        self.fitness_max.append(float(np.max(fitnesses)))
        self.fitness_min.append(float(np.min(fitnesses)))
        self.genotype_max.append(np.max(genotypes, axis=0).astype(float))
        self.genotype_min.append(np.min(genotypes, axis=0).astype(float))
        self.actions.append(np.asarray(action, dtype=float))


@dataclass(frozen=True)
class ObservationSpec:
    history_length: int = 40
    include_intra_df: bool = False
    include_inter_dx: bool = False
    include_intra_dx: bool = False

    def length(self, action_dim: int) -> int:
        g = self.history_length
        n = g + action_dim
        if self.include_intra_df:
            n += g
        if self.include_inter_dx:
            n += 2 * g
        if self.include_intra_dx:
            n += 2 * g
        return n


def inter_delta_f(trace: RunTrace, g: int) -> np.ndarray:
    """Normalized best-fitness change over the last g generations, newest first."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    out = np.zeros(g)
    k = len(trace) - 1
    f = trace.best_fitness
    for idx in range(g):
        j = k - idx
        if j >= 1:
            num = f[j] - f[j - 1]
            out[idx] = num / (abs(num) + abs(f[j - 1]) + EPS)
    return out


def intra_delta_f(trace: RunTrace, g: int) -> np.ndarray:
    """Normalized population fitness spread over the last g generations."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    out = np.zeros(g)
    k = len(trace) - 1
    for idx in range(g):
        j = k - idx
        if j >= 0:
            spread = abs(trace.fitness_max[j] - trace.fitness_min[j])
            out[idx] = spread / (spread + abs(trace.best_fitness[j]) + EPS)
    return out


def inter_delta_x(trace: RunTrace, g: int, bounds_width: np.ndarray) -> np.ndarray:
    """(min, max) of the bound-normalized best-genotype displacement, per generation."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    out = np.zeros(2 * g)
    k = len(trace) - 1
    for idx in range(g):
        j = k - idx
        if j >= 1:
            delta = (trace.best_genotype[j] - trace.best_genotype[j - 1]) / bounds_width
            out[2 * idx] = np.min(delta)
            out[2 * idx + 1] = np.max(delta)
    return out


def intra_delta_x(trace: RunTrace, g: int, bounds_width: np.ndarray) -> np.ndarray:
    """(min, max) of per-dimension population spread ratios, per generation."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    out = np.zeros(2 * g)
    k = len(trace) - 1
    for idx in range(g):
        j = k - idx
        if j >= 0:
            ratio = np.abs(trace.genotype_max[j] - trace.genotype_min[j]) / bounds_width
            out[2 * idx] = np.min(ratio)
            out[2 * idx + 1] = np.max(ratio)
    return out


def build_observation(trace: RunTrace, spec: ObservationSpec, previous_action: np.ndarray,
                      bounds_width: np.ndarray | None = None) -> np.ndarray:
    """Flattened policy input: [inter df | previous action | optional blocks]."""
    g = spec.history_length
    parts = [inter_delta_f(trace, g), np.asarray(previous_action, dtype=float)]
    if spec.include_intra_df:
        parts.append(intra_delta_f(trace, g))
    if spec.include_inter_dx or spec.include_intra_dx:
        if bounds_width is None:
            raise ValueError("bounds_width is required for genotype-delta blocks")
    if spec.include_inter_dx:
        parts.append(inter_delta_x(trace, g, bounds_width))
    if spec.include_intra_dx:
        parts.append(intra_delta_x(trace, g, bounds_width))
    return np.concatenate(parts)


def reward(trace: RunTrace) -> float:
    """Negated inter-generational delta-f of the newest generation.

    The sign flip makes a fitness improvement (under minimization) yield a
    positive reward; generation 0 has no predecessor and earns 0.
    """
    if len(trace) < 2:
        return 0.0
    return float(-inter_delta_f(trace, 1)[0])
