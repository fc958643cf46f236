"""Episode orchestration: one episode = one full evolutionary run.

With the defaults (50 generations, population 10) an episode consumes
exactly 500 evaluations: generation 0 is the evaluated initial population
(DE) or the first sampling at the initial step size (CMA-ES), followed by
49 controller-driven generations.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import baselines, cmaes, de
from .benchmarks import BenchmarkFunction, EvalBudget, get_function
from .observe import ObservationSpec, RunTrace, build_observation, reward
from .policy import (ActionSpec, PolicyNet, decode_de_params, decode_sigma,
                     sample_action)
from .stats import auc, best_of_run

DEFAULT_GENERATIONS = 50
DEFAULT_POPULATION = 10
DEFAULT_SIGMA0 = 0.5


@dataclass
class EpisodeConfig:
    algorithm: str                      # "de" | "cmaes"
    functions: list                     # [(name, dimension), ...]
    obs_spec: ObservationSpec
    action_spec: ActionSpec
    generations: int = DEFAULT_GENERATIONS
    population: int = DEFAULT_POPULATION
    sigma0: float = DEFAULT_SIGMA0


def multi_function_sampler(function_set: list, rng: np.random.Generator):
    """Uniform i.i.d. choice of the episode's objective function."""
    if not function_set:
        raise ValueError("function set is empty")
    return tuple(function_set[rng.integers(len(function_set))])


# ---------------------------------------------------------------------------
# Controllers (evaluation-time adapters over the engines)

class FixedDeController:
    """Constant F/CR for every individual and generation."""

    def __init__(self, F: float = 0.5, CR: float = 0.9):
        self.F, self.CR = float(F), float(CR)

    def initial_action(self):
        return np.array([self.F, self.CR])

    def de_params(self, trace, pop, rng):
        np_ = pop.size
        return np.full(np_, self.F), np.full(np_, self.CR), np.array([self.F, self.CR])

    def feedback(self, F, CR, replaced, improved):
        pass


class IdeController:
    def __init__(self):
        self.state = None

    def initial_action(self):
        return np.array([float(np.mean(self.state.F)), float(np.mean(self.state.CR))])

    def begin(self, pop_size, rng):
        self.state = baselines.make_ide_state(pop_size, rng)

    def de_params(self, trace, pop, rng):
        if self.state is None:
            self.begin(pop.size, rng)
        F, CR = baselines.ide_update(self.state, pop.best_index, rng)
        return F, CR, np.array([float(np.mean(F)), float(np.mean(CR))])

    def feedback(self, F, CR, replaced, improved):
        baselines.ide_record_success(self.state, F, CR, replaced)


class JdeController:
    def __init__(self):
        self.state = baselines.JdeState()

    def initial_action(self):
        return np.array([self.state.best_F, self.state.best_CR])

    def de_params(self, trace, pop, rng):
        F, CR = baselines.jde_update(self.state, rng)
        np_ = pop.size
        return np.full(np_, F), np.full(np_, CR), np.array([F, CR])

    def feedback(self, F, CR, replaced, improved):
        baselines.jde_record(self.state, float(F[0]), float(CR[0]), improved)


class PolicyDeController:
    """Learned policy driving DE; test-time action is the deterministic mean."""

    def __init__(self, policy: PolicyNet, spec: ActionSpec, obs_spec: ObservationSpec,
                 bounds_width: np.ndarray, stochastic: bool = False):
        self.policy = policy
        self.spec = spec
        self.obs_spec = obs_spec
        self.bounds_width = bounds_width
        self.stochastic = stochastic
        self.prev_action_norm = spec.normalize(spec.neutral())

    def initial_action(self):
        return self.spec.neutral()

    def de_params(self, trace, pop, rng):
        obs = build_observation(trace, self.obs_spec, self.prev_action_norm, self.bounds_width)
        mean, log_std = self.policy.forward(obs)
        action, _raw, _logp = sample_action(mean, log_std, self.spec, rng,
                                            stochastic=self.stochastic)
        self.prev_action_norm = self.spec.normalize(action)
        F, CR = decode_de_params(action, self.spec, pop.size, rng)
        return F, CR, action

    def feedback(self, F, CR, replaced, improved):
        pass


class FixedSigmaController:
    def __init__(self, sigma: float = DEFAULT_SIGMA0):
        self.sigma = float(sigma)

    def initial_action(self):
        return np.array([self.sigma])

    def sigma_value(self, trace, rng):
        return self.sigma

    def feedback(self, result):
        pass


class CsaController:
    def __init__(self, dim: int, sigma0: float = DEFAULT_SIGMA0,
                 c: float | None = None, d_sigma: float = 1.0):
        self.state = baselines.make_csa_state(dim, c=c, d_sigma=d_sigma)
        self.sigma = float(sigma0)

    def initial_action(self):
        return np.array([self.sigma])

    def sigma_value(self, trace, rng):
        return self.sigma

    def feedback(self, result: cmaes.GenerationResult):
        best = result.best_index
        xi_star = (result.samples[best] - result.mean_before) / result.sigma_used
        self.state, self.sigma = baselines.csa_update(self.state, xi_star, result.sigma_used)


class PolicySigmaController:
    def __init__(self, policy: PolicyNet, spec: ActionSpec, obs_spec: ObservationSpec,
                 bounds_width: np.ndarray, stochastic: bool = False):
        self.policy = policy
        self.spec = spec
        self.obs_spec = obs_spec
        self.bounds_width = bounds_width
        self.stochastic = stochastic
        self.prev_action_norm = spec.normalize(spec.neutral())

    def initial_action(self):
        return self.spec.neutral()

    def sigma_value(self, trace, rng):
        obs = build_observation(trace, self.obs_spec, self.prev_action_norm, self.bounds_width)
        mean, log_std = self.policy.forward(obs)
        action, _raw, _logp = sample_action(mean, log_std, self.spec, rng,
                                            stochastic=self.stochastic)
        self.prev_action_norm = self.spec.normalize(action)
        return decode_sigma(action)

    def feedback(self, result):
        pass


# ---------------------------------------------------------------------------
# Episode runners

def run_de_episode(fn: BenchmarkFunction, controller, rng: np.random.Generator,
                   generations: int = DEFAULT_GENERATIONS,
                   population: int = DEFAULT_POPULATION) -> RunTrace:
    budget = EvalBudget(generations * population)
    pop = de.init_population(fn, population, rng, budget)
    if hasattr(controller, "begin"):
        controller.begin(population, rng)
    trace = RunTrace()
    trace.append_generation(pop.genotypes, pop.fitnesses, controller.initial_action())
    trace.rewards.append(0.0)
    for _ in range(1, generations):
        F, CR, record = controller.de_params(trace, pop, rng)
        prev_best = pop.best_fitness
        pop, replaced = de.de_generation(pop, F, CR, fn, rng, budget)
        controller.feedback(F, CR, replaced, pop.best_fitness < prev_best)
        trace.append_generation(pop.genotypes, pop.fitnesses, record)
        trace.rewards.append(reward(trace))
    return trace


def run_cma_episode(fn: BenchmarkFunction, controller, rng: np.random.Generator,
                    generations: int = DEFAULT_GENERATIONS,
                    population: int = DEFAULT_POPULATION,
                    sigma0: float = DEFAULT_SIGMA0) -> RunTrace:
    budget = EvalBudget(generations * population)
    state = cmaes.init_state(fn, sigma0, rng)
    trace = RunTrace()
    # generation 0 runs at the initial step size before the controller kicks in
    result = cmaes.cma_generation(state, sigma0, fn, population, rng, budget)
    state = result.state
    if hasattr(controller, "feedback"):
        controller.feedback(result)
    trace.append_generation(result.genotypes, result.fitnesses, np.array([sigma0]))
    trace.rewards.append(0.0)
    for _ in range(1, generations):
        sigma = controller.sigma_value(trace, rng)
        result = cmaes.cma_generation(state, sigma, fn, population, rng, budget)
        state = result.state
        controller.feedback(result)
        trace.append_generation(result.genotypes, result.fitnesses, np.array([sigma]))
        trace.rewards.append(reward(trace))
    return trace


def run_episode(config: EpisodeConfig, controller, rng: np.random.Generator,
                function: tuple | None = None) -> RunTrace:
    if function is None:
        function = multi_function_sampler(config.functions, rng)
    fn = get_function(*function)
    if config.algorithm == "de":
        return run_de_episode(fn, controller, rng, config.generations, config.population)
    if config.algorithm == "cmaes":
        return run_cma_episode(fn, controller, rng, config.generations, config.population,
                               config.sigma0)
    raise ValueError(f"unknown algorithm {config.algorithm!r}")


# ---------------------------------------------------------------------------
# Training environment (PPO-facing)

class EvolutionEnv:
    """Step interface over evolutionary runs for the PPO trainer.

    One reset/step cycle covers one episode: reset initializes the run and
    returns the zero-padded observation, each step applies one controlled
    generation. Policy-emitted raw actions are clipped into the action space
    before decoding.
    """

    def __init__(self, config: EpisodeConfig, rng: np.random.Generator):
        self.config = config
        self.rng = rng
        self.spec = config.action_spec
        self.obs_spec = config.obs_spec
        self.episode_log: list[tuple] = []
        self._fn = None
        self._budget = None
        self._trace = None
        self._pop = None
        self._state = None
        self._prev_action_norm = None
        self._gen = 0

    @property
    def observation_dim(self) -> int:
        return self.obs_spec.length(self.spec.dim)

    @property
    def action_dim(self) -> int:
        return self.spec.dim

    @property
    def steps_per_episode(self) -> int:
        return self.config.generations - 1

    def reset(self) -> np.ndarray:
        cfg = self.config
        name, dim = multi_function_sampler(cfg.functions, self.rng)
        self._fn = get_function(name, dim)
        self.episode_log.append((name, dim))
        self._budget = EvalBudget(cfg.generations * cfg.population)
        self._trace = RunTrace()
        if cfg.algorithm == "de":
            self._pop = de.init_population(self._fn, cfg.population, self.rng, self._budget)
            self._trace.append_generation(self._pop.genotypes, self._pop.fitnesses,
                                          self.spec.neutral())
        else:
            self._state = cmaes.init_state(self._fn, cfg.sigma0, self.rng)
            result = cmaes.cma_generation(self._state, cfg.sigma0, self._fn,
                                          cfg.population, self.rng, self._budget)
            self._state = result.state
            self._trace.append_generation(result.genotypes, result.fitnesses,
                                          np.array([cfg.sigma0]))
        self._trace.rewards.append(0.0)
        self._prev_action_norm = self.spec.normalize(self.spec.neutral())
        self._gen = 0
        return self._observe()

    def _observe(self) -> np.ndarray:
        return build_observation(self._trace, self.obs_spec, self._prev_action_norm,
                                 self._fn.bounds_width)

    def step(self, raw_action: np.ndarray):
        cfg = self.config
        action = self.spec.clip(raw_action)
        if cfg.algorithm == "de":
            F, CR = decode_de_params(action, self.spec, cfg.population, self.rng)
            self._pop, _ = de.de_generation(self._pop, F, CR, self._fn, self.rng, self._budget)
            self._trace.append_generation(self._pop.genotypes, self._pop.fitnesses, action)
        else:
            sigma = decode_sigma(action)
            result = cmaes.cma_generation(self._state, sigma, self._fn, cfg.population,
                                          self.rng, self._budget)
            self._state = result.state
            self._trace.append_generation(result.genotypes, result.fitnesses, action)
        r = reward(self._trace)
        self._trace.rewards.append(r)
        self._prev_action_norm = self.spec.normalize(action)
        self._gen += 1
        done = self._gen >= self.steps_per_episode
        return self._observe(), r, done


# ---------------------------------------------------------------------------
# Test protocol

@dataclass
class ProtocolResult:
    traces: list
    aucs: np.ndarray
    bests: np.ndarray
    seeds: list


def run_test_protocol(controller_factory, function: tuple, seed_base: int,
                      runs: int = 50, generations: int = DEFAULT_GENERATIONS,
                      population: int = DEFAULT_POPULATION, algorithm: str = "de",
                      sigma0: float = DEFAULT_SIGMA0, jobs: int = 1) -> ProtocolResult:
    """Independent seeded runs (seeds seed_base..seed_base+runs-1) with
    per-run AUC and best-of-run; results are ordered by run index."""
    fn = get_function(*function)

    def one(run_index: int):
        rng = np.random.default_rng(seed_base + run_index)
        controller = controller_factory()
        if algorithm == "de":
            trace = run_de_episode(fn, controller, rng, generations, population)
        else:
            trace = run_cma_episode(fn, controller, rng, generations, population, sigma0)
        return trace

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            traces = list(pool.map(one, range(runs)))
    else:
        traces = [one(i) for i in range(runs)]
    aucs = np.array([auc(np.minimum.accumulate(t.best_fitness)) for t in traces])
    bests = np.array([best_of_run(t) for t in traces])
    return ProtocolResult(traces=traces, aucs=aucs, bests=bests,
                          seeds=[seed_base + i for i in range(runs)])


def export_trace_csv(trace: RunTrace, path) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    n_actions = len(trace.actions[0])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["generation", "best_fitness", "reward"]
                        + [f"action_{i}" for i in range(n_actions)])
        for g in range(len(trace)):
            writer.writerow([g, repr(trace.best_fitness[g]), repr(trace.rewards[g])]
                            + [repr(float(a)) for a in trace.actions[g]])
