"""Command-line entry point: list-functions, train, evaluate, compare."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys

import numpy as np

from . import envloop
from .benchmarks import BudgetExhausted, get_function, registry_list
from .config import (ConfigError, ExperimentConfig, load_config, save_config)
from .envloop import (CsaController, EpisodeConfig, EvolutionEnv,
                      FixedDeController, FixedSigmaController, IdeController,
                      JdeController, PolicyDeController, PolicySigmaController,
                      run_test_protocol)
from .policy import action_spec, load_checkpoint, save_checkpoint
from .ppo import TrainingInstability, train
from .stats import build_comparison, export_comparison_csv, export_comparison_json

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3
EXIT_BUDGET = 4


def cmd_list_functions(_args) -> int:
    for name, dim in registry_list():
        print(f"{name},{dim}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# train

def _write_training_log(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "episodes_done", "mean_return",
                         "policy_loss", "value_loss", "entropy"])
        for row in rows:
            writer.writerow([row["iteration"], row["episodes_done"],
                             repr(row["mean_return"]), repr(row["policy_loss"]),
                             repr(row["value_loss"]), repr(row["entropy"])])


def _write_episode_log(entries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["episode", "function", "dimension"])
        for i, (name, dim) in enumerate(entries):
            writer.writerow([i, name, dim])


def run_training(cfg: ExperimentConfig, out_dir: str) -> str:
    """Train with retry-on-instability; returns the checkpoint path."""
    os.makedirs(out_dir, exist_ok=True)
    save_config(cfg, os.path.join(out_dir, "config.json"))
    spec = action_spec(cfg.action)
    attempts_path = os.path.join(out_dir, "attempts.log")
    checkpoint_path = os.path.join(out_dir, "checkpoint.json")
    max_attempts = 1 + max(0, cfg.training.retries)

    with open(attempts_path, "w") as attempts:
        for attempt in range(1, max_attempts + 1):
            seed = cfg.seed + (attempt - 1)
            ppo_cfg = cfg.ppo
            if attempt > 1 and ppo_cfg.force_nan_at_iteration is not None:
                # the NaN-injection test hook only fires on the first attempt
                ppo_cfg = dataclasses.replace(ppo_cfg, force_nan_at_iteration=None)
            env_seed, train_seed = np.random.SeedSequence(seed).spawn(2)
            episode_cfg = EpisodeConfig(
                algorithm=cfg.algorithm,
                functions=cfg.function_set(),
                obs_spec=cfg.observation,
                action_spec=spec,
                generations=cfg.test.generations,
                population=cfg.test.population,
                sigma0=cfg.sigma0,
            )
            env = EvolutionEnv(episode_cfg, np.random.default_rng(env_seed))

            def checkpointer(iteration, policy, _value, _row):
                if (iteration + 1) % cfg.ppo.checkpoint_every == 0:
                    save_checkpoint(os.path.join(out_dir, f"checkpoint_iter{iteration}.json"),
                                    policy, cfg.action, cfg.observation)

            try:
                policy, _value, log_rows = train(env, ppo_cfg, cfg.training.episodes,
                                                 np.random.default_rng(train_seed),
                                                 on_iteration=checkpointer)
            except TrainingInstability as exc:
                attempts.write(f"attempt {attempt} seed {seed} unstable: {exc}\n")
                attempts.flush()
                _write_training_log([], os.path.join(out_dir, f"training_log_attempt{attempt}.csv"))
                continue
            attempts.write(f"attempt {attempt} seed {seed} ok\n")
            save_checkpoint(checkpoint_path, policy, cfg.action, cfg.observation)
            _write_training_log(log_rows, os.path.join(out_dir, "training_log.csv"))
            # the trailing reset opens an episode that never runs; drop it
            episodes_done = log_rows[-1]["episodes_done"] if log_rows else 0
            _write_episode_log(env.episode_log[:episodes_done],
                               os.path.join(out_dir, "episodes.csv"))
            return checkpoint_path
    raise TrainingInstability(f"training unstable after {max_attempts} attempts")


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    run_training(cfg, cfg.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate / compare helpers

def _controller_factory(algorithm: str, adaptation: str, checkpoint: str | None,
                        fixed_f: float, fixed_cr: float, fixed_sigma: float,
                        sigma0: float, fn_key: tuple):
    if adaptation == "policy":
        if checkpoint is None:
            raise ConfigError("--adaptation policy requires --checkpoint")
        policy, kind, obs_spec = load_checkpoint(checkpoint)
        spec = action_spec(kind)
        fn = get_function(*fn_key)
        if kind == "cma_sigma":
            if algorithm != "cmaes":
                raise ConfigError("checkpoint trained for cmaes, not de")
            return lambda: PolicySigmaController(policy, spec, obs_spec, fn.bounds_width)
        if algorithm != "de":
            raise ConfigError("checkpoint trained for de, not cmaes")
        return lambda: PolicyDeController(policy, spec, obs_spec, fn.bounds_width)
    if algorithm == "de":
        if adaptation == "ide":
            return IdeController
        if adaptation == "jde":
            return JdeController
        if adaptation == "fixed":
            return lambda: FixedDeController(fixed_f, fixed_cr)
        raise ConfigError(f"adaptation {adaptation!r} is not available for de")
    if algorithm == "cmaes":
        dim = fn_key[1]
        if adaptation == "csa":
            return lambda: CsaController(dim, sigma0=sigma0)
        if adaptation == "fixed":
            return lambda: FixedSigmaController(fixed_sigma)
        raise ConfigError(f"adaptation {adaptation!r} is not available for cmaes")
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def _infer_algorithm(args) -> str:
    if args.checkpoint:
        _policy, kind, _obs = load_checkpoint(args.checkpoint)
        return "cmaes" if kind == "cma_sigma" else "de"
    return args.algorithm


def cmd_evaluate(args) -> int:
    adaptation = args.adaptation
    if args.checkpoint and adaptation not in (None, "policy"):
        raise ConfigError("give either --checkpoint or a baseline --adaptation")
    if adaptation is None:
        adaptation = "policy" if args.checkpoint else "fixed"
    algorithm = _infer_algorithm(args)
    fn = get_function(args.function, args.dimension)
    fn_key = (fn.name, fn.dimension)
    factory = _controller_factory(algorithm, adaptation, args.checkpoint,
                                  args.fixed_f, args.fixed_cr, args.fixed_sigma,
                                  args.sigma0, fn_key)
    result = run_test_protocol(factory, fn_key, args.seed, runs=args.runs,
                               algorithm=algorithm, sigma0=args.sigma0, jobs=args.jobs)
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "metrics.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "auc", "best_of_run"])
        for i in range(len(result.traces)):
            writer.writerow([i, repr(float(result.aucs[i])), repr(float(result.bests[i]))])
    trace_dir = os.path.join(out_dir, f"{fn.name}_{fn.dimension}")
    for seed, trace in zip(result.seeds, result.traces):
        envloop.export_trace_csv(trace, os.path.join(trace_dir, f"run_{seed}.csv"))
    return EXIT_OK


def _parse_function_arg(value: str) -> tuple:
    try:
        name, dim = value.rsplit(":", 1)
        fn = get_function(name, int(dim))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad --function value {value!r} (expected NAME:DIM): {exc}") from exc
    return (fn.name, fn.dimension)


def cmd_compare(args) -> int:
    if not args.checkpoint:
        raise ConfigError("compare requires at least one --checkpoint variant")
    algorithm = None
    variants = []
    for path in args.checkpoint:
        _policy, kind, _obs = load_checkpoint(path)
        algo = "cmaes" if kind == "cma_sigma" else "de"
        if algorithm is None:
            algorithm = algo
        elif algorithm != algo:
            raise ConfigError("all compare variants must target the same algorithm")
        variants.append((os.path.splitext(os.path.basename(path))[0], path))

    opponent = args.adaptation or ("csa" if algorithm == "cmaes" else "jde")
    if args.function:
        functions = [_parse_function_arg(v) for v in args.function]
    else:
        functions = registry_list()

    def metrics_for(factory_builder, fn_key):
        factory = factory_builder(fn_key)
        result = run_test_protocol(factory, fn_key, args.seed, runs=args.runs,
                                   algorithm=algorithm, sigma0=args.sigma0, jobs=args.jobs)
        return result.aucs if args.metric == "auc" else result.bests

    opponent_metrics = {}
    for fn_key in functions:
        factory_builder = lambda key: _controller_factory(
            algorithm, opponent, None, args.fixed_f, args.fixed_cr,
            args.fixed_sigma, args.sigma0, key)
        opponent_metrics[fn_key] = metrics_for(factory_builder, fn_key)

    variant_metrics = {}
    for label, path in variants:
        per_fn = {}
        for fn_key in functions:
            try:
                builder = lambda key, p=path: _controller_factory(
                    algorithm, "policy", p, args.fixed_f, args.fixed_cr,
                    args.fixed_sigma, args.sigma0, key)
                per_fn[fn_key] = metrics_for(builder, fn_key)
            except (ValueError, ConfigError):
                pass  # cell stays absent -> "n/a"
        variant_metrics[label] = per_fn

    matrix = build_comparison(variant_metrics, opponent_metrics, functions)
    os.makedirs(args.out, exist_ok=True)
    export_comparison_csv(matrix, os.path.join(args.out, f"comparison_{args.metric}.csv"))
    export_comparison_json(matrix, os.path.join(args.out, f"comparison_{args.metric}.json"))
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evoadapt",
                                     description="Learned parameter adaptation for DE and CMA-ES")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list-functions", help="print the benchmark registry as name,dimension CSV")

    p_train = sub.add_parser("train", help="train an adaptation policy with PPO")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--seed", type=int, default=None)
    p_train.add_argument("--out", default=None)

    def add_eval_args(p, checkpoint_action="store"):
        p.add_argument("--checkpoint", default=None, action=checkpoint_action)
        p.add_argument("--adaptation", choices=["csa", "ide", "jde", "policy", "fixed"],
                       default=None)
        p.add_argument("--algorithm", choices=["de", "cmaes"], default="de")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--runs", type=int, default=50)
        p.add_argument("--fixed-f", type=float, default=0.5)
        p.add_argument("--fixed-cr", type=float, default=0.9)
        p.add_argument("--fixed-sigma", type=float, default=0.5)
        p.add_argument("--sigma0", type=float, default=0.5)
        p.add_argument("--out", default="results/evaluation")

    p_eval = sub.add_parser("evaluate", help="run the 50-run test protocol on one function")
    add_eval_args(p_eval)
    p_eval.add_argument("--function", required=True)
    p_eval.add_argument("--dimension", type=int, required=True)

    p_cmp = sub.add_parser("compare", help="win-probability matrix of policies vs a baseline")
    add_eval_args(p_cmp, checkpoint_action="append")
    p_cmp.add_argument("--metric", choices=["auc", "best"], default="best")
    p_cmp.add_argument("--function", action="append", default=None,
                       help="NAME:DIM, repeatable; default is the full registry")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "list-functions": cmd_list_functions,
        "train": cmd_train,
        "evaluate": cmd_evaluate,
        "compare": cmd_compare,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingInstability as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except BudgetExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
