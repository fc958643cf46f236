"""Benchmark objective functions with bounded domains and evaluation budgets.

The suite contains 46 entries built from 22 distinct functions following the
published BBOB/COCO definitions, with the instance transformations (optimum
shift, objective offset, rotations) set to identity/zero. Ten functions are
registered at 10 dimensions only; the remaining twelve are registered at 5,
10 and 20 dimensions. "CompositeGR", "GG101me" and "GG21hi" are interpreted
as BBOB f19 (composite Griewank-Rosenbrock), f21 (Gallagher 101 peaks) and
f22 (Gallagher 21 peaks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

LOWER = -5.0
UPPER = 5.0


class BudgetExhausted(Exception):
    """An evaluation would exceed the run's evaluation budget."""


@dataclass
class EvalBudget:
    max_evaluations: int
    used: int = 0

    @property
    def remaining(self) -> int:
        return self.max_evaluations - self.used

    def consume(self, n: int = 1) -> None:
        if self.used + n > self.max_evaluations:
            raise BudgetExhausted(
                f"budget of {self.max_evaluations} evaluations exhausted "
                f"({self.used} used, {n} requested)"
            )
        self.used += n


@dataclass(frozen=True)
class BenchmarkFunction:
    name: str
    dimension: int
    lower: np.ndarray
    upper: np.ndarray
    fn: Callable[[np.ndarray], float]

    @property
    def bounds_width(self) -> np.ndarray:
        return self.upper - self.lower


def evaluate(fn: BenchmarkFunction, x: np.ndarray, budget: EvalBudget | None = None) -> float:
    """Evaluate `fn` at `x`, consuming one unit of `budget` if given."""
    x = np.asarray(x, dtype=float)
    if x.shape != (fn.dimension,):
        raise ValueError(f"{fn.name}: expected vector of length {fn.dimension}, got shape {x.shape}")
    if budget is not None:
        budget.consume()
    return float(fn.fn(x))


def evaluate_population(fn: BenchmarkFunction, X: np.ndarray, budget: EvalBudget | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if budget is not None:
        budget.consume(len(X))
    return np.array([float(fn.fn(x)) for x in X])


# ---------------------------------------------------------------------------
# BBOB transformation helpers (rotations fixed to identity).

def _lambda_alpha(alpha: float, d: int) -> np.ndarray:
    if d == 1:
        return np.ones(1)
    return alpha ** (0.5 * np.arange(d) / (d - 1))


def _t_osz(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    x_hat = np.where(x == 0.0, 0.0, np.log(np.abs(np.where(x == 0.0, 1.0, x))))
    c1 = np.where(x > 0.0, 10.0, 5.5)
    c2 = np.where(x > 0.0, 7.9, 3.1)
    return np.sign(x) * np.exp(x_hat + 0.049 * (np.sin(c1 * x_hat) + np.sin(c2 * x_hat)))


def _t_asy(x: np.ndarray, beta: float) -> np.ndarray:
    d = len(x)
    idx = np.arange(d) / (d - 1) if d > 1 else np.ones(1)
    exp = 1.0 + beta * idx * np.sqrt(np.maximum(x, 0.0))
    return np.where(x > 0.0, np.power(np.maximum(x, 0.0), exp), x)


def _f_pen(x: np.ndarray) -> float:
    return float(np.sum(np.maximum(0.0, np.abs(x) - 5.0) ** 2))


# ---------------------------------------------------------------------------
# Function definitions (x_opt = 0 / canonical sign vector, f_opt = 0, R = Q = I).

def _sphere(d: int) -> Callable:
    return lambda x: float(np.sum(x ** 2))


def _ellipsoid(d: int) -> Callable:
    coeff = 10.0 ** (6.0 * np.arange(d) / (d - 1)) if d > 1 else np.ones(1)

    def f(x):
        z = _t_osz(x)
        return float(np.sum(coeff * z ** 2))

    return f


def _rastrigin(d: int) -> Callable:
    lam = _lambda_alpha(10.0, d)

    def f(x):
        z = lam * _t_asy(_t_osz(x), 0.2)
        return float(10.0 * (d - np.sum(np.cos(2 * np.pi * z))) + np.sum(z ** 2))

    return f


def _bueche_rastrigin(d: int) -> Callable:
    base = 10.0 ** (0.5 * np.arange(d) / (d - 1)) if d > 1 else np.ones(1)
    odd = np.arange(d) % 2 == 0  # BBOB's odd indices i=1,3,... in 1-based numbering

    def f(x):
        t = _t_osz(x)
        s = np.where((t > 0.0) & odd, 10.0 * base, base)
        z = s * t
        return float(10.0 * (d - np.sum(np.cos(2 * np.pi * z))) + np.sum(z ** 2) + 100.0 * _f_pen(x))

    return f


def _linear_slope(d: int) -> Callable:
    # optimum at the corner x_opt = 5 * ones; the shift cannot be removed here
    x_opt = 5.0 * np.ones(d)
    s = 10.0 ** (np.arange(d) / (d - 1)) if d > 1 else np.ones(1)

    def f(x):
        z = np.where(x_opt * x < 25.0, x, x_opt)
        return float(np.sum(5.0 * np.abs(s) - s * z))

    return f


def _attractive_sector(d: int) -> Callable:
    lam = _lambda_alpha(10.0, d)

    def f(x):
        z = lam * x
        s = np.where(z > 0.0, 100.0, 1.0)  # canonical +1 sign vector for x_opt
        return float(_t_osz(np.array([np.sum((s * z) ** 2)]))[0] ** 0.9)

    return f


def _step_ellipsoidal(d: int) -> Callable:
    lam = _lambda_alpha(10.0, d)
    coeff = 10.0 ** (2.0 * np.arange(d) / (d - 1)) if d > 1 else np.ones(1)

    def f(x):
        z_hat = lam * x
        z = np.where(np.abs(z_hat) > 0.5, np.floor(0.5 + z_hat), np.floor(0.5 + 10.0 * z_hat) / 10.0)
        return float(0.1 * max(np.abs(z_hat[0]) / 1e4, np.sum(coeff * z ** 2)) + _f_pen(x))

    return f


def _rosenbrock(d: int) -> Callable:
    scale = max(1.0, math.sqrt(d) / 8.0)

    def f(x):
        z = scale * x + 1.0
        return float(np.sum(100.0 * (z[:-1] ** 2 - z[1:]) ** 2 + (z[:-1] - 1.0) ** 2))

    return f


def _rosenbrock_rotated(d: int) -> Callable:
    scale = max(1.0, math.sqrt(d) / 8.0)

    def f(x):
        z = scale * x + 0.5
        return float(np.sum(100.0 * (z[:-1] ** 2 - z[1:]) ** 2 + (z[:-1] - 1.0) ** 2))

    return f


def _discus(d: int) -> Callable:
    def f(x):
        z = _t_osz(x)
        return float(1e6 * z[0] ** 2 + np.sum(z[1:] ** 2))

    return f


def _bent_cigar(d: int) -> Callable:
    def f(x):
        z = _t_asy(x, 0.5)
        return float(z[0] ** 2 + 1e6 * np.sum(z[1:] ** 2))

    return f


def _sharp_ridge(d: int) -> Callable:
    lam = _lambda_alpha(10.0, d)

    def f(x):
        z = lam * x
        return float(z[0] ** 2 + 100.0 * math.sqrt(np.sum(z[1:] ** 2)))

    return f


def _different_powers(d: int) -> Callable:
    exps = 2.0 + (4.0 * np.arange(d) / (d - 1) if d > 1 else np.zeros(1))

    def f(x):
        return float(math.sqrt(np.sum(np.abs(x) ** exps)))

    return f


def _weierstrass(d: int) -> Callable:
    lam = _lambda_alpha(0.01, d)
    k = np.arange(12)
    half_pow = 0.5 ** k
    three_pow = 3.0 ** k
    f0 = float(np.sum(half_pow * np.cos(2 * np.pi * three_pow * 0.5)))

    def f(x):
        z = lam * _t_osz(x)
        inner = np.sum(half_pow[None, :] * np.cos(2 * np.pi * three_pow[None, :] * (z[:, None] + 0.5)), axis=1)
        return float(10.0 * (np.mean(inner) - f0) ** 3 + 10.0 / d * _f_pen(x))

    return f


def _schaffers(alpha: float):
    def make(d: int) -> Callable:
        lam = _lambda_alpha(alpha, d)

        def f(x):
            z = lam * _t_asy(x, 0.5)
            s = np.sqrt(z[:-1] ** 2 + z[1:] ** 2)
            term = np.sqrt(s) + np.sqrt(s) * np.sin(50.0 * s ** 0.2) ** 2
            return float((np.sum(term) / (d - 1)) ** 2 + 10.0 * _f_pen(x))

        return f

    return make


def _composite_gr(d: int) -> Callable:
    scale = max(1.0, math.sqrt(d) / 8.0)

    def f(x):
        z = scale * x + 0.5
        s = 100.0 * (z[:-1] ** 2 - z[1:]) ** 2 + (z[:-1] - 1.0) ** 2
        return float(10.0 / (d - 1) * np.sum(s / 4000.0 - np.cos(s)) + 10.0)

    return f


def _schwefel(d: int) -> Callable:
    x_opt = 0.5 * 4.2096874633 * np.ones(d)
    lam = _lambda_alpha(10.0, d)

    def f(x):
        x_hat = 2.0 * x  # canonical +1 sign vector
        z_hat = x_hat.copy()
        z_hat[1:] = x_hat[1:] + 0.25 * (x_hat[:-1] - 2.0 * np.abs(x_opt[:-1]))
        z = 100.0 * (lam * (z_hat - 2.0 * np.abs(x_opt)) + 2.0 * np.abs(x_opt))
        return float(
            -np.sum(z * np.sin(np.sqrt(np.abs(z)))) / (100.0 * d)
            + 4.189828872724339
            + 100.0 * _f_pen(z / 100.0)
        )

    return f


def _katsuura(d: int) -> Callable:
    lam = _lambda_alpha(100.0, d)
    j = np.arange(1, 33)
    two_j = 2.0 ** j

    def f(x):
        z = lam * x
        frac = np.abs(two_j[None, :] * z[:, None] - np.round(two_j[None, :] * z[:, None])) / two_j[None, :]
        terms = 1.0 + (np.arange(1, d + 1)) * np.sum(frac, axis=1)
        prod = np.prod(terms ** (10.0 / d ** 1.2))
        return float(10.0 / d ** 2 * prod - 10.0 / d ** 2 + _f_pen(x))

    return f


def _lunacek_bi_rastrigin(d: int) -> Callable:
    mu0 = 2.5
    s = 1.0 - 1.0 / (2.0 * math.sqrt(d + 20.0) - 8.2)
    mu1 = -math.sqrt((mu0 ** 2 - 1.0) / s)
    lam = _lambda_alpha(100.0, d)

    def f(x):
        x_hat = 2.0 * x  # canonical +1 sign vector
        z = lam * (x_hat - mu0)
        first = np.sum((x_hat - mu0) ** 2)
        second = d + s * np.sum((x_hat - mu1) ** 2)
        return float(min(first, second) + 10.0 * (d - np.sum(np.cos(2 * np.pi * z))) + 1e4 * _f_pen(x))

    return f


def _gallagher(n_peaks: int, seed: int):
    def make(d: int) -> Callable:
        # deterministic peak layout; the global-optimum peak sits at the origin
        rng = np.random.default_rng([seed, n_peaks, d])
        centers = rng.uniform(-4.9, 4.9, size=(n_peaks, d))
        centers[0] = 0.0
        w = np.empty(n_peaks)
        w[0] = 10.0
        w[1:] = 1.1 + 8.0 * np.arange(n_peaks - 1) / (n_peaks - 2)
        if n_peaks == 101:
            alphas = 1000.0 ** (2.0 * rng.permutation(n_peaks - 1) / (n_peaks - 2))
            alpha0 = 1000.0
        else:
            alphas = 1000.0 ** (2.0 * rng.permutation(n_peaks - 1) / (n_peaks - 2))
            alpha0 = 1000.0 ** 2
        scales = np.empty((n_peaks, d))
        scales[0] = _lambda_alpha(alpha0, d) ** 2 / alpha0 ** 0.25
        for i in range(1, n_peaks):
            a = alphas[i - 1]
            diag = _lambda_alpha(a, d) ** 2 / a ** 0.25
            scales[i] = rng.permutation(diag)

        def f(x):
            diff = x[None, :] - centers
            quad = np.sum(diff ** 2 * scales, axis=1)
            val = np.max(w * np.exp(-quad / (2.0 * d)))
            return float(_t_osz(np.array([10.0 - val]))[0] ** 2 + _f_pen(x))

        return f

    return make


# ---------------------------------------------------------------------------
# Registry.

_TEN_D_ONLY = [
    ("BentCigar", _bent_cigar),
    ("Discus", _discus),
    ("Ellipsoid", _ellipsoid),
    ("Katsuura", _katsuura),
    ("Rastrigin", _rastrigin),
    ("Rosenbrock", _rosenbrock),
    ("Schaffers", _schaffers(10.0)),
    ("Schwefel", _schwefel),
    ("Sphere", _sphere),
    ("Weierstrass", _weierstrass),
]

_MULTI_DIM = [
    ("AttractiveSector", _attractive_sector),
    ("BuecheRastrigin", _bueche_rastrigin),
    ("CompositeGR", _composite_gr),
    ("DifferentPowers", _different_powers),
    ("LinearSlope", _linear_slope),
    ("SharpRidge", _sharp_ridge),
    ("StepEllipsoidal", _step_ellipsoidal),
    ("RosenbrockRotated", _rosenbrock_rotated),
    ("SchaffersIllConditioned", _schaffers(1000.0)),
    ("LunacekBiR", _lunacek_bi_rastrigin),
    ("GG101me", _gallagher(101, 2101)),
    ("GG21hi", _gallagher(21, 2102)),
]


def _build_registry() -> dict[tuple[str, int], BenchmarkFunction]:
    registry: dict[tuple[str, int], BenchmarkFunction] = {}

    def add(name: str, d: int, builder) -> None:
        registry[(name.lower(), d)] = BenchmarkFunction(
            name=name,
            dimension=d,
            lower=np.full(d, LOWER),
            upper=np.full(d, UPPER),
            fn=builder(d),
        )

    for name, builder in _TEN_D_ONLY:
        add(name, 10, builder)
    for name, builder in _MULTI_DIM:
        for d in (5, 10, 20):
            add(name, d, builder)
    return registry


_REGISTRY = _build_registry()
_ORDER = [(name, 10) for name, _ in _TEN_D_ONLY] + [
    (name, d) for name, _ in _MULTI_DIM for d in (5, 10, 20)
]


def registry_list() -> list[tuple[str, int]]:
    """All 46 (name, dimension) pairs in registration order."""
    return list(_ORDER)


def get_function(name: str, dimension: int) -> BenchmarkFunction:
    key = (name.lower(), int(dimension))
    if key not in _REGISTRY:
        raise KeyError(f"unknown benchmark function {name!r} in dimension {dimension}")
    return _REGISTRY[key]
