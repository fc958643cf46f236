"""Policy network, action spaces and parameter decoding.

The network is a plain fully connected net (default in -> 50 -> 50 -> out)
with a state-independent log-std head for the Gaussian policy. Forward and
backward passes are implemented directly on numpy arrays so the trainer can
check its analytic gradients against finite differences.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .observe import ObservationSpec

LOG_2PI = math.log(2.0 * math.pi)

SIGMA_MIN, SIGMA_MAX = 1e-10, 3.0


# ---------------------------------------------------------------------------
# Action spaces

@dataclass(frozen=True)
class ActionSpec:
    kind: str
    lower: np.ndarray
    upper: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.lower)

    def clip(self, values: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(values, dtype=float), self.lower, self.upper)

    def normalize(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.lower) / (self.upper - self.lower)

    def neutral(self) -> np.ndarray:
        return (self.lower + self.upper) / 2.0


_ACTION_BOUNDS = {
    "cma_sigma": ([SIGMA_MIN], [SIGMA_MAX]),
    "de_direct": ([0.0, 0.0], [2.0, 1.0]),                      # F, CR
    "de_normal": ([0.0, 0.0, 0.0, 0.0], [2.0, 1.0, 1.0, 1.0]),  # muF, sdF, muCR, sdCR
    "de_uniform": ([0.0, 0.0, 0.0, 0.0], [2.0, 2.0, 1.0, 1.0]),  # Fmin, Fmax, CRmin, CRmax
}


def action_spec(kind: str) -> ActionSpec:
    if kind not in _ACTION_BOUNDS:
        raise KeyError(f"unknown action space {kind!r}; choose from {sorted(_ACTION_BOUNDS)}")
    lo, hi = _ACTION_BOUNDS[kind]
    return ActionSpec(kind=kind, lower=np.array(lo), upper=np.array(hi))


# ---------------------------------------------------------------------------
# Fully connected network with manual backprop

class Mlp:
    def __init__(self, sizes: list[int], activation: str = "relu",
                 rng: np.random.Generator | None = None, last_layer_scale: float = 0.01):
        if activation not in ("relu", "tanh"):
            raise ValueError(f"unknown activation {activation!r}")
        self.sizes = list(sizes)
        self.activation = activation
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for li, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            if rng is None:
                w = np.zeros((n_out, n_in))
            else:
                scale = math.sqrt(2.0 / n_in) if activation == "relu" else math.sqrt(1.0 / n_in)
                w = rng.standard_normal((n_out, n_in)) * scale
                if li == len(sizes) - 2:
                    w *= last_layer_scale
            self.weights.append(w)
            self.biases.append(np.zeros(n_out))

    def _act(self, z: np.ndarray) -> np.ndarray:
        return np.maximum(z, 0.0) if self.activation == "relu" else np.tanh(z)

    def _act_grad(self, z: np.ndarray, a: np.ndarray) -> np.ndarray:
        return (z > 0.0).astype(float) if self.activation == "relu" else 1.0 - a ** 2

    def forward(self, x: np.ndarray) -> np.ndarray:
        single = np.ndim(x) == 1
        out, _ = self.forward_cache(np.atleast_2d(np.asarray(x, dtype=float)))
        return out[0] if single else out

    def forward_cache(self, X: np.ndarray):
        """Batched forward pass returning output and the activations cache."""
        a = np.asarray(X, dtype=float)
        pre, post = [], [a]
        n_layers = len(self.weights)
        for li, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            pre.append(z)
            a = z if li == n_layers - 1 else self._act(z)  # linear output layer
            post.append(a)
        return a, (pre, post)

    def backward(self, cache, grad_out: np.ndarray):
        """Backprop `grad_out` (dLoss/dOutput, shape (B, out)) to weight grads."""
        pre, post = cache
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        delta = np.asarray(grad_out, dtype=float)
        for li in reversed(range(len(self.weights))):
            grads_w[li] = delta.T @ post[li]
            grads_b[li] = delta.sum(axis=0)
            if li > 0:
                delta = (delta @ self.weights[li]) * self._act_grad(pre[li - 1], post[li])
        return grads_w, grads_b

    def params(self) -> list[np.ndarray]:
        return self.weights + self.biases

    def has_nan(self) -> bool:
        return any(not np.all(np.isfinite(p)) for p in self.params())


class PolicyNet:
    """Gaussian policy: MLP mean head plus state-independent log-std."""

    def __init__(self, in_dim: int, action_dim: int, hidden=(50, 50), activation: str = "relu",
                 rng: np.random.Generator | None = None, log_std_init: float = 0.0):
        self.mlp = Mlp([in_dim, *hidden, action_dim], activation=activation, rng=rng)
        self.log_std = np.full(action_dim, float(log_std_init))

    @property
    def in_dim(self) -> int:
        return self.mlp.sizes[0]

    @property
    def action_dim(self) -> int:
        return self.mlp.sizes[-1]

    def forward(self, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        obs = np.asarray(obs, dtype=float)
        expected = self.in_dim
        if obs.shape[-1] != expected:
            raise ValueError(f"observation length {obs.shape[-1]} != input size {expected}")
        return self.mlp.forward(obs), self.log_std.copy()

    def params(self) -> list[np.ndarray]:
        return self.mlp.params() + [self.log_std]

    def has_nan(self) -> bool:
        return self.mlp.has_nan() or not np.all(np.isfinite(self.log_std))


# ---------------------------------------------------------------------------
# Sampling and decoding

def gaussian_log_prob(raw: np.ndarray, mean: np.ndarray, log_std: np.ndarray) -> np.ndarray:
    raw = np.asarray(raw, dtype=float)
    std = np.exp(log_std)
    z = (raw - mean) / std
    return np.sum(-0.5 * z ** 2 - log_std - 0.5 * LOG_2PI, axis=-1)


def sample_action(mean: np.ndarray, log_std: np.ndarray, spec: ActionSpec,
                  rng: np.random.Generator, stochastic: bool = True):
    """Draw (or take) the raw action, clip into bounds, return its log-prob."""
    if stochastic:
        raw = mean + np.exp(log_std) * rng.standard_normal(spec.dim)
    else:
        raw = np.asarray(mean, dtype=float).copy()
    logp = float(gaussian_log_prob(raw, mean, log_std))
    return spec.clip(raw), raw, logp


def decode_de_params(action: np.ndarray, spec: ActionSpec, np_: int,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Per-individual (F, CR) from a clipped action vector."""
    action = np.asarray(action, dtype=float)
    if spec.kind == "de_direct":
        return np.full(np_, action[0]), np.full(np_, action[1])
    if spec.kind == "de_normal":
        F = rng.normal(action[0], action[1], size=np_)
        CR = rng.normal(action[2], action[3], size=np_)
        return np.clip(F, 0.0, 2.0), np.clip(CR, 0.0, 1.0)
    if spec.kind == "de_uniform":
        f_lo, f_hi = sorted((action[0], action[1]))
        cr_lo, cr_hi = sorted((action[2], action[3]))
        return rng.uniform(f_lo, f_hi, size=np_), rng.uniform(cr_lo, cr_hi, size=np_)
    raise ValueError(f"action space {spec.kind!r} does not parameterize DE")


def decode_sigma(action: np.ndarray) -> float:
    return float(np.clip(np.asarray(action, dtype=float)[0], SIGMA_MIN, SIGMA_MAX))


# ---------------------------------------------------------------------------
# Checkpoints

def save_checkpoint(path, policy: PolicyNet, action_kind: str, obs_spec: ObservationSpec) -> None:
    doc = {
        "architecture": {"sizes": policy.mlp.sizes, "activation": policy.mlp.activation},
        "action_kind": action_kind,
        "observation": {
            "history_length": obs_spec.history_length,
            "include_intra_df": obs_spec.include_intra_df,
            "include_inter_dx": obs_spec.include_inter_dx,
            "include_intra_dx": obs_spec.include_intra_dx,
        },
        "log_std": policy.log_std.tolist(),
        "layers": [
            {"weights": w.tolist(), "bias": b.tolist()}
            for w, b in zip(policy.mlp.weights, policy.mlp.biases)
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_checkpoint(path) -> tuple[PolicyNet, str, ObservationSpec]:
    with open(path) as fh:
        doc = json.load(fh)
    try:
        sizes = doc["architecture"]["sizes"]
        activation = doc["architecture"]["activation"]
        kind = doc["action_kind"]
        obs = doc["observation"]
        obs_spec = ObservationSpec(
            history_length=obs["history_length"],
            include_intra_df=obs["include_intra_df"],
            include_inter_dx=obs["include_inter_dx"],
            include_intra_dx=obs["include_intra_dx"],
        )
        policy = PolicyNet(sizes[0], sizes[-1], hidden=tuple(sizes[1:-1]), activation=activation)
        policy.log_std = np.array(doc["log_std"], dtype=float)
        for li, layer in enumerate(doc["layers"]):
            w = np.array(layer["weights"], dtype=float)
            b = np.array(layer["bias"], dtype=float)
            if w.shape != policy.mlp.weights[li].shape or b.shape != policy.mlp.biases[li].shape:
                raise ValueError("layer shape mismatch")
            policy.mlp.weights[li] = w
            policy.mlp.biases[li] = b
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ValueError(f"corrupted or incompatible checkpoint {path}: {exc}") from exc
    if action_spec(kind).dim != policy.action_dim:
        raise ValueError(f"checkpoint output size {policy.action_dim} does not match "
                         f"action space {kind!r}")
    return policy, kind, obs_spec
