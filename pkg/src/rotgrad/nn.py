"""Minimal dense network with hand-written forward/backward and Adam.

Only what the desk-scale experiments need: a stack of affine layers with a
leaky rectifier (slope 0.01) on the hidden ones, a linear output, explicit
gradient propagation from an injected output gradient, and a standard Adam
update.  Parameter gradients are plain sums over the batch rows; callers
that want mean-over-batch semantics scale the output gradient by 1/B.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

LEAKY_SLOPE = 0.01
CHECKPOINT_VERSION = 1


@dataclass
class Mlp:
    """Affine layers; weights[i] is (fan_in, fan_out), biases[i] is (fan_out,)."""
    weights: list
    biases: list

    @property
    def layer_sizes(self) -> list:
        return [w.shape[0] for w in self.weights] + [self.weights[-1].shape[1]]


class ForwardCache(NamedTuple):
    activations: list  # layer inputs, activations[0] is the network input
    pre: list          # pre-activation values per layer


def init_mlp(layer_sizes, rng: np.random.Generator) -> Mlp:
    """Uniform init in +-sqrt(6 / (fan_in + fan_out)); zero biases."""
    if len(layer_sizes) < 2 or any(n <= 0 for n in layer_sizes):
        raise ValueError(f"need at least two positive layer sizes, got {layer_sizes}")
    weights, biases = [], []
    for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        a = np.sqrt(6.0 / (n_in + n_out))
        weights.append(rng.uniform(-a, a, (n_in, n_out)))
        biases.append(np.zeros(n_out))
    return Mlp(weights, biases)


def forward(mlp: Mlp, x) -> tuple:
    """Batch forward pass; returns (output, cache for backward)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != mlp.weights[0].shape[0]:
        raise ValueError(f"expected (B, {mlp.weights[0].shape[0]}) input, got {x.shape}")
    activations, pre = [x], []
    h = x
    last = len(mlp.weights) - 1
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        z = h @ w + b
        pre.append(z)
        h = z if i == last else np.where(z > 0.0, z, LEAKY_SLOPE * z)
        activations.append(h)
    return h, ForwardCache(activations, pre)


def backward(mlp: Mlp, cache: ForwardCache, output_gradient) -> tuple:
    """Propagate an output-space gradient to (weight grads, bias grads).

    Gradients are summed over the batch: for a single linear layer the
    weight gradient is exactly input^T @ output_gradient.
    """
    g = np.asarray(output_gradient, dtype=np.float64)
    if g.shape != cache.activations[-1].shape:
        raise ValueError(f"output gradient shape {g.shape} != output shape "
                         f"{cache.activations[-1].shape}")
    n = len(mlp.weights)
    dws, dbs = [None] * n, [None] * n
    for i in range(n - 1, -1, -1):
        dws[i] = cache.activations[i].T @ g
        dbs[i] = g.sum(axis=0)
        if i > 0:
            g = g @ mlp.weights[i].T
            z = cache.pre[i - 1]
            g = np.where(z > 0.0, g, LEAKY_SLOPE * g)
    return dws, dbs


@dataclass
class AdamState:
    m: list
    v: list
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_init(params, lr: float = 1e-3) -> AdamState:
    return AdamState(m=[np.zeros_like(p) for p in params],
                     v=[np.zeros_like(p) for p in params], lr=lr)


def adam_step(state: AdamState, params, grads) -> list:
    """One bias-corrected Adam update; mutates the moment accumulators."""
    if not (len(params) == len(grads) == len(state.m)):
        raise ValueError("params, grads and optimizer state must align")
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    out = []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        out.append(p - state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps))
    return out


def save_checkpoint(path, mlp: Mlp) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "layer_sizes": [int(n) for n in mlp.layer_sizes],
        "weights": [w.tolist() for w in mlp.weights],
        "biases": [b.tolist() for b in mlp.biases],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_checkpoint(path) -> Mlp:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')!r}")
    sizes = payload["layer_sizes"]
    weights = [np.asarray(w, dtype=np.float64) for w in payload["weights"]]
    biases = [np.asarray(b, dtype=np.float64) for b in payload["biases"]]
    expected = list(zip(sizes[:-1], sizes[1:]))
    if [w.shape for w in weights] != expected or [b.shape for b in biases] != [(n,) for _, n in expected]:
        raise ValueError("checkpoint arrays do not match the declared layer sizes")
    return Mlp(weights, biases)
