"""Minimal dense network with manual backprop, Adam, and soft target updates.

ReLU hidden layers, linear output (Q-values are unbounded).  Everything
is double precision and pure: forward / gradients / adam_step take and
return explicit state, so a single seed makes training fully
deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class ShapeMismatch(Exception):
    pass


@dataclass
class NetworkParams:
    weights: list[np.ndarray]  # weights[l] has shape (sizes[l], sizes[l+1])
    biases: list[np.ndarray]

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


@dataclass
class AdamState:
    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lr: float = 0.0003

    @classmethod
    def for_params(cls, params: NetworkParams, lr: float = 0.0003) -> "AdamState":
        return cls(
            m_w=[np.zeros_like(w) for w in params.weights],
            v_w=[np.zeros_like(w) for w in params.weights],
            m_b=[np.zeros_like(b) for b in params.biases],
            v_b=[np.zeros_like(b) for b in params.biases],
            lr=lr,
        )


def init_network(sizes: list[int], rng: np.random.Generator) -> NetworkParams:
    """Glorot-uniform weights, zero biases."""
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return NetworkParams(weights=weights, biases=biases)


def forward(params: NetworkParams, inputs: np.ndarray) -> tuple[np.ndarray, list]:
    """Batch forward pass; the cache holds per-layer inputs and
    pre-activations for the backward pass."""
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    if x.shape[1] != params.weights[0].shape[0]:
        raise ShapeMismatch(
            f"input width {x.shape[1]} != first layer {params.weights[0].shape[0]}"
        )
    cache = []
    a = x
    last = len(params.weights) - 1
    for l, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w + b
        cache.append((a, z))
        a = z if l == last else np.maximum(z, 0.0)
    return a, cache


def gradients(
    params: NetworkParams,
    cache: list,
    action_indices: np.ndarray,
    td_errors: np.ndarray,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Gradient of the mean squared TD error w.r.t. all parameters.

    Only the taken action's output contributes per sample.  With
    td = target - Q(s, a), d loss / d Q(s, a) = -2 td / K.
    """
    actions = np.asarray(action_indices, dtype=int)
    td = np.asarray(td_errors, dtype=float)
    k = td.shape[0]
    if actions.shape[0] != k:
        raise ShapeMismatch("action_indices and td_errors disagree on batch size")
    out_dim = params.weights[-1].shape[1]
    delta = np.zeros((k, out_dim))
    delta[np.arange(k), actions] = -2.0 * td / k
    grad_w: list[np.ndarray] = [None] * len(params.weights)
    grad_b: list[np.ndarray] = [None] * len(params.biases)
    for l in range(len(params.weights) - 1, -1, -1):
        a_in, z = cache[l]
        grad_w[l] = a_in.T @ delta
        grad_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ params.weights[l].T) * (cache[l][0] > 0.0)
            # cache[l][0] is the post-ReLU activation of layer l-1;
            # its positive mask equals the ReLU derivative mask
    return grad_w, grad_b


def adam_step(
    params: NetworkParams,
    grads: tuple[list[np.ndarray], list[np.ndarray]],
    adam: AdamState,
) -> NetworkParams:
    """One Adam update with bias correction; mutates `adam`, returns new params."""
    grad_w, grad_b = grads
    adam.t += 1
    b1, b2 = adam.beta1, adam.beta2
    corr1 = 1.0 - b1 ** adam.t
    corr2 = 1.0 - b2 ** adam.t
    new_w = []
    new_b = []
    for l, (w, b) in enumerate(zip(params.weights, params.biases)):
        if grad_w[l].shape != w.shape or grad_b[l].shape != b.shape:
            raise ShapeMismatch(f"gradient shape mismatch at layer {l}")
        adam.m_w[l] = b1 * adam.m_w[l] + (1 - b1) * grad_w[l]
        adam.v_w[l] = b2 * adam.v_w[l] + (1 - b2) * grad_w[l] ** 2
        adam.m_b[l] = b1 * adam.m_b[l] + (1 - b1) * grad_b[l]
        adam.v_b[l] = b2 * adam.v_b[l] + (1 - b2) * grad_b[l] ** 2
        m_hat_w = adam.m_w[l] / corr1
        v_hat_w = adam.v_w[l] / corr2
        m_hat_b = adam.m_b[l] / corr1
        v_hat_b = adam.v_b[l] / corr2
        new_w.append(w - adam.lr * m_hat_w / (np.sqrt(v_hat_w) + adam.eps))
        new_b.append(b - adam.lr * m_hat_b / (np.sqrt(v_hat_b) + adam.eps))
    return NetworkParams(weights=new_w, biases=new_b)


def soft_update(target: NetworkParams, evaluation: NetworkParams, tau: float) -> NetworkParams:
    """theta_target <- tau * theta_eval + (1 - tau) * theta_target."""
    if [w.shape for w in target.weights] != [w.shape for w in evaluation.weights]:
        raise ShapeMismatch("target and evaluation networks disagree on shapes")
    return NetworkParams(
        weights=[tau * e + (1.0 - tau) * t for t, e in zip(target.weights, evaluation.weights)],
        biases=[tau * e + (1.0 - tau) * t for t, e in zip(target.biases, evaluation.biases)],
    )


CHECKPOINT_VERSION = 1


def save_checkpoint(
    path,
    params: NetworkParams,
    adam: AdamState | None = None,
    seed: int | None = None,
) -> None:
    """JSON checkpoint; full-precision float repr makes it byte-stable."""
    doc = {
        "version": CHECKPOINT_VERSION,
        "sizes": params.sizes,
        "weights": [w.tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
        "seed": seed,
    }
    if adam is not None:
        doc["adam"] = {
            "m_w": [m.tolist() for m in adam.m_w],
            "v_w": [v.tolist() for v in adam.v_w],
            "m_b": [m.tolist() for m in adam.m_b],
            "v_b": [v.tolist() for v in adam.v_b],
            "t": adam.t,
            "beta1": adam.beta1,
            "beta2": adam.beta2,
            "eps": adam.eps,
            "lr": adam.lr,
        }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_checkpoint(path) -> tuple[NetworkParams, AdamState | None, int | None]:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')}")
    params = NetworkParams(
        weights=[np.array(w) for w in doc["weights"]],
        biases=[np.array(b) for b in doc["biases"]],
    )
    adam = None
    if "adam" in doc:
        a = doc["adam"]
        adam = AdamState(
            m_w=[np.array(m) for m in a["m_w"]],
            v_w=[np.array(v) for v in a["v_w"]],
            m_b=[np.array(m) for m in a["m_b"]],
            v_b=[np.array(v) for v in a["v_b"]],
            t=a["t"],
            beta1=a["beta1"],
            beta2=a["beta2"],
            eps=a["eps"],
            lr=a["lr"],
        )
    return params, adam, doc.get("seed")
