"""From-scratch dense MLP engine.

Forward pass, ReLU / sigmoid / identity activations, MAE and binary
cross-entropy losses, exact reverse-mode gradients, Adam updates,
finite-difference gradient checking, and a byte-exact text model format.

Only numpy; no autodiff framework. A layer computes
``activation(bias + weights @ x)`` with weights stored (out, in).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import errors

PROB_CLAMP = 1e-7
MODEL_FORMAT = "mlp-text 1"


class Activation(Enum):
    ReLU = "relu"
    Identity = "identity"
    Sigmoid = "sigmoid"


class Loss(Enum):
    MAE = "mae"
    BCE = "bce"


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: Activation

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float)
        if self.weights.ndim != 2:
            raise ValueError("weights must be a matrix")
        if self.bias.shape != (self.weights.shape[0],):
            raise ValueError(
                f"bias shape {self.bias.shape} does not match {self.weights.shape[0]} outputs"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("parameters must be finite")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class MLP:
    layers: list[DenseLayer]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("at least one layer required")
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_dim != b.in_dim:
                raise ValueError(
                    f"layer dims do not chain: {a.out_dim} -> {b.in_dim}"
                )

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def parameters(self) -> list[np.ndarray]:
        params = []
        for layer in self.layers:
            params.append(layer.weights)
            params.append(layer.bias)
        return params

    def set_parameters(self, params: list[np.ndarray]) -> None:
        if len(params) != 2 * len(self.layers):
            raise errors.ShapeMismatch(
                f"expected {2 * len(self.layers)} parameter arrays, got {len(params)}"
            )
        for i, layer in enumerate(self.layers):
            w, b = params[2 * i], params[2 * i + 1]
            if w.shape != layer.weights.shape or b.shape != layer.bias.shape:
                raise errors.ShapeMismatch(f"layer {i} parameter shapes do not match")
            layer.weights = w
            layer.bias = b


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    seed: int
    loss: Loss
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must be in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0


def init_adam_state(params: list[np.ndarray]) -> AdamState:
    return AdamState(
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
        t=0,
    )


def relu(x: float) -> float:
    """max(0, x)."""
    return max(0.0, x)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _activate(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.ReLU:
        return np.maximum(z, 0.0)
    if activation is Activation.Sigmoid:
        return _sigmoid(z)
    return z


def _activation_grad(z: np.ndarray, activation: Activation) -> np.ndarray:
    # ReLU subgradient at exactly 0 is taken as 0.
    if activation is Activation.ReLU:
        return (z > 0.0).astype(float)
    if activation is Activation.Sigmoid:
        s = _sigmoid(z)
        return s * (1.0 - s)
    return np.ones_like(z)


def _as_batch(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim == 2:
        return arr, False
    raise errors.DimensionMismatch(f"input must be 1-D or 2-D, got shape {arr.shape}")


def _forward_trace(model: MLP, X: np.ndarray):
    """All pre-activations and activations, input first."""
    zs = []
    acts = [X]
    a = X
    for layer in model.layers:
        z = a @ layer.weights.T + layer.bias
        a = _activate(z, layer.activation)
        zs.append(z)
        acts.append(a)
    return zs, acts


def forward(model: MLP, x) -> np.ndarray:
    """Deterministic forward pass; accepts one vector or a batch matrix."""
    X, single = _as_batch(x)
    if X.shape[1] != model.in_dim:
        raise errors.DimensionMismatch(
            f"input has {X.shape[1]} features, model expects {model.in_dim}"
        )
    _, acts = _forward_trace(model, X)
    out = acts[-1]
    return out[0] if single else out


def _check_same_length(pred, truth) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.shape != t.shape:
        raise errors.DimensionMismatch(f"shapes differ: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise errors.DimensionMismatch("empty prediction")
    return p, t


def mae_loss(pred, truth) -> float:
    """Mean absolute error."""
    p, t = _check_same_length(pred, truth)
    return float(np.mean(np.abs(p - t)))


def mae_grad(pred, truth) -> np.ndarray:
    """d mae / d pred: sign(pred - truth) / N, zero at ties."""
    p, t = _check_same_length(pred, truth)
    return np.sign(p - t) / p.size


def _clamp_probs(p: np.ndarray) -> np.ndarray:
    return np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)


def bce_loss(pred, truth) -> float:
    """Binary cross-entropy with natural log.

    Predictions are clamped into [1e-7, 1 - 1e-7] before the logs, so a
    fully wrong saturated prediction stays finite.
    """
    p, y = _check_same_length(pred, truth)
    ph = _clamp_probs(p)
    return float(np.mean(-(y * np.log(ph) + (1.0 - y) * np.log(1.0 - ph))))


def bce_grad(pred, truth) -> np.ndarray:
    """d bce / d pred, zero where the clamp is active."""
    p, y = _check_same_length(pred, truth)
    ph = _clamp_probs(p)
    grad = (-(y / ph) + (1.0 - y) / (1.0 - ph)) / p.size
    active = (p >= PROB_CLAMP) & (p <= 1.0 - PROB_CLAMP)
    return grad * active


def loss_value(loss: Loss, pred, truth) -> float:
    return mae_loss(pred, truth) if loss is Loss.MAE else bce_loss(pred, truth)


def _loss_grad(loss: Loss, pred, truth) -> np.ndarray:
    return mae_grad(pred, truth) if loss is Loss.MAE else bce_grad(pred, truth)


def backward(model: MLP, x, truth, loss: Loss) -> list[np.ndarray]:
    """Exact reverse-mode gradients of the loss for every parameter.

    Returns arrays in model.parameters() order (weights, bias per layer).
    The loss is the mean over every entry of the (possibly batched)
    prediction, so a batch gradient equals the average of the per-sample
    gradients.
    """
    X, _ = _as_batch(x)
    if X.shape[1] != model.in_dim:
        raise errors.DimensionMismatch(
            f"input has {X.shape[1]} features, model expects {model.in_dim}"
        )
    T, _ = _as_batch(truth)
    zs, acts = _forward_trace(model, X)
    pred = acts[-1]
    if pred.shape != T.shape:
        raise errors.DimensionMismatch(
            f"truth shape {T.shape} does not match prediction {pred.shape}"
        )
    delta = _loss_grad(loss, pred, T)
    grads: list[np.ndarray] = []
    for i in reversed(range(len(model.layers))):
        layer = model.layers[i]
        delta = delta * _activation_grad(zs[i], layer.activation)
        grads.insert(0, delta.sum(axis=0))  # bias
        grads.insert(0, delta.T @ acts[i])  # weights
        if i > 0:
            delta = delta @ layer.weights
    return grads


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    cfg: TrainConfig,
) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update; returns new params and state."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise errors.ShapeMismatch("params, grads and state must align")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise errors.ShapeMismatch(f"param shape {p.shape} vs grad {g.shape}")
    t = state.t + 1
    new_params = []
    new_m = []
    new_v = []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * (g * g)
        m_hat = m / (1.0 - cfg.beta1**t)
        v_hat = v / (1.0 - cfg.beta2**t)
        new_params.append(p - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon))
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(m=new_m, v=new_v, t=t)


def train(
    model: MLP, dataset: tuple[np.ndarray, np.ndarray], cfg: TrainConfig
) -> tuple[MLP, list[float]]:
    """Mini-batch Adam over shuffled batches, seeded and deterministic.

    dataset is (inputs, targets) with one row per example. Returns the
    trained model (mutated in place) and the mean batch loss per epoch.
    """
    X = np.asarray(dataset[0], dtype=float)
    Y = np.asarray(dataset[1], dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise errors.EmptyDataset("dataset must contain at least one example")
    if len(X) != len(Y):
        raise errors.DimensionMismatch(f"{len(X)} inputs vs {len(Y)} targets")

    rng = np.random.default_rng(cfg.seed)
    state = init_adam_state(model.parameters())
    history: list[float] = []
    for _ in range(cfg.epochs):
        order = rng.permutation(len(X))
        batch_losses = []
        for lo in range(0, len(X), cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            xb, yb = X[idx], Y[idx]
            pred = forward(model, xb)
            batch_losses.append(loss_value(cfg.loss, pred, yb))
            grads = backward(model, xb, yb, cfg.loss)
            new_params, state = adam_step(model.parameters(), grads, state, cfg)
            model.set_parameters(new_params)
        history.append(float(np.mean(batch_losses)))
    return model, history


def _kink_signature(model: MLP, X: np.ndarray, T: np.ndarray, loss: Loss) -> tuple:
    """Discrete facts that select the active piece of the piecewise loss."""
    zs, acts = _forward_trace(model, X)
    bits = []
    for layer, z in zip(model.layers, zs):
        if layer.activation is Activation.ReLU:
            bits.append((z > 0.0).tobytes())
    pred = acts[-1]
    if loss is Loss.MAE:
        bits.append(np.sign(pred - T).tobytes())
    else:
        active = (pred >= PROB_CLAMP) & (pred <= 1.0 - PROB_CLAMP)
        bits.append(active.tobytes())
    return tuple(bits)


def gradient_check(
    model: MLP, x, truth, loss: Loss, h: float = 1e-5, atol: float = 1e-7
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Parameters whose +-h perturbation crosses a kink (a ReLU flips sign,
    an MAE residual changes sign, or the BCE clamp toggles) are skipped:
    finite differences are invalid there. Differences below atol count as
    agreement; central differences cannot resolve anything finer than the
    rounding noise of the loss divided by 2h.
    """
    X, _ = _as_batch(x)
    T, _ = _as_batch(truth)
    analytic = backward(model, X, T, loss)
    params = model.parameters()
    worst = 0.0
    for p_idx, p in enumerate(params):
        flat = p.reshape(-1)
        grad_flat = analytic[p_idx].reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            sig_plus = _kink_signature(model, X, T, loss)
            f_plus = loss_value(loss, forward(model, X), T)
            flat[j] = orig - h
            sig_minus = _kink_signature(model, X, T, loss)
            f_minus = loss_value(loss, forward(model, X), T)
            flat[j] = orig
            if sig_plus != sig_minus:
                continue
            numeric = (f_plus - f_minus) / (2.0 * h)
            a = grad_flat[j]
            diff = abs(a - numeric)
            if diff <= atol:
                continue
            err = diff / max(abs(a), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst


def init_mlp(sizes: list[int], activations: list[Activation], seed: int) -> MLP:
    """Seeded Glorot-uniform weights, zero biases."""
    if len(activations) != len(sizes) - 1:
        raise ValueError("need one activation per layer")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out, activation in zip(sizes, sizes[1:], activations):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        layers.append(
            DenseLayer(weights=weights, bias=np.zeros(fan_out), activation=activation)
        )
    return MLP(layers=layers)


# --- model text format ----------------------------------------------------
#
# Line 1:   "mlp-text 1"
# Line 2:   "layers <L>"
# Per layer:
#   "layer <out> <in> <activation>"
#   <out> weight rows, each <in> numbers, then one bias line of <out>
#   numbers; all %.17g so float64 round-trips byte-exactly.


def _fmt_row(values: np.ndarray) -> str:
    return " ".join("%.17g" % v for v in values)


def save_mlp(model: MLP, path) -> None:
    lines = [MODEL_FORMAT, f"layers {len(model.layers)}"]
    for layer in model.layers:
        lines.append(f"layer {layer.out_dim} {layer.in_dim} {layer.activation.value}")
        for row in layer.weights:
            lines.append(_fmt_row(row))
        lines.append(_fmt_row(layer.bias))
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def load_mlp(path) -> MLP:
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0] != MODEL_FORMAT:
        raise ValueError(f"unsupported model format: {lines[0] if lines else '<empty>'}")
    n_layers = int(lines[1].split()[1])
    pos = 2
    layers = []
    for _ in range(n_layers):
        _, out_s, in_s, act_s = lines[pos].split()
        out_dim, in_dim = int(out_s), int(in_s)
        pos += 1
        weights = np.array(
            [[float(v) for v in lines[pos + r].split()] for r in range(out_dim)]
        ).reshape(out_dim, in_dim)
        pos += out_dim
        bias = np.array([float(v) for v in lines[pos].split()])
        pos += 1
        layers.append(DenseLayer(weights=weights, bias=bias, activation=Activation(act_s)))
    return MLP(layers=layers)
