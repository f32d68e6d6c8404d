"""Desk-scale authentication classifier over MAU speed windows.

Pipeline: length-preserving 1D conv stem -> residual conv blocks -> gated
recurrent scan over time steps -> dense softmax head. Everything is plain
numpy in double precision with hand-written backprop, so gradients can be
verified against finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .errors import (
    CacheMismatch,
    LabelOutOfRange,
    ShapeMismatch,
    SingleClassDataset,
)

CHECKPOINT_VERSION = 1
PROB_FLOOR = 1e-12
STD_FLOOR = 1e-8


@dataclass(frozen=True)
class ModelConfig:
    input_length: int
    conv_channels: int = 16
    kernel_size: int = 5
    res_blocks: int = 2
    res_kernel: int = 3
    gru_hidden: int = 32
    classes: int = 2
    seed: int = 0
    standardize: bool = True

    def __post_init__(self):
        if self.kernel_size % 2 == 0 or self.res_kernel % 2 == 0:
            raise ShapeMismatch("kernel sizes must be odd (symmetric padding)")
        for name in ("input_length", "conv_channels", "kernel_size", "res_blocks",
                     "res_kernel", "gru_hidden"):
            if getattr(self, name) < 1:
                raise ShapeMismatch(f"{name} must be >= 1")
        if self.classes != 2:
            raise ShapeMismatch("binary classifier: classes must be 2")


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    epochs: int = 20
    pos_neg_ratio: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("betas must lie in (0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


# ---------------------------------------------------------------------------
# parameters

def init_params(config: ModelConfig) -> dict[str, np.ndarray]:
    """Seeded uniform init scaled by 1/sqrt(fan_in); zero biases."""
    rng = np.random.default_rng(config.seed)
    C, H = config.conv_channels, config.gru_hidden

    def uni(shape, fan_in):
        return rng.uniform(-1.0, 1.0, size=shape) / np.sqrt(fan_in)

    params = {
        "stem_w": uni((C, 1, config.kernel_size), config.kernel_size),
        "stem_b": np.zeros(C),
    }
    for i in range(config.res_blocks):
        fan = C * config.res_kernel
        params[f"res{i}_w1"] = uni((C, C, config.res_kernel), fan)
        params[f"res{i}_b1"] = np.zeros(C)
        params[f"res{i}_w2"] = uni((C, C, config.res_kernel), fan)
        params[f"res{i}_b2"] = np.zeros(C)
    for gate in ("z", "r", "c"):
        params[f"gru_w{gate}"] = uni((C, H), C)
        params[f"gru_u{gate}"] = uni((H, H), H)
        params[f"gru_b{gate}"] = np.zeros(H)
    params["head_w"] = uni((H, config.classes), H)
    params["head_b"] = np.zeros(config.classes)
    return params


def _check_shapes(params: dict[str, np.ndarray], config: ModelConfig):
    ref = init_params(config)
    if set(params) != set(ref):
        raise ShapeMismatch("parameter names do not match the config")
    for name, arr in ref.items():
        if params[name].shape != arr.shape:
            raise ShapeMismatch(
                f"{name}: expected {arr.shape}, got {params[name].shape}"
            )


# ---------------------------------------------------------------------------
# layers

def _conv1d_windows(x: np.ndarray, k: int) -> np.ndarray:
    """Sliding kernel windows of a (B, C, L) map, zero-padded to length L."""
    pad = k // 2
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
    L = x.shape[2]
    return np.stack([xp[:, :, j : j + L] for j in range(k)], axis=3)


def _conv1d(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    win = _conv1d_windows(x, w.shape[2])
    y = np.einsum("bilk,oik->bol", win, w) + b[None, :, None]
    return y, win


def _conv1d_backward(dy: np.ndarray, win: np.ndarray, w: np.ndarray):
    dw = np.einsum("bol,bilk->oik", dy, win)
    db = dy.sum(axis=(0, 2))
    B, Cin, L, K = win.shape
    pad = K // 2
    dxp = np.zeros((B, Cin, L + 2 * pad))
    for j in range(K):
        dxp[:, :, j : j + L] += np.einsum("bol,oi->bil", dy, w[:, :, j])
    return dw, db, dxp[:, :, pad : pad + L]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def standardize_batch(x: np.ndarray) -> np.ndarray:
    """Per-window standardization; std floored so constant windows map to 0."""
    mean = x.mean(axis=1, keepdims=True)
    std = np.maximum(x.std(axis=1, keepdims=True), STD_FLOOR)
    return (x - mean) / std


def batch_from_maus(maus) -> np.ndarray:
    return np.array([np.asarray(m.values, dtype=float) for m in maus])


# ---------------------------------------------------------------------------
# forward / backward

def forward(params: dict[str, np.ndarray], batch: np.ndarray, config: ModelConfig):
    """Class probabilities plus the activation cache backprop needs.

    batch is (B, input_length); rows are standardized here when the config
    asks for it.
    """
    _check_shapes(params, config)
    batch = np.asarray(batch, dtype=float)
    if batch.ndim != 2 or batch.shape[1] != config.input_length:
        raise ShapeMismatch(
            f"batch must be (B, {config.input_length}), got {batch.shape}"
        )
    x = standardize_batch(batch) if config.standardize else batch
    cache: dict = {"x": x, "res": []}

    h, stem_win = _conv1d(x[:, None, :], params["stem_w"], params["stem_b"])
    cache["stem_win"] = stem_win
    cache["stem_pre"] = h
    h = np.maximum(h, 0.0)
    cache["stem_out"] = h

    for i in range(config.res_blocks):
        y1_pre, win1 = _conv1d(h, params[f"res{i}_w1"], params[f"res{i}_b1"])
        y1 = np.maximum(y1_pre, 0.0)
        y2, win2 = _conv1d(y1, params[f"res{i}_w2"], params[f"res{i}_b2"])
        pre = y2 + h
        out = np.maximum(pre, 0.0)
        cache["res"].append(
            {"in": h, "win1": win1, "y1_pre": y1_pre, "y1": y1, "win2": win2, "pre": pre}
        )
        h = out

    # gated recurrent scan over the L time steps of channel vectors
    B, C, L = h.shape
    H = config.gru_hidden
    hidden = np.zeros((B, H))
    steps = []
    for t in range(L):
        xt = h[:, :, t]
        z = _sigmoid(xt @ params["gru_wz"] + hidden @ params["gru_uz"] + params["gru_bz"])
        r = _sigmoid(xt @ params["gru_wr"] + hidden @ params["gru_ur"] + params["gru_br"])
        c = np.tanh(
            xt @ params["gru_wc"] + (r * hidden) @ params["gru_uc"] + params["gru_bc"]
        )
        new_hidden = (1.0 - z) * hidden + z * c
        steps.append({"xt": xt, "hprev": hidden, "z": z, "r": r, "c": c})
        hidden = new_hidden
    cache["gru_steps"] = steps
    cache["gru_final"] = hidden
    cache["conv_out"] = h

    logits = hidden @ params["head_w"] + params["head_b"]
    logits -= logits.max(axis=1, keepdims=True)
    exp = np.exp(logits)
    probs = exp / exp.sum(axis=1, keepdims=True)
    cache["probs"] = probs
    return probs, cache


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log probability of the true class."""
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if np.any((labels < 0) | (labels >= probs.shape[1])):
        raise LabelOutOfRange("labels must be in {0, 1}")
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(picked, PROB_FLOOR))))


def backward(
    params: dict[str, np.ndarray],
    batch: np.ndarray,
    labels: np.ndarray,
    cache: dict,
    config: ModelConfig,
) -> dict[str, np.ndarray]:
    """Analytic gradients of mean cross-entropy w.r.t. every parameter."""
    batch = np.asarray(batch, dtype=float)
    labels = np.asarray(labels, dtype=int)
    x = standardize_batch(batch) if config.standardize else batch
    if "x" not in cache or cache["x"].shape != x.shape or not np.array_equal(cache["x"], x):
        raise CacheMismatch("cache does not correspond to this batch")
    probs = cache["probs"]
    B = len(labels)

    grads = {name: np.zeros_like(arr) for name, arr in params.items()}

    dlogits = probs.copy()
    dlogits[np.arange(B), labels] -= 1.0
    dlogits /= B

    hidden = cache["gru_final"]
    grads["head_w"] = hidden.T @ dlogits
    grads["head_b"] = dlogits.sum(axis=0)
    dh = dlogits @ params["head_w"].T

    conv_out = cache["conv_out"]
    dconv = np.zeros_like(conv_out)
    for t in range(conv_out.shape[2] - 1, -1, -1):
        step = cache["gru_steps"][t]
        xt, hprev, z, r, c = step["xt"], step["hprev"], step["z"], step["r"], step["c"]
        dz = dh * (c - hprev)
        dc = dh * z
        dhprev = dh * (1.0 - z)

        dc_pre = dc * (1.0 - c * c)
        grads["gru_wc"] += xt.T @ dc_pre
        grads["gru_uc"] += (r * hprev).T @ dc_pre
        grads["gru_bc"] += dc_pre.sum(axis=0)
        drh = dc_pre @ params["gru_uc"].T
        dr = drh * hprev
        dhprev += drh * r
        dxt = dc_pre @ params["gru_wc"].T

        dz_pre = dz * z * (1.0 - z)
        grads["gru_wz"] += xt.T @ dz_pre
        grads["gru_uz"] += hprev.T @ dz_pre
        grads["gru_bz"] += dz_pre.sum(axis=0)
        dxt += dz_pre @ params["gru_wz"].T
        dhprev += dz_pre @ params["gru_uz"].T

        dr_pre = dr * r * (1.0 - r)
        grads["gru_wr"] += xt.T @ dr_pre
        grads["gru_ur"] += hprev.T @ dr_pre
        grads["gru_br"] += dr_pre.sum(axis=0)
        dxt += dr_pre @ params["gru_wr"].T
        dhprev += dr_pre @ params["gru_ur"].T

        dconv[:, :, t] = dxt
        dh = dhprev

    dout = dconv
    for i in range(config.res_blocks - 1, -1, -1):
        blk = cache["res"][i]
        dpre = dout * (blk["pre"] > 0)
        dw2, db2, dy1 = _conv1d_backward(dpre, blk["win2"], params[f"res{i}_w2"])
        grads[f"res{i}_w2"], grads[f"res{i}_b2"] = dw2, db2
        dy1 *= blk["y1_pre"] > 0
        dw1, db1, din = _conv1d_backward(dy1, blk["win1"], params[f"res{i}_w1"])
        grads[f"res{i}_w1"], grads[f"res{i}_b1"] = dw1, db1
        dout = din + dpre  # skip connection

    dstem = dout * (cache["stem_pre"] > 0)
    dw, db, _ = _conv1d_backward(dstem, cache["stem_win"], params["stem_w"])
    grads["stem_w"], grads["stem_b"] = dw, db
    return grads


# ---------------------------------------------------------------------------
# optimization

@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
        )


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    cfg: TrainConfig,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """Standard Adam with bias correction; returns fresh params and state."""
    if set(grads) != set(params):
        raise ShapeMismatch("gradient names do not match parameters")
    state.t += 1
    t = state.t
    out = {}
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeMismatch(f"{name}: gradient shape {g.shape} != {p.shape}")
        state.m[name] = cfg.beta1 * state.m[name] + (1 - cfg.beta1) * g
        state.v[name] = cfg.beta2 * state.v[name] + (1 - cfg.beta2) * g * g
        m_hat = state.m[name] / (1 - cfg.beta1**t)
        v_hat = state.v[name] / (1 - cfg.beta2**t)
        out[name] = p - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return out, state


def train(
    X: np.ndarray,
    y: np.ndarray,
    mcfg: ModelConfig,
    tcfg: TrainConfig,
) -> tuple[dict[str, np.ndarray], list[float]]:
    """Minibatch Adam training; deterministic given the two seeds.

    X is (N, input_length); y holds labels in {0, 1} with 1 = legitimate.
    Returns final params and the per-epoch mean training loss.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or X.shape[1] != mcfg.input_length:
        raise ShapeMismatch(f"X must be (N, {mcfg.input_length})")
    if len(set(y.tolist())) < 2:
        raise SingleClassDataset("training data must contain both classes")

    params = init_params(mcfg)
    state = AdamState.zeros_like(params)
    shuffle_rng = np.random.default_rng(tcfg.seed)
    history: list[float] = []
    for _ in range(tcfg.epochs):
        order = shuffle_rng.permutation(len(X))
        losses = []
        for start in range(0, len(X), tcfg.batch_size):
            idx = order[start : start + tcfg.batch_size]
            probs, cache = forward(params, X[idx], mcfg)
            losses.append(cross_entropy(probs, y[idx]) * len(idx))
            grads = backward(params, X[idx], y[idx], cache, mcfg)
            params, state = adam_step(params, grads, state, tcfg)
        history.append(float(sum(losses) / len(X)))
    return params, history


def predict(params: dict[str, np.ndarray], mau, config: ModelConfig) -> float:
    """Probability that one MAU belongs to the legitimate user (class 1)."""
    values = np.asarray(getattr(mau, "values", mau), dtype=float)
    probs, _ = forward(params, values[None, :], config)
    return float(probs[0, 1])


def predict_batch(
    params: dict[str, np.ndarray], X: np.ndarray, config: ModelConfig
) -> np.ndarray:
    probs, _ = forward(params, X, config)
    return probs[:, 1]


# ---------------------------------------------------------------------------
# checkpoints

def save_checkpoint(path: str | Path, params: dict[str, np.ndarray], config: ModelConfig):
    payload = {
        "version": CHECKPOINT_VERSION,
        "config": asdict(config),
        "params": {k: v.tolist() for k, v in params.items()},
    }
    Path(path).write_text(json.dumps(payload))


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], ModelConfig]:
    payload = json.loads(Path(path).read_text())
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ShapeMismatch(f"unsupported checkpoint version: {payload.get('version')}")
    config = ModelConfig(**payload["config"])
    params = {k: np.asarray(v, dtype=float) for k, v in payload["params"].items()}
    _check_shapes(params, config)
    return params, config
