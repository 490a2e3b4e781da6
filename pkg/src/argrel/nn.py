"""Small numpy neural toolkit: dense layers, masked GRUs, losses, Adam.

Every layer caches what its backward pass needs during ``forward`` and
accumulates parameter gradients into ``Param.grad`` during ``backward``.
Everything runs in float64 so finite-difference checks have headroom.
"""
from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol

import numpy as np

CHECKPOINT_VERSION = 1


@dataclass
class Param:
    name: str
    value: np.ndarray
    grad: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.value = np.asarray(self.value, dtype=float)
        self.grad = np.zeros_like(self.value)

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    @property
    def size(self) -> int:
        return self.value.size


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def sigmoid(x: np.ndarray) -> np.ndarray:
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


def softmax(z, axis: int = -1) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("softmax input contains non-finite values")
    shifted = z - z.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def masked_softmax(scores: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Softmax over the last axis restricted to ``mask``; masked entries get exactly 0.

    Rows with no unmasked entry come back all-zero.
    """
    mask = np.broadcast_to(mask, scores.shape)
    safe = np.where(mask, scores, -np.inf)
    row_max = safe.max(axis=-1, keepdims=True)
    row_max = np.where(np.isfinite(row_max), row_max, 0.0)
    e = np.where(mask, np.exp(np.where(mask, scores, 0.0) - row_max), 0.0)
    total = e.sum(axis=-1, keepdims=True)
    return np.divide(e, total, out=np.zeros_like(e), where=total > 0)


def cross_entropy(p, gold: int) -> float:
    """Negative log-probability of class ``gold`` (0 = attack, 1 = support)."""
    p = np.asarray(p, dtype=float)
    return float(-np.log(max(p[gold], np.finfo(float).tiny)))


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy of softmax(logits); returns (loss, probs, dloss/dlogits)."""
    probs = softmax(logits, axis=1)
    n = logits.shape[0]
    picked = probs[np.arange(n), labels]
    loss = float(-np.mean(np.log(np.maximum(picked, np.finfo(float).tiny))))
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    return loss, probs, dlogits / n


BCE_EPS = 1e-7


def bce(x_hat, x, eps: float = BCE_EPS) -> float:
    x_hat = np.clip(np.asarray(x_hat, dtype=float), eps, 1.0 - eps)
    x = np.asarray(x, dtype=float)
    return float(-np.mean(x * np.log(x_hat) + (1.0 - x) * np.log(1.0 - x_hat)))


def bce_grad(x_hat: np.ndarray, x: np.ndarray, eps: float = BCE_EPS) -> np.ndarray:
    """d bce / d x_hat, zero where clipping is active."""
    clipped = np.clip(x_hat, eps, 1.0 - eps)
    g = -(x / clipped - (1.0 - x) / (1.0 - clipped)) / x.size
    return np.where((x_hat < eps) | (x_hat > 1.0 - eps), 0.0, g)


class Dense:
    """y = act(x W + b) with act in {sigmoid, identity}."""

    def __init__(self, name: str, n_in: int, n_out: int, activation: str,
                 rng: np.random.Generator, bias: bool = True):
        if activation not in ("sigmoid", "identity"):
            raise ValueError(f"unsupported activation {activation!r}")
        self.activation = activation
        self.W = Param(f"{name}.W", glorot_uniform(rng, n_in, n_out))
        self.b = Param(f"{name}.b", np.zeros(n_out)) if bias else None
        self._x = self._y = None

    @property
    def n_in(self) -> int:
        return self.W.value.shape[0]

    def params(self) -> list[Param]:
        return [self.W] + ([self.b] if self.b is not None else [])

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.n_in:
            raise ValueError(f"{self.W.name}: expected input width {self.n_in}, got {x.shape[-1]}")
        a = x @ self.W.value
        if self.b is not None:
            a = a + self.b.value
        y = sigmoid(a) if self.activation == "sigmoid" else a
        self._x, self._y = x, y
        return y

    def backward(self, dy: np.ndarray) -> np.ndarray:
        da = dy * self._y * (1.0 - self._y) if self.activation == "sigmoid" else dy
        self.W.grad += self._x.T @ da
        if self.b is not None:
            self.b.grad += da.sum(axis=0)
        return da @ self.W.value.T


def dense_forward(layer: Dense, x: np.ndarray) -> np.ndarray:
    return layer.forward(np.asarray(x, dtype=float))


class GRU:
    """Batched GRU over masked sequences.

    z = σ(x W_z + h U_z + b_z), r = σ(x W_r + h U_r + b_r),
    h̃ = tanh(x W_h + (r ⊙ h) U_h + b_h), h' = (1 − z) ⊙ h + z ⊙ h̃.
    On masked steps the state is carried through unchanged.
    """

    GATES = ("z", "r", "h")

    def __init__(self, name: str, n_in: int, n_hidden: int, rng: np.random.Generator):
        self.n_in, self.n_hidden = n_in, n_hidden
        self.W = {g: Param(f"{name}.W_{g}", glorot_uniform(rng, n_in, n_hidden)) for g in self.GATES}
        self.U = {g: Param(f"{name}.U_{g}", glorot_uniform(rng, n_hidden, n_hidden)) for g in self.GATES}
        self.b = {g: Param(f"{name}.b_{g}", np.zeros(n_hidden)) for g in self.GATES}
        self._cache = None

    def params(self) -> list[Param]:
        return [d[g] for g in self.GATES for d in (self.W, self.U, self.b)]

    def forward(self, x: np.ndarray, mask: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        """x: (B, L, n_in), mask: (B, L) -> outputs (B, L, H), final state (B, H)."""
        if x.ndim != 3 or x.shape[2] != self.n_in:
            raise ValueError(f"GRU expects (batch, steps, {self.n_in}) input, got {x.shape}")
        B, L, _ = x.shape
        if mask is None:
            mask = np.ones((B, L), dtype=bool)
        m_all = mask.astype(float)[:, :, None]
        xz = x @ self.W["z"].value + self.b["z"].value
        xr = x @ self.W["r"].value + self.b["r"].value
        xh = x @ self.W["h"].value + self.b["h"].value
        Uz, Ur, Uh = self.U["z"].value, self.U["r"].value, self.U["h"].value

        H = self.n_hidden
        # steps after the last unmasked position only carry the state forward
        active = np.flatnonzero(mask.any(axis=0))
        L_run = int(active[-1]) + 1 if active.size else 0
        h = np.zeros((B, H))
        outputs = np.empty((B, L, H))
        h_prev = np.empty((B, L_run, H))
        zs, rs, hcs = np.empty((B, L_run, H)), np.empty((B, L_run, H)), np.empty((B, L_run, H))
        for t in range(L_run):
            z = sigmoid(xz[:, t] + h @ Uz)
            r = sigmoid(xr[:, t] + h @ Ur)
            hc = np.tanh(xh[:, t] + (r * h) @ Uh)
            m = m_all[:, t]
            h_prev[:, t], zs[:, t], rs[:, t], hcs[:, t] = h, z, r, hc
            h = m * ((1.0 - z) * h + z * hc) + (1.0 - m) * h
            outputs[:, t] = h
        outputs[:, L_run:] = h[:, None, :]
        self._cache = (x, m_all, h_prev, zs, rs, hcs)
        return outputs, h

    def backward(self, d_outputs: np.ndarray | None = None,
                 d_final: np.ndarray | None = None) -> np.ndarray:
        """Backpropagate through time; returns d loss / d x."""
        x, m_all, h_prev, zs, rs, hcs = self._cache
        B, L_run, H = zs.shape
        L = x.shape[1]
        Uz, Ur, Uh = self.U["z"].value, self.U["r"].value, self.U["h"].value
        dh = np.zeros((B, H)) if d_final is None else d_final.copy()
        if d_outputs is not None and L_run < L:
            dh += d_outputs[:, L_run:].sum(axis=1)
        da_z, da_r, da_h = np.zeros((B, L, H)), np.zeros((B, L, H)), np.zeros((B, L, H))
        for t in range(L_run - 1, -1, -1):
            if d_outputs is not None:
                dh = dh + d_outputs[:, t]
            hp, z, r, hc, m = h_prev[:, t], zs[:, t], rs[:, t], hcs[:, t], m_all[:, t]
            dhn = m * dh
            dh_prev = (1.0 - m) * dh + dhn * (1.0 - z)
            dah = dhn * z * (1.0 - hc ** 2)
            drh = dah @ Uh.T
            dh_prev += drh * r
            daz = dhn * (hc - hp) * z * (1.0 - z)
            dar = drh * hp * r * (1.0 - r)
            dh_prev += daz @ Uz.T + dar @ Ur.T
            self.U["z"].grad += hp.T @ daz
            self.U["r"].grad += hp.T @ dar
            self.U["h"].grad += (r * hp).T @ dah
            da_z[:, t], da_r[:, t], da_h[:, t] = daz, dar, dah
            dh = dh_prev
        dx = np.zeros_like(x)
        for g, da in zip(self.GATES, (da_z, da_r, da_h)):
            self.W[g].grad += np.einsum("bln,blh->nh", x, da)
            self.b[g].grad += da.sum(axis=(0, 1))
            dx += da @ self.W[g].value.T
        return dx


def gru_forward(cell: GRU, sequence, mask=None) -> tuple[np.ndarray, np.ndarray]:
    """Run a GRU over one unbatched ``(L, n)`` sequence (or an EmbeddedSequence)."""
    if hasattr(sequence, "matrix"):
        sequence, mask = sequence.matrix, sequence.mask
    seq = np.asarray(sequence, dtype=float)
    m = None if mask is None else np.asarray(mask, dtype=bool)[None]
    outputs, final = cell.forward(seq[None], m)
    return outputs[0], final[0]


class Adam:
    def __init__(self, params: Iterable[Param], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self._m = [np.zeros_like(p.value) for p in self.params]
        self._v = [np.zeros_like(p.value) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p, m, v in zip(self.params, self._m, self._v):
            m *= b1
            m += (1.0 - b1) * p.grad
            v *= b2
            v += (1.0 - b2) * p.grad ** 2
            m_hat = m / (1.0 - b1 ** self.t)
            v_hat = v / (1.0 - b2 ** self.t)
            p.value -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def adam_step(params: Iterable[Param], lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8, t: int = 1,
              state: dict | None = None) -> dict:
    """Functional Adam update; ``state`` maps param name to its (m, v) moments."""
    state = {} if state is None else state
    for p in params:
        m, v = state.get(p.name, (np.zeros_like(p.value), np.zeros_like(p.value)))
        m = beta1 * m + (1.0 - beta1) * p.grad
        v = beta2 * v + (1.0 - beta2) * p.grad ** 2
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        p.value -= lr * m_hat / (np.sqrt(v_hat) + eps)
        state[p.name] = (m, v)
    return state


# -- gradient checking -------------------------------------------------------

class Differentiable(Protocol):
    def params(self) -> list[Param]: ...
    def loss(self, batch) -> float: ...
    def loss_and_backward(self, batch) -> float: ...


# Gradient entries below this magnitude are compared on an absolute scale.
GRAD_CHECK_FLOOR = 1e-6


@dataclass
class GradCheckReport:
    errors: dict[str, float]
    tolerance: float

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance

    def lines(self) -> list[str]:
        return [
            f"{name:<32} {err:.3e} {'ok' if err <= self.tolerance else 'FAIL'}"
            for name, err in self.errors.items()
        ]


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = GRAD_CHECK_FLOOR) -> np.ndarray:
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def numeric_gradient(loss_fn: Callable[[], float], param: Param, step: float = 1e-5) -> np.ndarray:
    grad = np.zeros_like(param.value)
    flat = param.value.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        plus = loss_fn()
        flat[i] = orig - step
        minus = loss_fn()
        flat[i] = orig
        out[i] = (plus - minus) / (2.0 * step)
    return grad


def grad_check(model: Differentiable, batch, tolerance: float = 1e-4,
               step: float = 1e-5) -> GradCheckReport:
    """Compare analytic gradients with central differences for every parameter."""
    params = model.params()
    for p in params:
        p.zero_grad()
    model.loss_and_backward(batch)
    analytic = {p.name: p.grad.copy() for p in params}
    errors = {}
    for p in params:
        numeric = numeric_gradient(lambda: model.loss(batch), p, step)
        errors[p.name] = float(relative_error(analytic[p.name], numeric).max(initial=0.0))
    return GradCheckReport(errors, tolerance)


# -- checkpoints --------------------------------------------------------------

def save_checkpoint(path: str | Path, arrays: dict[str, np.ndarray], meta: dict) -> None:
    """Write named arrays plus JSON metadata to a single ``.npz`` container."""
    payload = {"__meta__": np.array(json.dumps(
        {"version": CHECKPOINT_VERSION, **meta}, sort_keys=True))}
    for name, arr in arrays.items():
        if name == "__meta__":
            raise ValueError("reserved array name '__meta__'")
        payload[name] = np.asarray(arr)
    # fixed timestamps keep the container byte-identical across runs
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name, arr in payload.items():
            info = zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0))
            buf = io.BytesIO()
            np.lib.format.write_array(buf, arr, allow_pickle=False)
            zf.writestr(info, buf.getvalue())


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["__meta__"]))
        arrays = {k: data[k] for k in data.files if k != "__meta__"}
    if meta.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {meta.get('version')!r}")
    return arrays, meta
