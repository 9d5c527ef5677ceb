"""Neural building blocks with hand-written backward passes.

Everything is plain numpy in float64. Each ``*_forward`` returns
``(output, cache)`` and the matching ``*_backward`` consumes the upstream
gradient plus the cache, returning input and parameter gradients. Keeping
gradients analytic (and checkable against finite differences) is the point;
no autograd framework is involved.
"""

from __future__ import annotations

import numpy as np


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    scale = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-scale, scale, size=(fan_in, fan_out))


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    expx = np.exp(x[~pos])
    out[~pos] = expx / (1.0 + expx)
    return out


# -- affine ------------------------------------------------------------------

def affine_forward(x, W, b):
    return x @ W + b, (x, W)


def affine_backward(dout, cache):
    x, W = cache
    dW = x.T @ dout
    db = dout.sum(axis=0)
    dx = dout @ W.T
    return dx, dW, db


# -- rectifier ---------------------------------------------------------------

def relu_forward(x):
    return np.maximum(x, 0.0), (x > 0)


def relu_backward(dout, mask):
    return dout * mask


# -- highway gate ------------------------------------------------------------

def highway_forward(x, Wh, bh, Wt, bt):
    """out = T(x) * H(x) + (1 - T(x)) * x with H = relu, T = sigmoid."""
    ah = x @ Wh + bh
    h = np.maximum(ah, 0.0)
    at = x @ Wt + bt
    t = sigmoid(at)
    out = t * h + (1.0 - t) * x
    return out, (x, ah, h, t, Wh, Wt)


def highway_backward(dout, cache):
    x, ah, h, t, Wh, Wt = cache
    dh = dout * t
    dt = dout * (h - x)
    dx = dout * (1.0 - t)
    dah = dh * (ah > 0)
    dat = dt * t * (1.0 - t)
    dWh = x.T @ dah
    dbh = dah.sum(axis=0)
    dWt = x.T @ dat
    dbt = dat.sum(axis=0)
    dx += dah @ Wh.T + dat @ Wt.T
    return dx, dWh, dbh, dWt, dbt


# -- locked dropout ----------------------------------------------------------

def locked_dropout(x, rate, rng: np.random.Generator | None, train: bool):
    """One mask per sequence, shared across all time steps."""
    if not train or rate <= 0.0 or rng is None:
        return x, None
    keep = 1.0 - rate
    mask = (rng.random((1, x.shape[1])) < keep) / keep
    return x * mask, mask


def locked_dropout_backward(dout, mask):
    if mask is None:
        return dout
    return dout * mask


# -- windowed affine mixer encoder --------------------------------------------
# Cheap stand-in for a recurrent encoder: each direction combines the token's
# own vector with the mean of a small one-sided context window.

def _context_means(x, window, backward):
    """Mean over [t-window, t-1] (forward) or [t+1, t+window] (backward);
    empty windows give zero rows."""
    n = x.shape[0]
    means = np.zeros((n, x.shape[1]))
    counts = np.zeros(n)
    for t in range(n):
        if backward:
            lo, hi = t + 1, min(n, t + window + 1)
        else:
            lo, hi = max(0, t - window), t
        if hi > lo:
            means[t] = x[lo:hi].mean(axis=0)
            counts[t] = hi - lo
    return means, counts


def mixer_forward(x, Wf_self, Wf_ctx, bf, Wb_self, Wb_ctx, bb, window):
    u, cu = _context_means(x, window, backward=False)
    v, cv = _context_means(x, window, backward=True)
    af = x @ Wf_self + u @ Wf_ctx + bf
    ab = x @ Wb_self + v @ Wb_ctx + bb
    out = np.tanh(np.concatenate([af, ab], axis=1))
    return out, (x, u, v, cu, cv, out,
                 Wf_self, Wf_ctx, Wb_self, Wb_ctx, window)


def mixer_backward(dout, cache):
    x, u, v, cu, cv, out, Wf_self, Wf_ctx, Wb_self, Wb_ctx, window = cache
    n = x.shape[0]
    hidden = Wf_self.shape[1]
    da = dout * (1.0 - out * out)
    daf, dab = da[:, :hidden], da[:, hidden:]
    grads = {
        "Wf_self": x.T @ daf, "Wf_ctx": u.T @ daf, "bf": daf.sum(axis=0),
        "Wb_self": x.T @ dab, "Wb_ctx": v.T @ dab, "bb": dab.sum(axis=0),
    }
    du = daf @ Wf_ctx.T
    dv = dab @ Wb_ctx.T
    dx = daf @ Wf_self.T + dab @ Wb_self.T
    for t in range(n):
        lo, hi = max(0, t - window), t
        if hi > lo:
            dx[lo:hi] += du[t] / cu[t]
        lo, hi = t + 1, min(n, t + window + 1)
        if hi > lo:
            dx[lo:hi] += dv[t] / cv[t]
    return dx, grads


# -- gated recurrent encoder ---------------------------------------------------

GRU_GATES = ("z", "r", "c")


def gru_param_shapes(input_dim: int, hidden: int) -> dict[str, tuple]:
    shapes = {}
    for gate in GRU_GATES:
        shapes[f"W{gate}"] = (input_dim, hidden)
        shapes[f"U{gate}"] = (hidden, hidden)
        shapes[f"b{gate}"] = (hidden,)
    return shapes


def gru_init(rng: np.random.Generator, input_dim: int, hidden: int) -> dict:
    params = {}
    for gate in GRU_GATES:
        params[f"W{gate}"] = glorot(rng, input_dim, hidden)
        params[f"U{gate}"] = glorot(rng, hidden, hidden)
        params[f"b{gate}"] = np.zeros(hidden)
    return params


def gru_forward(x, p):
    """Single-direction gated recurrent pass over an (n, d) sequence."""
    n = x.shape[0]
    hidden = p["bz"].shape[0]
    h = np.zeros(hidden)
    outputs = np.empty((n, hidden))
    steps = []
    for t in range(n):
        z = sigmoid(x[t] @ p["Wz"] + h @ p["Uz"] + p["bz"])
        r = sigmoid(x[t] @ p["Wr"] + h @ p["Ur"] + p["br"])
        rh = r * h
        c = np.tanh(x[t] @ p["Wc"] + rh @ p["Uc"] + p["bc"])
        h_new = (1.0 - z) * c + z * h
        steps.append((h, z, r, rh, c))
        outputs[t] = h_new
        h = h_new
    return outputs, (x, steps, p)


def gru_backward(dout, cache):
    x, steps, p = cache
    n = x.shape[0]
    grads = {k: np.zeros_like(v) for k, v in p.items()}
    dx = np.zeros_like(x)
    dh_next = np.zeros(p["bz"].shape[0])
    for t in range(n - 1, -1, -1):
        h_prev, z, r, rh, c = steps[t]
        dh = dout[t] + dh_next
        dz = dh * (h_prev - c)
        dc = dh * (1.0 - z)
        dh_prev = dh * z
        dac = dc * (1.0 - c * c)
        drh = dac @ p["Uc"].T
        dr = drh * h_prev
        dh_prev += drh * r
        daz = dz * z * (1.0 - z)
        dar = dr * r * (1.0 - r)
        dh_prev += daz @ p["Uz"].T + dar @ p["Ur"].T
        dx[t] = daz @ p["Wz"].T + dar @ p["Wr"].T + dac @ p["Wc"].T
        grads["Wz"] += np.outer(x[t], daz)
        grads["Uz"] += np.outer(h_prev, daz)
        grads["bz"] += daz
        grads["Wr"] += np.outer(x[t], dar)
        grads["Ur"] += np.outer(h_prev, dar)
        grads["br"] += dar
        grads["Wc"] += np.outer(x[t], dac)
        grads["Uc"] += np.outer(rh, dac)
        grads["bc"] += dac
        dh_next = dh_prev
    return dx, grads


def bigru_forward(x, fwd_params, bwd_params):
    out_f, cache_f = gru_forward(x, fwd_params)
    out_b, cache_b = gru_forward(x[::-1], bwd_params)
    out = np.concatenate([out_f, out_b[::-1]], axis=1)
    return out, (cache_f, cache_b, fwd_params["bz"].shape[0])


def bigru_backward(dout, cache):
    cache_f, cache_b, hidden = cache
    dx_f, grads_f = gru_backward(dout[:, :hidden], cache_f)
    dx_b, grads_b = gru_backward(dout[:, hidden:][::-1], cache_b)
    return dx_f + dx_b[::-1], grads_f, grads_b


# -- optimization --------------------------------------------------------------

class AdamW:
    """Adaptive-moment optimizer with decoupled weight decay."""

    def __init__(self, learning_rate: float, weight_decay: float = 0.0,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray],
             grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for key in sorted(params):
            g = grads[key]
            m = self._m.setdefault(key, np.zeros_like(params[key]))
            v = self._v.setdefault(key, np.zeros_like(params[key]))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            params[key] -= self.learning_rate * (
                update + self.weight_decay * params[key])


class ReduceLROnPlateau:
    """Halve (by ``factor``) the optimizer learning rate after ``patience``
    epochs without improvement of a maximized metric."""

    def __init__(self, optimizer: AdamW, factor: float = 0.5, patience: int = 2):
        self.optimizer = optimizer
        self.factor = factor
        self.patience = patience
        self.best = -np.inf
        self.stale = 0

    def step(self, metric: float) -> None:
        if metric > self.best:
            self.best = metric
            self.stale = 0
        else:
            self.stale += 1
            if self.stale > self.patience:
                self.optimizer.learning_rate *= self.factor
                self.stale = 0
