"""Linear-chain CRF over BIOES emissions.

The transition matrix has two extra states appended after the label rows:
START (transitions out of it score the first label) and STOP (transitions
into it score the last label). All computations run in log space.

Structurally invalid BIOES moves are masked to -inf at decode time only;
training keeps every transition learnable.
"""

from __future__ import annotations

import numpy as np

from .bioes import LABELS

N_LABELS = len(LABELS)
START = N_LABELS
STOP = N_LABELS + 1
N_STATES = N_LABELS + 2

NEG_INF = -1e30  # large finite stand-in so masked cells never produce NaN


def _logsumexp(x: np.ndarray, axis: int | None = None) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis) if axis is not None else out.reshape(())


def bioes_transition_mask() -> np.ndarray:
    """Boolean (N_STATES, N_STATES) matrix of structurally valid moves."""
    idx = {label: i for i, label in enumerate(LABELS)}
    o, b, i_, e, s = idx["O"], idx["B-PER"], idx["I-PER"], idx["E-PER"], idx["S-PER"]
    allowed = np.zeros((N_STATES, N_STATES), dtype=bool)
    opens = (o, b, s)
    for src in (o, e, s, START):
        for dst in opens:
            allowed[src, dst] = True
    for src in (b, i_):
        allowed[src, i_] = True
        allowed[src, e] = True
    for src in (o, e, s):
        allowed[src, STOP] = True
    allowed[START, STOP] = True  # empty path
    return allowed


def init_transitions(rng: np.random.Generator, scale: float = 0.01) -> np.ndarray:
    return rng.normal(0.0, scale, size=(N_STATES, N_STATES))


def _masked(transitions: np.ndarray, enforce: bool) -> np.ndarray:
    if not enforce:
        return transitions
    masked = transitions.copy()
    masked[~bioes_transition_mask()] = NEG_INF
    return masked


def forward_log(emissions: np.ndarray, transitions: np.ndarray):
    """Forward recursion; returns (alpha, log_partition)."""
    n = emissions.shape[0]
    alpha = np.empty((n, N_LABELS))
    alpha[0] = transitions[START, :N_LABELS] + emissions[0]
    for t in range(1, n):
        scores = alpha[t - 1][:, None] + transitions[:N_LABELS, :N_LABELS]
        alpha[t] = emissions[t] + _logsumexp(scores, axis=0)
    log_z = _logsumexp(alpha[n - 1] + transitions[:N_LABELS, STOP])
    return alpha, log_z


def backward_log(emissions: np.ndarray, transitions: np.ndarray):
    n = emissions.shape[0]
    beta = np.empty((n, N_LABELS))
    beta[n - 1] = transitions[:N_LABELS, STOP]
    for t in range(n - 2, -1, -1):
        scores = (transitions[:N_LABELS, :N_LABELS]
                  + (emissions[t + 1] + beta[t + 1])[None, :])
        beta[t] = _logsumexp(scores, axis=1)
    return beta


def marginals(emissions: np.ndarray, transitions: np.ndarray) -> np.ndarray:
    """Posterior P(y_t = label) per token; each row sums to 1."""
    if emissions.shape[0] == 0:
        return np.zeros((0, N_LABELS))
    alpha, log_z = forward_log(emissions, transitions)
    beta = backward_log(emissions, transitions)
    return np.exp(alpha + beta - log_z)


def path_score(emissions: np.ndarray, transitions: np.ndarray,
               path: np.ndarray) -> float:
    n = emissions.shape[0]
    if n == 0:
        return float(transitions[START, STOP])
    score = transitions[START, path[0]] + emissions[0, path[0]]
    for t in range(1, n):
        score += transitions[path[t - 1], path[t]] + emissions[t, path[t]]
    return float(score + transitions[path[n - 1], STOP])


def nll_and_gradients(emissions: np.ndarray, transitions: np.ndarray,
                      gold: np.ndarray):
    """Negative log-likelihood of the gold path with analytic gradients.

    Returns ``(nll, d_emissions, d_transitions)``. Gradients are expected
    counts under the model minus observed counts of the gold path.
    """
    n = emissions.shape[0]
    d_trans = np.zeros_like(transitions)
    if n == 0:
        return 0.0, np.zeros_like(emissions), d_trans

    alpha, log_z = forward_log(emissions, transitions)
    beta = backward_log(emissions, transitions)
    node_marginals = np.exp(alpha + beta - log_z)

    d_emissions = node_marginals.copy()
    d_emissions[np.arange(n), gold] -= 1.0

    d_trans[START, :N_LABELS] += node_marginals[0]
    d_trans[START, gold[0]] -= 1.0
    d_trans[:N_LABELS, STOP] += node_marginals[n - 1]
    d_trans[gold[n - 1], STOP] -= 1.0
    for t in range(1, n):
        pair = (alpha[t - 1][:, None]
                + transitions[:N_LABELS, :N_LABELS]
                + (emissions[t] + beta[t])[None, :])
        d_trans[:N_LABELS, :N_LABELS] += np.exp(pair - log_z)
        d_trans[gold[t - 1], gold[t]] -= 1.0

    nll = log_z - path_score(emissions, transitions, gold)
    return float(nll), d_emissions, d_trans


def viterbi(emissions: np.ndarray, transitions: np.ndarray,
            enforce_bioes: bool = True):
    """Best label path under emission + transition scores.

    Returns ``(path, score)``; the path is empty for an empty sequence.
    """
    n = emissions.shape[0]
    trans = _masked(transitions, enforce_bioes)
    if n == 0:
        return np.zeros(0, dtype=int), float(trans[START, STOP])
    trellis = np.empty((n, N_LABELS))
    pointers = np.zeros((n, N_LABELS), dtype=int)
    trellis[0] = trans[START, :N_LABELS] + emissions[0]
    for t in range(1, n):
        scores = trellis[t - 1][:, None] + trans[:N_LABELS, :N_LABELS]
        pointers[t] = np.argmax(scores, axis=0)
        trellis[t] = emissions[t] + np.max(scores, axis=0)
    final = trellis[n - 1] + trans[:N_LABELS, STOP]
    best = int(np.argmax(final))
    path = np.empty(n, dtype=int)
    path[n - 1] = best
    for t in range(n - 1, 0, -1):
        path[t - 1] = pointers[t, path[t]]
    return path, float(final[best])


def decode_with_confidence(emissions: np.ndarray, transitions: np.ndarray,
                           enforce_bioes: bool = True):
    """Viterbi path plus the posterior marginal of each decoded label."""
    path, _ = viterbi(emissions, transitions, enforce_bioes)
    if emissions.shape[0] == 0:
        return path, np.zeros(0)
    probs = marginals(emissions, transitions)
    confidence = probs[np.arange(emissions.shape[0]), path]
    return path, confidence
