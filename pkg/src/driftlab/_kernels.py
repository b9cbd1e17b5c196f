"""SGNS inner loops.

Two implementations with identical semantics and identical random streams:

* ``train_span_jit`` / ``pair_update_jit`` - scalar loops compiled by numba.
* ``train_span_numpy`` / ``pair_update_numpy`` - Python loop over pairs with
  the per-pair algebra vectorized in numpy.

Randomness comes from a 48-bit linear congruential generator carried as an
explicit state so both paths consume draws in the same order.
"""
import math

import numpy as np

from ._accel import jit

LCG_MUL = 25214903917
LCG_ADD = 11
LCG_MASK = (1 << 48) - 1
MAX_REDRAWS = 64


def lcg_next(state):
    return (state * LCG_MUL + LCG_ADD) & LCG_MASK


def lcg_window(state, window):
    """Advance and return ``(state, b)`` with ``b`` uniform on ``1..window``."""
    state = lcg_next(state)
    return state, window - (state >> 16) % window


def seed_state(seed):
    return (int(seed) * 2654435761 + 0x9E3779B9) & LCG_MASK


# -- numba path ----------------------------------------------------------


@jit
def _u64_next(state):
    return (state * np.uint64(LCG_MUL) + np.uint64(LCG_ADD)) & np.uint64(LCG_MASK)


@jit
def _sigmoid(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@jit
def _softplus(x):
    # log(1 + e^x)
    if x > 0.0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


@jit
def pair_update_jit(syn0, syn1, center, targets, n_targets, lr, grad, neu1e):
    """One exact gradient step on the pair loss; ``targets[0]`` is the positive.

    Returns the loss evaluated before the update.
    """
    d = syn0.shape[1]
    loss = 0.0
    for k in range(n_targets):
        t = targets[k]
        f = 0.0
        for j in range(d):
            f += syn0[center, j] * syn1[t, j]
        if k == 0:
            loss += _softplus(-f)
            grad[k] = _sigmoid(f) - 1.0
        else:
            loss += _softplus(f)
            grad[k] = _sigmoid(f)
    for j in range(d):
        neu1e[j] = 0.0
    for k in range(n_targets):
        t = targets[k]
        g = grad[k]
        for j in range(d):
            neu1e[j] += g * syn1[t, j]
    for k in range(n_targets):
        t = targets[k]
        g = lr * grad[k]
        for j in range(d):
            syn1[t, j] -= g * syn0[center, j]
    for j in range(d):
        syn0[center, j] -= lr * neu1e[j]
    return loss


@jit
def _draw_negative(state, cum_table):
    state = _u64_next(state)
    r = (state >> np.uint64(16)) % np.uint64(cum_table[-1])
    lo = 0
    hi = cum_table.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if np.uint64(cum_table[mid]) > r:
            hi = mid
        else:
            lo = mid + 1
    return state, lo


@jit
def train_span_jit(
    syn0, syn1, tokens, offsets, s_lo, s_hi, keep_prob, cum_table,
    window, negative, alpha, min_alpha, epoch, epochs, span_words, state, buf,
):
    """Train on sentences ``s_lo..s_hi-1``; returns ``(loss_sum, n_pairs, state)``."""
    d = syn0.shape[1]
    vocab_size = syn0.shape[0]
    n_neg = negative if vocab_size > 1 else 0
    targets = np.empty(n_neg + 1, dtype=np.int64)
    grad = np.empty(n_neg + 1, dtype=np.float64)
    neu1e = np.empty(d, dtype=np.float64)
    st = np.uint64(state)
    uwin = np.uint64(window)
    loss = 0.0
    pairs = 0
    done = 0
    for s in range(s_lo, s_hi):
        lo = offsets[s]
        hi = offsets[s + 1]
        progress = (epoch + done / span_words) / epochs
        lr = alpha * (1.0 - progress)
        if lr < min_alpha:
            lr = min_alpha
        n = 0
        for p in range(lo, hi):
            w = tokens[p]
            st = _u64_next(st)
            u = (st >> np.uint64(16)) / 4294967296.0
            if u < keep_prob[w]:
                buf[n] = w
                n += 1
        done += hi - lo
        for pos in range(n):
            center = buf[pos]
            st = _u64_next(st)
            b = window - np.int64((st >> np.uint64(16)) % uwin)
            start = pos - b if pos - b > 0 else 0
            stop = pos + b + 1 if pos + b + 1 < n else n
            for cpos in range(start, stop):
                if cpos == pos:
                    continue
                targets[0] = buf[cpos]
                k = 1
                while k <= n_neg:
                    for _ in range(MAX_REDRAWS):
                        st, cand = _draw_negative(st, cum_table)
                        if cand != center:
                            break
                    targets[k] = cand
                    k += 1
                loss += pair_update_jit(syn0, syn1, center, targets, n_neg + 1, lr, grad, neu1e)
                pairs += 1
    return loss, pairs, st


# -- numpy path -----------------------------------------------------------


def _np_sigmoid(x):
    return np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))


def _np_softplus(x):
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def pair_update_numpy(syn0, syn1, center, targets, lr):
    """Vectorized counterpart of :func:`pair_update_jit`."""
    targets = np.asarray(targets, dtype=np.int64)
    v = syn0[center].astype(np.float64)
    u = syn1[targets].astype(np.float64)
    f = u @ v
    labels = np.zeros(len(targets))
    labels[0] = 1.0
    loss = float(_np_softplus(-f[0]) + _np_softplus(f[1:]).sum())
    g = _np_sigmoid(f) - labels
    neu1e = g @ u
    np.subtract.at(syn1, targets, (lr * np.outer(g, v)).astype(syn1.dtype))
    syn0[center] -= (lr * neu1e).astype(syn0.dtype)
    return loss


def train_span_numpy(
    syn0, syn1, tokens, offsets, s_lo, s_hi, keep_prob, cum_table,
    window, negative, alpha, min_alpha, epoch, epochs, span_words, state, buf=None,
):
    vocab_size = syn0.shape[0]
    n_neg = negative if vocab_size > 1 else 0
    total_weight = int(cum_table[-1])
    st = int(state)
    loss = 0.0
    pairs = 0
    done = 0
    for s in range(s_lo, s_hi):
        lo, hi = int(offsets[s]), int(offsets[s + 1])
        progress = (epoch + done / span_words) / epochs
        lr = max(alpha * (1.0 - progress), min_alpha)
        kept = []
        for w in tokens[lo:hi]:
            st = lcg_next(st)
            if (st >> 16) / 4294967296.0 < keep_prob[w]:
                kept.append(int(w))
        done += hi - lo
        n = len(kept)
        for pos in range(n):
            center = kept[pos]
            st, b = lcg_window(st, window)
            for cpos in range(max(pos - b, 0), min(pos + b + 1, n)):
                if cpos == pos:
                    continue
                targets = [kept[cpos]]
                for _ in range(n_neg):
                    for _ in range(MAX_REDRAWS):
                        st = lcg_next(st)
                        cand = int(np.searchsorted(cum_table, (st >> 16) % total_weight, side="right"))
                        if cand != center:
                            break
                    targets.append(cand)
                loss += pair_update_numpy(syn0, syn1, center, targets, lr)
                pairs += 1
    return loss, pairs, st
