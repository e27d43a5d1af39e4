"""Numba-compiled training inner loops.

All steps operate in float32 on shared parameter matrices and draw
randomness from an explicit xorshift64* state, so single-worker runs are
bit-reproducible. Kernels are compiled with ``nogil`` so multi-worker
training gets real thread parallelism.
"""

from __future__ import annotations

import numpy as np
from numba import njit

SIGMOID_CLAMP = 6.0
ATTENTION_CLAMP = 50.0
SIGMOID_TABLE_SIZE = 1000

# Precomputed sigmoid lookup table over [-6, 6], word2vec style.
_x = (np.arange(SIGMOID_TABLE_SIZE) + 0.5) / SIGMOID_TABLE_SIZE * 12.0 - 6.0
SIGMOID_TABLE = (1.0 / (1.0 + np.exp(-_x))).astype(np.float64)
del _x

# Mode codes shared with the trainer.
MODE_SG = 0
MODE_CBOW = 1
MODE_SG_DI = 2
MODE_CBOW_DA = 3


def seed_state(seed: int) -> np.uint64:
    """Derive a nonzero 64-bit rng state from a seed via splitmix64."""
    z = (seed + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    z = z ^ (z >> 31)
    return np.uint64(z if z != 0 else 0x106689D45497FDB5)


@njit(inline="always")
def _rng_next(state):
    state ^= state >> np.uint64(12)
    state ^= state << np.uint64(25)
    state ^= state >> np.uint64(27)
    return state


@njit(inline="always")
def _rng_uniform(state):
    state = _rng_next(state)
    x = state * np.uint64(0x2545F4914F6CDD1D)
    return state, (x >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def sigmoid(x, table, use_table):
    """Logistic function with inputs clamped to [-6, 6] before evaluation."""
    if x > SIGMOID_CLAMP:
        x = SIGMOID_CLAMP
    elif x < -SIGMOID_CLAMP:
        x = -SIGMOID_CLAMP
    if use_table:
        i = int((x + SIGMOID_CLAMP) / (2.0 * SIGMOID_CLAMP) * SIGMOID_TABLE_SIZE)
        if i >= SIGMOID_TABLE_SIZE:
            i = SIGMOID_TABLE_SIZE - 1
        return table[i]
    return 1.0 / (1.0 + np.exp(-x))


@njit(inline="always")
def _dot(mat_a, ra, mat_b, rb):
    s = 0.0
    for j in range(mat_a.shape[1]):
        s += mat_a[ra, j] * mat_b[rb, j]
    return s


@njit(cache=True)
def pair_lookup(keys, vocab_size, u, w):
    """1.0 iff the unordered pair (u, w) is in the sorted key array."""
    if u == w or keys.size == 0:
        return 0.0
    if u < w:
        key = np.int64(u) * vocab_size + w
    else:
        key = np.int64(w) * vocab_size + u
    i = np.searchsorted(keys, key)
    if i < keys.size and keys[i] == key:
        return 1.0
    return 0.0


@njit(inline="always")
def _draw_negative(cum, target, state):
    """Sample from the unigram table, redrawing a hit on the positive target.

    Returns -1 after 8 failed redraws (the sample is skipped).
    """
    total = cum[cum.size - 1]
    for _ in range(8):
        state, u = _rng_uniform(state)
        cand = np.searchsorted(cum, u * total, side="right")
        if cand != target:
            return cand, state
    return -1, state


@njit(nogil=True, cache=True)
def sg_step(inp, out, center, target, lr, negatives, cum, state, sig_table, use_table):
    """One skip-gram negative-sampling step for a (center, context) pair.

    Positive update on (input[center], output[target]) plus ``negatives``
    sampled updates. The center gradient is accumulated and applied once
    at the end. Returns (rng state, positive-pair sigma).
    """
    dim = inp.shape[1]
    neu1e = np.zeros(dim, dtype=np.float32)
    pos_sigma = 0.0
    for k in range(negatives + 1):
        if k == 0:
            tgt = target
            label = 1.0
        else:
            tgt, state = _draw_negative(cum, target, state)
            if tgt < 0:
                continue
            label = 0.0
        f = sigmoid(_dot(inp, center, out, tgt), sig_table, use_table)
        if k == 0:
            pos_sigma = f
        g = np.float32(lr * (label - f))
        for j in range(dim):
            neu1e[j] += g * out[tgt, j]
        for j in range(dim):
            out[tgt, j] += g * inp[center, j]
    for j in range(dim):
        inp[center, j] += neu1e[j]
    return state, pos_sigma


@njit(nogil=True, cache=True)
def indicator_step(inp, ind, center, context_word, d_label, scaled_lr, sig_table, use_table):
    """Coupled indicator-channel update toward sigma(input.indicator) = D.

    Both vectors are updated simultaneously from their old values.
    Returns the pre-update sigma.
    """
    dim = inp.shape[1]
    s = sigmoid(_dot(inp, center, ind, context_word), sig_table, use_table)
    g = np.float32(scaled_lr * (d_label - s))
    for j in range(dim):
        old = inp[center, j]
        inp[center, j] += g * ind[context_word, j]
        ind[context_word, j] += g * old
    return s


@njit(nogil=True, cache=True)
def attention_weights(out, inp, center, ctx, n_ctx, pair_keys, vocab_size, weights):
    """Domain-attention weights over a context window, written into ``weights``.

    raw_i = exp(x_i - m) + k_i * exp(-m) with x_i = output[center].input[ctx_i]
    clamped to +-50 and m = max_i x_i; weights are raw_i normalized over the
    window, so they are strictly positive and sum to 1, and the k term
    preserves the unshifted numerator ratios exactly.
    """
    m = -1e308
    for i in range(n_ctx):
        x = _dot(out, center, inp, ctx[i])
        if x > ATTENTION_CLAMP:
            x = ATTENTION_CLAMP
        elif x < -ATTENTION_CLAMP:
            x = -ATTENTION_CLAMP
        weights[i] = x
        if x > m:
            m = x
    em = np.exp(-m)
    total = 0.0
    for i in range(n_ctx):
        k = pair_lookup(pair_keys, vocab_size, center, ctx[i])
        raw = np.exp(weights[i] - m) + k * em
        weights[i] = raw
        total += raw
    for i in range(n_ctx):
        weights[i] /= total


@njit(nogil=True, cache=True)
def cbow_step(inp, out, center, ctx, n_ctx, weights, use_weights, lr, negatives, cum,
              state, sig_table, use_table):
    """One CBOW step: project context, update against center, redistribute.

    Projection h is the plain sum of context input vectors, or the
    attention-weighted sum when ``use_weights``. The accumulated
    input-side gradient goes back equally (CBOW) or scaled by each
    word's weight (CBOW-DA; weights held constant for the step).
    """
    dim = inp.shape[1]
    h = np.zeros(dim, dtype=np.float32)
    for i in range(n_ctx):
        w = np.float32(weights[i]) if use_weights else np.float32(1.0)
        for j in range(dim):
            h[j] += w * inp[ctx[i], j]
    neu1e = np.zeros(dim, dtype=np.float32)
    pos_sigma = 0.0
    for k in range(negatives + 1):
        if k == 0:
            tgt = center
            label = 1.0
        else:
            tgt, state = _draw_negative(cum, center, state)
            if tgt < 0:
                continue
            label = 0.0
        x = 0.0
        for j in range(dim):
            x += h[j] * out[tgt, j]
        f = sigmoid(x, sig_table, use_table)
        if k == 0:
            pos_sigma = f
        g = np.float32(lr * (label - f))
        for j in range(dim):
            neu1e[j] += g * out[tgt, j]
        for j in range(dim):
            out[tgt, j] += g * h[j]
    for i in range(n_ctx):
        w = np.float32(weights[i]) if use_weights else np.float32(1.0)
        for j in range(dim):
            inp[ctx[i], j] += w * neu1e[j]
    return state, pos_sigma


@njit(nogil=True, cache=True)
def train_shard(ids, offsets, sent_begin, sent_end, inp, out, ind, cum, pair_keys,
                vocab_size, mode, window, negatives, dynamic, keep_prob, use_subsample,
                lr0, min_lr, indicator_weight, processed0, total_scheduled, state,
                sig_table, use_table, stats):
    """Train one corpus shard (sentence range [sent_begin, sent_end)).

    ``stats`` accumulates [positive steps, positive sigma sum, indicator
    steps, indicator sigma sum, tokens processed] in place. Returns the
    final rng state.
    """
    max_len = 0
    for s in range(sent_begin, sent_end):
        n = offsets[s + 1] - offsets[s]
        if n > max_len:
            max_len = n
    buf = np.empty(max_len, dtype=np.int32)
    ctx = np.empty(2 * window, dtype=np.int32)
    weights = np.empty(2 * window, dtype=np.float64)
    use_pairs = pair_keys.size > 0
    processed = processed0
    for s in range(sent_begin, sent_end):
        n = 0
        for p in range(offsets[s], offsets[s + 1]):
            wid = ids[p]
            if use_subsample:
                state, u = _rng_uniform(state)
                if u >= keep_prob[wid]:
                    continue
            buf[n] = wid
            n += 1
        for t in range(n):
            processed += 1
            lr = lr0 * (1.0 - processed / total_scheduled)
            if lr < min_lr:
                lr = min_lr
            b = window
            if dynamic:
                state = _rng_next(state)
                b = 1 + int(state % np.uint64(window))
            lo = t - b
            if lo < 0:
                lo = 0
            hi = t + b + 1
            if hi > n:
                hi = n
            center = buf[t]
            if mode == MODE_SG or mode == MODE_SG_DI:
                for j in range(lo, hi):
                    if j == t:
                        continue
                    ctx_word = buf[j]
                    state, sig = sg_step(inp, out, center, ctx_word, lr, negatives,
                                         cum, state, sig_table, use_table)
                    stats[0] += 1.0
                    stats[1] += sig
                    # self-pairs are outside the pair table's domain (no
                    # (w, w) entries), so they carry no indicator signal
                    if mode == MODE_SG_DI and use_pairs and center != ctx_word:
                        d = pair_lookup(pair_keys, vocab_size, center, ctx_word)
                        isig = indicator_step(inp, ind, center, ctx_word, d,
                                              lr * indicator_weight, sig_table, use_table)
                        stats[2] += 1.0
                        stats[3] += isig
            else:
                n_ctx = 0
                for j in range(lo, hi):
                    if j != t:
                        ctx[n_ctx] = buf[j]
                        n_ctx += 1
                if n_ctx == 0:
                    continue
                use_weights = mode == MODE_CBOW_DA
                if use_weights:
                    attention_weights(out, inp, center, ctx, n_ctx, pair_keys,
                                      vocab_size, weights)
                state, sig = cbow_step(inp, out, center, ctx, n_ctx, weights,
                                       use_weights, lr, negatives, cum, state,
                                       sig_table, use_table)
                stats[0] += 1.0
                stats[1] += sig
    stats[4] += processed - processed0
    return state
