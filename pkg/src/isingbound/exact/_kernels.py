"""Numba kernels for Gray-code enumeration of {-1,+1}^n.

Configurations are n-bit words, bit v set <=> spin v is +1.  The Gray-code
walk visits word ``k ^ (k >> 1)`` at step ``k``; going from step k-1 to k
flips bit ``ctz(k)``, so the exponent is updated in O(degree).

Each chunk of ``2**chunk_bits`` consecutive steps is reduced on its own
(energies buffered, max taken, weights summed relative to that max) and the
per-chunk partials are merged afterwards.  Chunks are independent, which is
what makes the parallel driver safe.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True)
def _exponent(bits, n, field, indptr, indices, weights):
    e = 0.0
    for v in range(n):
        sv = 1.0 if (bits >> v) & 1 else -1.0
        e += field[v] * sv
        acc = 0.0
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if w > v:
                sw = 1.0 if (bits >> w) & 1 else -1.0
                acc += weights[k] * sw
        e += sv * acc
    return e


@njit(cache=True)
def _chunk(c, chunk_len, n, field, indptr, indices, weights, qv, qp, energies, words):
    """Reduce one chunk.  Returns (max exponent, sum of rescaled weights,
    plus-weights per queried vertex, equal-sign weights per queried pair)."""
    start = c * chunk_len
    bits = start ^ (start >> 1)
    e = _exponent(bits, n, field, indptr, indices, weights)
    energies[0] = e
    words[0] = bits
    for i in range(1, chunk_len):
        k = start + i
        b = 0
        while not (k >> b) & 1:
            b += 1
        sb = 1.0 if (bits >> b) & 1 else -1.0
        local = field[b]
        for j in range(indptr[b], indptr[b + 1]):
            w = indices[j]
            local += weights[j] * (1.0 if (bits >> w) & 1 else -1.0)
        e -= 2.0 * sb * local
        bits ^= 1 << b
        energies[i] = e
        words[i] = bits

    m = energies[0]
    for i in range(1, chunk_len):
        if energies[i] > m:
            m = energies[i]
    nq = qv.shape[0]
    npair = qp.shape[0]
    plus = np.zeros(nq)
    same = np.zeros(npair)
    total = 0.0
    for i in range(chunk_len):
        wgt = np.exp(energies[i] - m)
        total += wgt
        word = words[i]
        for j in range(nq):
            if (word >> qv[j]) & 1:
                plus[j] += wgt
        for j in range(npair):
            if ((word >> qp[j, 0]) & 1) == ((word >> qp[j, 1]) & 1):
                same[j] += wgt
    return m, total, plus, same


@njit(cache=True)
def enumerate_serial(n, field, indptr, indices, weights, qv, qp, chunk_bits):
    cb = min(n, chunk_bits)
    chunk_len = 1 << cb
    n_chunks = 1 << (n - cb)
    maxes = np.empty(n_chunks)
    totals = np.empty(n_chunks)
    plus = np.empty((n_chunks, qv.shape[0]))
    same = np.empty((n_chunks, qp.shape[0]))
    energies = np.empty(chunk_len)
    words = np.empty(chunk_len, dtype=np.int64)
    for c in range(n_chunks):
        m, t, p, s = _chunk(c, chunk_len, n, field, indptr, indices, weights, qv, qp, energies, words)
        maxes[c] = m
        totals[c] = t
        plus[c, :] = p
        same[c, :] = s
    return maxes, totals, plus, same


@njit(cache=True, parallel=True)
def enumerate_parallel(n, field, indptr, indices, weights, qv, qp, chunk_bits):
    cb = min(n, chunk_bits)
    chunk_len = 1 << cb
    n_chunks = 1 << (n - cb)
    maxes = np.empty(n_chunks)
    totals = np.empty(n_chunks)
    plus = np.empty((n_chunks, qv.shape[0]))
    same = np.empty((n_chunks, qp.shape[0]))
    for c in prange(n_chunks):
        energies = np.empty(chunk_len)
        words = np.empty(chunk_len, dtype=np.int64)
        m, t, p, s = _chunk(c, chunk_len, n, field, indptr, indices, weights, qv, qp, energies, words)
        maxes[c] = m
        totals[c] = t
        plus[c, :] = p
        same[c, :] = s
    return maxes, totals, plus, same


def merge_chunks(maxes, totals, plus, same):
    """Associative merge of per-chunk partials, in chunk order."""
    top = maxes.max()
    scale = np.exp(maxes - top)
    z = float(np.dot(scale, totals))
    log_z = top + np.log(z)
    p = (scale @ plus) / z if plus.shape[1] else np.zeros(0)
    q = (scale @ same) / z if same.shape[1] else np.zeros(0)
    return float(log_z), p, q
