"""Pure numpy implementation of the replicate kernels.

Used when the compiled extension is unavailable (or forced with
``EMPCP_PURE_PYTHON=1``). Signatures and results match ``_kernels.pyx``.

Conventions shared by both backends
-----------------------------------
``ind[l, i, q]`` is ``1(obs i <= obs q)`` in direction ``l`` (``uint8``),
``counts[l, k, q]`` the prefix count ``C^l_k(q)`` (``float64``,
``k = 0..n``), and each row of ``xi`` is one replicate's multipliers.
For every replicate and split ``k`` the kernels return

    sq[k-1]  = sum_{l,q} w_k(l,q)^2 / (m n^4)
    sup[k-1] = max_{l,q} |w_k(l,q)| / n^{3/2}

with ``w_k = (n-k) * head_k - k * tail_k`` and head/tail the multiplier
sums before and after ``k`` (check: ``xi_i (1(.) - F_n)``; hat:
``(xi_i - mean) 1(.)`` with prefix/suffix means).
"""
from __future__ import annotations

import numpy as np

# bound on chunk * n * n doubles held at once
_MAX_CELLS = 1 << 21


def _chunks(J: int, n: int):
    step = max(1, _MAX_CELLS // max(1, n * n))
    for lo in range(0, J, step):
        yield slice(lo, min(J, lo + step))


def check_profiles(ind, counts, xi):
    ind = np.asarray(ind)
    counts = np.asarray(counts, dtype=float)
    xi = np.asarray(xi, dtype=float)
    m, n, _ = ind.shape
    J = xi.shape[0]
    k = np.arange(1, n, dtype=float)
    sq = np.zeros((J, n - 1))
    sup = np.zeros((J, n - 1))
    for sl in _chunks(J, n):
        x = xi[sl]
        csum = np.cumsum(x, axis=1)
        for l in range(m):
            F = counts[l, n] / n
            P = np.cumsum(x[:, :, None] * ind[l][None, :, :], axis=1)
            head = P[:, : n - 1, :] - F[None, None, :] * csum[:, : n - 1, None]
            total = P[:, n - 1, :] - F[None, :] * csum[:, n - 1, None]
            tail = total[:, None, :] - head
            w = (n - k)[None, :, None] * head - k[None, :, None] * tail
            sq[sl] += np.sum(w * w, axis=2)
            np.maximum(sup[sl], np.max(np.abs(w), axis=2), out=sup[sl])
    return sq / (m * float(n) ** 4), sup / float(n) ** 1.5


def hat_profiles(ind, counts, xi):
    ind = np.asarray(ind)
    counts = np.asarray(counts, dtype=float)
    xi = np.asarray(xi, dtype=float)
    m, n, _ = ind.shape
    J = xi.shape[0]
    k = np.arange(1, n, dtype=float)
    sq = np.zeros((J, n - 1))
    sup = np.zeros((J, n - 1))
    for sl in _chunks(J, n):
        # centring is shift invariant; shifting by xi_1 makes constants vanish exactly
        delta = xi[sl] - xi[sl, :1]
        dsum = np.cumsum(delta, axis=1)
        head_mean = dsum[:, : n - 1] / k
        tail_mean = (dsum[:, n - 1 :] - dsum[:, : n - 1]) / (n - k)
        for l in range(m):
            C = counts[l, 1:n, :]
            Cn = counts[l, n, :]
            P = np.cumsum(delta[:, :, None] * ind[l][None, :, :], axis=1)
            Pk = P[:, : n - 1, :]
            head = Pk - head_mean[:, :, None] * C[None]
            tail = (P[:, n - 1, None, :] - Pk) - tail_mean[:, :, None] * (Cn - C)[None]
            w = (n - k)[None, :, None] * head - k[None, :, None] * tail
            sq[sl] += np.sum(w * w, axis=2)
            np.maximum(sup[sl], np.max(np.abs(w), axis=2), out=sup[sl])
    return sq / (m * float(n) ** 4), sup / float(n) ** 1.5


def sim_profiles(u):
    """Univariate S/T profiles of each row of ``u`` (one sample per row)."""
    u = np.asarray(u, dtype=float)
    J, n = u.shape
    k = np.arange(1, n, dtype=float)
    sq = np.empty((J, n - 1))
    sup = np.empty((J, n - 1))
    for sl in _chunks(J, n):
        x = u[sl]
        C = np.cumsum(x[:, :, None] <= x[:, None, :], axis=1, dtype=np.int64)
        Ck = C[:, : n - 1, :]
        Cn = C[:, n - 1, None, :]
        diff = Ck / k[None, :, None] - (Cn - Ck) / (n - k)[None, :, None]
        sq[sl] = np.sum(diff * diff, axis=2)
        sup[sl] = np.max(np.abs(diff), axis=2)
    return (k * (n - k)) ** 2 / float(n) ** 4 * sq, k * (n - k) / float(n) ** 1.5 * sup
