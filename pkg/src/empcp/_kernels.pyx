# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled replicate kernels; see ``_kernels_py`` for the exact contract.

All loops run without the GIL so callers may split replicate rows across
threads. Each replicate row is processed independently, so results do not
depend on how rows are chunked.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline void _reduce(const double* W, Py_ssize_t n, double* acc_sq, double* acc_sup) noexcept nogil:
    # four independent chains; the order is fixed so results stay reproducible
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    cdef double m0 = acc_sup[0], m1 = 0.0, m2 = 0.0, m3 = 0.0
    cdef double w
    cdef Py_ssize_t q = 0, n4 = n - n % 4
    while q < n4:
        s0 += W[q] * W[q]
        s1 += W[q + 1] * W[q + 1]
        s2 += W[q + 2] * W[q + 2]
        s3 += W[q + 3] * W[q + 3]
        w = fabs(W[q])
        if w > m0:
            m0 = w
        w = fabs(W[q + 1])
        if w > m1:
            m1 = w
        w = fabs(W[q + 2])
        if w > m2:
            m2 = w
        w = fabs(W[q + 3])
        if w > m3:
            m3 = w
        q += 4
    while q < n:
        s0 += W[q] * W[q]
        w = fabs(W[q])
        if w > m0:
            m0 = w
        q += 1
    if m1 > m0:
        m0 = m1
    if m3 > m2:
        m2 = m3
    if m2 > m0:
        m0 = m2
    acc_sq[0] += (s0 + s1) + (s2 + s3)
    acc_sup[0] = m0


cdef void _check_row(const unsigned char[:, :, ::1] ind,
                     const double[:, :, ::1] counts,
                     const double[::1] x,
                     double* csum, double* P, double* F, double* G, double* W,
                     double* acc_sq, double* acc_sup) noexcept nogil:
    cdef Py_ssize_t m = ind.shape[0], n = ind.shape[1]
    cdef Py_ssize_t l, i, q, k
    cdef double s, xk, ck, kk, nk, a
    cdef const unsigned char* row

    s = 0.0
    for i in range(n):
        s += x[i]
        csum[i] = s
    for k in range(n):
        acc_sq[k] = 0.0
        acc_sup[k] = 0.0

    for l in range(m):
        for q in range(n):
            P[q] = 0.0
            F[q] = counts[l, n, q] / n
        for i in range(n):
            xk = x[i]
            row = &ind[l, i, 0]
            for q in range(n):
                P[q] += xk * row[q]
        for q in range(n):
            G[q] = P[q] - F[q] * csum[n - 1]
            P[q] = 0.0
        for k in range(1, n):
            xk = x[k - 1]
            ck = csum[k - 1]
            kk = <double>k
            nk = <double>(n - k)
            row = &ind[l, k - 1, 0]
            for q in range(n):
                P[q] += xk * row[q]
                a = P[q] - F[q] * ck
                # (n-k) * head - k * tail, with tail = G - head
                W[q] = nk * a - kk * (G[q] - a)
            _reduce(W, n, acc_sq + k, acc_sup + k)


cdef void _hat_row(const unsigned char[:, :, ::1] ind,
                   const double[:, :, ::1] counts,
                   const double[::1] x,
                   double* dsum, double* P, double* Ptot, double* delta, double* W,
                   double* acc_sq, double* acc_sup) noexcept nogil:
    cdef Py_ssize_t m = ind.shape[0], n = ind.shape[1]
    cdef Py_ssize_t l, i, q, k
    cdef double s, dk, kk, nk, hm, tm, head, tail, c
    cdef const unsigned char* row
    cdef const double* crow
    cdef const double* cnrow

    s = 0.0
    for i in range(n):
        delta[i] = x[i] - x[0]
        s += delta[i]
        dsum[i] = s
    for k in range(n):
        acc_sq[k] = 0.0
        acc_sup[k] = 0.0

    for l in range(m):
        cnrow = &counts[l, n, 0]
        for q in range(n):
            Ptot[q] = 0.0
        for i in range(n):
            dk = delta[i]
            row = &ind[l, i, 0]
            for q in range(n):
                Ptot[q] += dk * row[q]
        for q in range(n):
            P[q] = 0.0
        for k in range(1, n):
            dk = delta[k - 1]
            kk = <double>k
            nk = <double>(n - k)
            hm = dsum[k - 1] / kk
            tm = (dsum[n - 1] - dsum[k - 1]) / nk
            row = &ind[l, k - 1, 0]
            crow = &counts[l, k, 0]
            for q in range(n):
                P[q] += dk * row[q]
                c = crow[q]
                head = P[q] - hm * c
                tail = (Ptot[q] - P[q]) - tm * (cnrow[q] - c)
                W[q] = nk * head - kk * tail
            _reduce(W, n, acc_sq + k, acc_sup + k)


def _run(kind, ind, counts, xi):
    cdef const unsigned char[:, :, ::1] ind_v = np.ascontiguousarray(ind, dtype=np.uint8)
    cdef const double[:, :, ::1] cnt_v = np.ascontiguousarray(counts, dtype=np.float64)
    cdef const double[:, ::1] xi_v = np.ascontiguousarray(xi, dtype=np.float64)
    cdef Py_ssize_t m = ind_v.shape[0], n = ind_v.shape[1]
    cdef Py_ssize_t J = xi_v.shape[0]
    if xi_v.shape[1] != n or cnt_v.shape[1] != n + 1 or cnt_v.shape[2] != n:
        raise ValueError("inconsistent kernel input shapes")
    sq = np.zeros((J, n - 1))
    sup = np.zeros((J, n - 1))
    cdef double[:, ::1] sq_v = sq
    cdef double[:, ::1] sup_v = sup
    cdef int hat = kind == "hat"
    cdef double sq_scale = 1.0 / (m * pow(<double>n, 4.0))
    cdef double sup_scale = 1.0 / pow(<double>n, 1.5)
    cdef Py_ssize_t j, k
    cdef double* buf = <double*>malloc(7 * (n + 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double* b0 = buf
    cdef double* b1 = buf + (n + 1)
    cdef double* b2 = buf + 2 * (n + 1)
    cdef double* b3 = buf + 3 * (n + 1)
    cdef double* W = buf + 4 * (n + 1)
    cdef double* acc_sq = buf + 5 * (n + 1)
    cdef double* acc_sup = buf + 6 * (n + 1)
    try:
        with nogil:
            for j in range(J):
                if hat:
                    _hat_row(ind_v, cnt_v, xi_v[j], b0, b1, b2, b3, W, acc_sq, acc_sup)
                else:
                    _check_row(ind_v, cnt_v, xi_v[j], b0, b1, b2, b3, W, acc_sq, acc_sup)
                for k in range(1, n):
                    sq_v[j, k - 1] = acc_sq[k] * sq_scale
                    sup_v[j, k - 1] = acc_sup[k] * sup_scale
    finally:
        free(buf)
    return sq, sup


def check_profiles(ind, counts, xi):
    return _run("check", ind, counts, xi)


def hat_profiles(ind, counts, xi):
    return _run("hat", ind, counts, xi)


def sim_profiles(u):
    cdef const double[:, ::1] u_v = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t J = u_v.shape[0], n = u_v.shape[1]
    sq = np.empty((J, n - 1))
    sup = np.empty((J, n - 1))
    cdef double[:, ::1] sq_v = sq
    cdef double[:, ::1] sup_v = sup
    cdef Py_ssize_t j, i, q, k
    cdef double kk, nk, ik, ink, ui, nn = <double>n
    cdef const double* x
    cdef double* buf = <double*>malloc(5 * (n + 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double* C = buf
    cdef double* Cn = buf + (n + 1)
    cdef double* W = buf + 2 * (n + 1)
    cdef double* acc_sq = buf + 3 * (n + 1)
    cdef double* acc_sup = buf + 4 * (n + 1)
    try:
        with nogil:
            for j in range(J):
                x = &u_v[j, 0]
                for q in range(n):
                    C[q] = 0.0
                    Cn[q] = 0.0
                for i in range(n):
                    ui = x[i]
                    for q in range(n):
                        Cn[q] += <double>(ui <= x[q])
                for k in range(1, n):
                    ui = x[k - 1]
                    kk = <double>k
                    nk = <double>(n - k)
                    ik = 1.0 / kk
                    ink = 1.0 / nk
                    for q in range(n):
                        C[q] += <double>(ui <= x[q])
                        W[q] = C[q] * ik - (Cn[q] - C[q]) * ink
                    acc_sq[k] = 0.0
                    acc_sup[k] = 0.0
                    _reduce(W, n, acc_sq + k, acc_sup + k)
                    sq_v[j, k - 1] = (kk * nk) * (kk * nk) / (nn * nn * nn * nn) * acc_sq[k]
                    sup_v[j, k - 1] = kk * nk / pow(nn, 1.5) * acc_sup[k]
    finally:
        free(buf)
    return sq, sup
