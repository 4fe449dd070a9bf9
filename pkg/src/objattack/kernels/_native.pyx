# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the linear-softmax oracle and its fused attack loop.

Semantics mirror kernels._pure exactly: same probe order, same budget
accounting, same clamp-and-nudge step rule. The only differences are
last-ulp rounding in the matvec/softmax, which the test suite pins down.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, nextafter

cnp.import_array()


cdef void _probs_into(const double[:, ::1] W, const double[::1] b,
                      const double[::1] x, double[::1] out) noexcept nogil:
    # eight independent accumulators break the FP-add dependency chain so the
    # compiler can vectorize; the summation order is fixed (lanes, then a
    # balanced tree, then the tail) and shared by every caller in this module,
    # keeping all compiled entry points mutually bit-consistent
    cdef Py_ssize_t K = W.shape[0]
    cdef Py_ssize_t M = W.shape[1]
    cdef Py_ssize_t k, j
    cdef Py_ssize_t tail = M - (M % 8)
    cdef double s0, s1, s2, s3, s4, s5, s6, s7, s, zmax, total
    for k in range(K):
        s0 = s1 = s2 = s3 = s4 = s5 = s6 = s7 = 0.0
        for j in range(0, tail, 8):
            s0 += W[k, j] * x[j]
            s1 += W[k, j + 1] * x[j + 1]
            s2 += W[k, j + 2] * x[j + 2]
            s3 += W[k, j + 3] * x[j + 3]
            s4 += W[k, j + 4] * x[j + 4]
            s5 += W[k, j + 5] * x[j + 5]
            s6 += W[k, j + 6] * x[j + 6]
            s7 += W[k, j + 7] * x[j + 7]
        s = ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7))
        for j in range(tail, M):
            s += W[k, j] * x[j]
        out[k] = s + b[k]
    zmax = out[0]
    for k in range(1, K):
        if out[k] > zmax:
            zmax = out[k]
    total = 0.0
    for k in range(K):
        out[k] = exp(out[k] - zmax)
        total += out[k]
    for k in range(K):
        out[k] /= total


cdef Py_ssize_t _argmax(const double[::1] v) noexcept nogil:
    # first index of the maximum, matching np.argmax tie-breaking
    cdef Py_ssize_t best = 0
    cdef Py_ssize_t k
    for k in range(1, v.shape[0]):
        if v[k] > v[best]:
            best = k
    return best


cdef double _step_value(double old, double alpha) noexcept nogil:
    # add-and-clamp with the achieved delta nudged to satisfy |delta| <= |alpha|
    cdef double new = old + alpha
    cdef double bound = fabs(alpha)
    if new > 1.0:
        new = 1.0
    elif new < 0.0:
        new = 0.0
    while fabs(new - old) > bound:
        new = nextafter(new, old)
    return new


def step_value(double old, double alpha):
    """Python-visible wrapper over the C step rule, for cross-checking."""
    return _step_value(old, alpha)


def linear_probs(W, b, x):
    """Softmax of W @ x + b."""
    cdef const double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(Wv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        _probs_into(Wv, bv, xv, ov)
    return out


def linear_attack(W, b, x0, coords, double mu, long long max_queries,
                  long long expected_class):
    """Fused attack loop. Same contract as kernels._pure.linear_attack."""
    cdef const double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    x_arr = np.array(x0, dtype=np.float64, copy=True)
    cdef double[::1] x = x_arr
    cdef const long long[::1] cv = np.ascontiguousarray(coords, dtype=np.int64)

    cdef Py_ssize_t K = Wv.shape[0]
    cdef Py_ssize_t n_coords = cv.shape[0]
    probs_arr = np.empty(K, dtype=np.float64)
    cdef double[::1] probs = probs_arr
    acc_idx_arr = np.empty(n_coords, dtype=np.int64)
    acc_delta_arr = np.empty(n_coords, dtype=np.float64)
    cdef long long[::1] acc_idx = acc_idx_arr
    cdef double[::1] acc_delta = acc_delta_arr

    cdef long long queries = 1
    cdef Py_ssize_t iterations = 0, n_acc = 0
    cdef Py_ssize_t t, j, a
    cdef double old, p, alpha
    cdef bint success = False

    _probs_into(Wv, bv, x, probs)
    cdef Py_ssize_t initial_pred = _argmax(probs)
    if initial_pred != expected_class:
        return (x_arr, acc_idx_arr[:0], acc_delta_arr[:0], queries, 0, False,
                0.0, int(initial_pred))
    p = probs[expected_class]

    with nogil:
        for t in range(n_coords):
            if queries >= max_queries:
                break
            iterations += 1
            j = cv[t]
            old = x[j]
            for a in range(2):
                alpha = mu if a == 0 else -mu
                x[j] = _step_value(old, alpha)
                _probs_into(Wv, bv, x, probs)
                queries += 1
                if probs[expected_class] < p:
                    p = probs[expected_class]
                    acc_idx[n_acc] = j
                    acc_delta[n_acc] = x[j] - old
                    n_acc += 1
                    if _argmax(probs) != expected_class:
                        success = True
                    break
                x[j] = old
                if queries >= max_queries:
                    break
            if success:
                break

    return (
        x_arr,
        acc_idx_arr[:n_acc].copy(),
        acc_delta_arr[:n_acc].copy(),
        int(queries),
        int(iterations),
        bool(success),
        float(p),
        int(initial_pred),
    )
