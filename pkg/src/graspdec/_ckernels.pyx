# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: nearest-label scan, seam median filtering, and
the full-batch hinge-loss solver. Semantics mirror ``_kernels_py``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "cython"


def nearest_label_scan(
    const double[:, ::1] pool,
    const double[::1] query,
    const unsigned char[::1] excluded,
    const long long[::1] trial_ids,
    const long long[::1] seg_indices,
):
    """Admissible pool row with the smallest MSE to ``query``; ties break
    by ascending (trial_id, segment_index). Returns -1 if all excluded."""
    cdef Py_ssize_t n = pool.shape[0]
    cdef Py_ssize_t d = pool.shape[1]
    cdef Py_ssize_t i, j
    cdef double dist, diff, best_dist = 0.0
    cdef Py_ssize_t best = -1
    cdef long long best_tid = 0, best_seg = 0

    for i in range(n):
        if excluded[i]:
            continue
        dist = 0.0
        for j in range(d):
            diff = pool[i, j] - query[j]
            dist += diff * diff
        dist /= d
        if best < 0 or dist < best_dist or (
            dist == best_dist
            and (
                trial_ids[i] < best_tid
                or (trial_ids[i] == best_tid and seg_indices[i] < best_seg)
            )
        ):
            best = i
            best_dist = dist
            best_tid = trial_ids[i]
            best_seg = seg_indices[i]
    return int(best)


def median_filter_rows(const double[:, ::1] x, int k):
    """Per-row sliding median with edge replication; ``k`` odd."""
    cdef Py_ssize_t rows = x.shape[0]
    cdef Py_ssize_t n = x.shape[1]
    out_arr = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    if k == 1:
        out_arr[:, :] = np.asarray(x)
        return out_arr

    cdef int half = k // 2
    window_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] window = window_arr
    cdef Py_ssize_t r, c, w, pos
    cdef Py_ssize_t src
    cdef double v
    for r in range(rows):
        for c in range(n):
            for w in range(k):
                src = c - half + w
                if src < 0:
                    src = 0
                elif src >= n:
                    src = n - 1
                # insertion sort into the window buffer
                v = x[r, src]
                pos = w
                while pos > 0 and window[pos - 1] > v:
                    window[pos] = window[pos - 1]
                    pos -= 1
                window[pos] = v
            out[r, c] = window[half]
    return out_arr


def hinge_svm(
    const double[:, ::1] X,
    const double[::1] y,
    const double[::1] alpha,
    double lam,
    long max_iter,
    double tol,
):
    """Full-batch projected subgradient descent on the weighted hinge loss.

    Same contract as the numpy fallback: returns the best-objective
    iterate and the non-increasing best-objective trace.
    """
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t i, j
    cdef long t, n_iter = 0

    w_arr = np.zeros(d, dtype=np.float64)
    gw_arr = np.empty(d, dtype=np.float64)
    best_w_arr = np.zeros(d, dtype=np.float64)
    trace_arr = np.empty(max_iter, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef double[::1] gw = gw_arr
    cdef double[::1] best_w = best_w_arr
    cdef double[::1] trace = trace_arr

    cdef double b = 0.0, best_b = 0.0
    cdef double best_obj = 0.0
    cdef double obj, margin, score, gb, gnorm2, eta, nw, ay, radius, wnorm2

    for i in range(n):
        best_obj += alpha[i]
    radius = sqrt(2.0 / lam)

    for t in range(1, max_iter + 1):
        obj = 0.0
        gb = 0.0
        wnorm2 = 0.0
        for j in range(d):
            gw[j] = lam * w[j]
            wnorm2 += w[j] * w[j]
        for i in range(n):
            score = b
            for j in range(d):
                score += X[i, j] * w[j]
            margin = y[i] * score
            if margin < 1.0:
                obj += alpha[i] * (1.0 - margin)
                ay = alpha[i] * y[i]
                for j in range(d):
                    gw[j] -= ay * X[i, j]
                gb -= ay
        obj += 0.5 * lam * wnorm2

        if obj < best_obj:
            best_obj = obj
            for j in range(d):
                best_w[j] = w[j]
            best_b = b
        trace[t - 1] = best_obj
        n_iter = t

        gnorm2 = gb * gb
        for j in range(d):
            gnorm2 += gw[j] * gw[j]
        if sqrt(gnorm2) <= tol:
            break

        eta = 1.0 / (lam * t)
        nw = 0.0
        for j in range(d):
            w[j] -= eta * gw[j]
            nw += w[j] * w[j]
        b -= eta * gb
        nw = sqrt(nw)
        if nw > radius:
            for j in range(d):
                w[j] *= radius / nw

    return best_w_arr, float(best_b), trace_arr[:n_iter].copy()
