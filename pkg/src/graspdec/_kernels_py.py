"""Pure-numpy implementations of the hot kernels.

These are the reference semantics; the Cython module ``_ckernels``
implements the same contracts for speed. ``graspdec.kernels`` picks one
at import time.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import median_filter

BACKEND = "python"


def nearest_label_scan(pool, query, excluded, trial_ids, seg_indices):
    """Index of the admissible pool row with the smallest MSE to ``query``.

    Ties are broken by ascending ``(trial_id, segment_index)``. Returns -1
    when every row is excluded.

    Parameters
    ----------
    pool : (n, d) float64 array
    query : (d,) float64 array
    excluded : (n,) uint8 array, nonzero rows are skipped
    trial_ids, seg_indices : (n,) int64 arrays, tie-break keys
    """
    keep = excluded == 0
    if not np.any(keep):
        return -1
    idx = np.flatnonzero(keep)
    d = ((pool[idx] - query) ** 2).mean(axis=1)
    # lexsort: last key is primary
    order = np.lexsort((seg_indices[idx], trial_ids[idx], d))
    return int(idx[order[0]])


def median_filter_rows(x, k):
    """Per-row sliding median with edge replication; ``k`` must be odd."""
    if k == 1:
        return x.copy()
    return median_filter(x, size=(1, k), mode="nearest")


def hinge_svm(X, y, alpha, lam, max_iter, tol):
    """Full-batch projected subgradient descent on the weighted hinge loss.

    Minimizes  0.5*lam*||w||^2 + sum_i alpha_i * max(0, 1 - y_i*(w.x_i + b))
    with step size 1/(lam*t) and projection of ``w`` onto the ball of
    radius sqrt(2/lam). Deterministic: fixed zero start, fixed schedule.

    Returns
    -------
    w : (d,) float64
        Best-objective iterate seen.
    b : float
    objective : (n_iter,) float64
        Best objective after each iteration; non-increasing by construction.
    """
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    ay = alpha * y
    radius = np.sqrt(2.0 / lam)

    best_w = w.copy()
    best_b = b
    best_obj = float(alpha.sum())  # hinge at the zero iterate
    trace = np.empty(max_iter)

    n_iter = 0
    for t in range(1, max_iter + 1):
        margins = y * (X @ w + b)
        viol = margins < 1.0
        obj = 0.5 * lam * float(w @ w) + float(alpha @ np.maximum(0.0, 1.0 - margins))
        if obj < best_obj:
            best_obj = obj
            best_w = w.copy()
            best_b = b
        trace[t - 1] = best_obj
        n_iter = t

        gw = lam * w - X.T @ (ay * viol)
        gb = -float(ay @ viol)
        gnorm = np.sqrt(float(gw @ gw) + gb * gb)
        if gnorm <= tol:
            break

        eta = 1.0 / (lam * t)
        w = w - eta * gw
        b = b - eta * gb
        nw = np.sqrt(float(w @ w))
        if nw > radius:
            w *= radius / nw

    return best_w, best_b, trace[:n_iter].copy()
