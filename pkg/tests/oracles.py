"""Independent reference implementations used to pin expected test values.

Everything here computes by a different route than the library (explicit
loops, extended precision, interior-point optimization, series
truncation) and depends only on raw Python/numpy data, never on the
package internals it is checking.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def margin_by_loops(values, d):
    """Partial sums over dimension d by explicit elementwise iteration."""
    arr = np.asarray(values, dtype=float)
    out = np.zeros(arr.shape[:d] + arr.shape[d + 1 :])
    for idx in itertools.product(*(range(n) for n in arr.shape)):
        out[idx[:d] + idx[d + 1 :]] += arr[idx]
    return out


def frobenius_by_loops(a, b):
    """Frobenius distance by scalar accumulation."""
    total = 0.0
    for x, y in zip(np.asarray(a, dtype=float).ravel(), np.asarray(b, dtype=float).ravel()):
        total += (float(x) - float(y)) ** 2
    return math.sqrt(total)


def margin_residual_by_loops(values, targets):
    """Quadratic margin mismatch by scalar accumulation."""
    total = 0.0
    for d, u in enumerate(targets):
        diff = margin_by_loops(values, d) - np.asarray(u, dtype=float)
        for v in diff.ravel():
            total += float(v) ** 2
    return math.sqrt(total)


def ipf_2d_extended_precision(m, row_totals, col_totals, dps=60, tol="1e-45"):
    """Straight-line 2-D proportional fitting in arbitrary-precision arithmetic.

    Alternates exact row and column scalings until the quadratic margin
    residual drops below ``tol``; returns the fixed point as float64.
    """
    from mpmath import mp, mpf, sqrt as msqrt

    with mp.workdps(dps):
        x = [[mpf(v) for v in row] for row in m]
        rows = [mpf(v) for v in row_totals]
        cols = [mpf(v) for v in col_totals]
        n_r, n_c = len(rows), len(cols)
        threshold = mpf(tol)

        def residual():
            acc = mpf(0)
            for i in range(n_r):
                acc += (sum(x[i]) - rows[i]) ** 2
            for j in range(n_c):
                acc += (sum(x[i][j] for i in range(n_r)) - cols[j]) ** 2
            return msqrt(acc)

        for _ in range(100_000):
            for i in range(n_r):
                s = sum(x[i])
                for j in range(n_c):
                    x[i][j] *= rows[i] / s
            for j in range(n_c):
                s = sum(x[i][j] for i in range(n_r))
                for i in range(n_r):
                    x[i][j] *= cols[j] / s
            if residual() < threshold:
                break
        return np.array([[float(v) for v in row] for row in x])


def kl_projection(m, margins):
    """KL projection of ``m`` onto the margin constraints by interior point.

    Minimizes sum x * log(x / m) subject to the margin equalities, solved
    with cvxpy/CLARABEL at tight tolerances. ``margins[d]`` is the target
    for sums over dimension d.
    """
    import cvxpy as cp

    m = np.asarray(m, dtype=float)
    shape = m.shape
    x = cp.Variable(m.size)
    constraints = []
    for d, u in enumerate(margins):
        u = np.asarray(u, dtype=float)
        agg = np.zeros((u.size, m.size))
        for idx in itertools.product(*(range(n) for n in shape)):
            flat = np.ravel_multi_index(idx, shape)
            reduced = idx[:d] + idx[d + 1 :]
            row = np.ravel_multi_index(reduced, u.shape) if u.shape else 0
            agg[row, flat] = 1.0
        constraints.append(agg @ x == u.ravel())
    problem = cp.Problem(cp.Minimize(cp.sum(cp.rel_entr(x, m.ravel()))), constraints)
    problem.solve(
        solver=cp.CLARABEL,
        tol_gap_abs=1e-12,
        tol_gap_rel=1e-12,
        tol_feas=1e-12,
        max_iter=200,
    )
    if x.value is None:
        raise RuntimeError(f"KL projection solver failed: {problem.status}")
    return np.asarray(x.value).reshape(shape)


def neumann_series(a, terms):
    """Truncated power series sum_{k=0..terms} A^k."""
    a = np.asarray(a, dtype=float)
    out = np.eye(a.shape[0])
    power = np.eye(a.shape[0])
    for _ in range(terms):
        power = power @ a
        out += power
    return out


def inverse_2x2(matrix):
    """Closed-form inverse of a 2x2 matrix."""
    (a, b), (c, d) = np.asarray(matrix, dtype=float)
    det = a * d - b * c
    return np.array([[d, -b], [-c, a]]) / det
