"""Dense two-phase simplex for the small linear programs behind CLIME.

Standard form: min c@x subject to A x = b, x >= 0.  Bland's rule (lowest
eligible index for both the entering and leaving variable) protects against
cycling, which matters here because the l1-minimization columns are highly
degenerate.  Exact and fast at desk scale; no sparsity exploited.
"""

import numpy as np

from .core import InfeasibleError, IterationLimitError

_TOL = 1e-9


def _run_simplex(T, basis, n_cols, max_iter):
    """Pivot the tableau T in place until optimal; Bland's rule throughout.

    T has shape (m+1, n_cols+1): constraint rows then the reduced-cost row,
    RHS in the last column.  Returns when no negative reduced cost remains.
    """
    m = T.shape[0] - 1
    for _ in range(max_iter):
        enter = -1
        for j in range(n_cols):
            if T[-1, j] < -_TOL:
                enter = j
                break
        if enter < 0:
            return
        leave, best = -1, np.inf
        for i in range(m):
            a = T[i, enter]
            if a > _TOL:
                ratio = T[i, -1] / a
                # ties broken by smallest basis variable index (Bland)
                if ratio < best - _TOL or (ratio < best + _TOL and (leave < 0 or basis[i] < basis[leave])):
                    leave, best = i, min(best, ratio)
        if leave < 0:
            raise IterationLimitError("objective unbounded below")
        piv = T[leave, enter]
        T[leave] /= piv
        for i in range(T.shape[0]):
            if i != leave and T[i, enter] != 0.0:
                T[i] -= T[i, enter] * T[leave]
        basis[leave] = enter
    raise IterationLimitError(f"simplex exceeded {max_iter} pivots")


def solve_standard_form(c: np.ndarray, A: np.ndarray, b: np.ndarray, max_iter: int = 20000):
    """Solve min c@x s.t. A x = b, x >= 0.  Returns (x, objective)."""
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape

    A = A.copy()
    b = b.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # phase 1: minimize the sum of artificial variables
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    basis = list(range(n, n + m))
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    _run_simplex(T, basis, n + m, max_iter)
    if T[-1, -1] < -1e-7:
        raise InfeasibleError(f"phase-1 objective {-T[-1, -1]:.3e} > 0: infeasible")

    # drive remaining artificials out of the basis; a row with no real pivot
    # is redundant and can be zeroed out harmlessly
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if abs(T[i, j]) > _TOL:
                    piv = T[i, j]
                    T[i] /= piv
                    for r in range(T.shape[0]):
                        if r != i and T[r, j] != 0.0:
                            T[r] -= T[r, j] * T[i]
                    basis[i] = j
                    break

    # phase 2 on the original columns
    T2 = np.zeros((m + 1, n + 1))
    T2[:m, :n] = T[:m, :n]
    T2[:m, -1] = T[:m, -1]
    T2[-1, :n] = c
    for i in range(m):
        if basis[i] < n and c[basis[i]] != 0.0:
            T2[-1] -= c[basis[i]] * T2[i]
    _run_simplex(T2, basis, n, max_iter)

    x = np.zeros(n)
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T2[i, -1]
    return x, float(c @ x)


def solve_l1_under_linf_band(S: np.ndarray, target: np.ndarray, gamma: float, max_iter: int = 20000):
    """Solve min |l|_1 subject to |S l - target|_inf <= gamma.

    Split variables l = u - v with u, v >= 0 and slacks for the two-sided
    band turn this into standard form.  Returns (l, |l|_1).
    """
    S = np.atleast_2d(np.asarray(S, dtype=float))
    target = np.asarray(target, dtype=float)
    d = S.shape[1]
    m = S.shape[0]
    # columns: u (d), v (d), upper slacks (m), lower slacks (m)
    A = np.zeros((2 * m, 2 * d + 2 * m))
    A[:m, :d] = S
    A[:m, d : 2 * d] = -S
    A[:m, 2 * d : 2 * d + m] = np.eye(m)
    A[m:, :d] = -S
    A[m:, d : 2 * d] = S
    A[m:, 2 * d + m :] = np.eye(m)
    b = np.concatenate([target + gamma, gamma - target])
    c = np.concatenate([np.ones(2 * d), np.zeros(2 * m)])
    x, obj = solve_standard_form(c, A, b, max_iter=max_iter)
    return x[:d] - x[d : 2 * d], obj
