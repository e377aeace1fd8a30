"""Reference kernels in numpy. Used when the compiled extension is absent."""
import numpy as np

PIVOT_TOL = 1e-12


class SingularSystemError(ArithmeticError):
    """Gaussian elimination met a pivot below tolerance."""


def backup(P, C, gamma, v):
    q = C + gamma * (P @ v)
    return q.min(axis=1), q


def policy_sweeps(P_pi, c_pi, gamma, v, sweeps):
    v = np.array(v, dtype=float)
    for _ in range(sweeps):
        v = c_pi + gamma * (P_pi @ v)
    return v


def gauss_solve(A, b):
    """Solve ``A x = b`` by elimination with partial pivoting."""
    a = np.array(A, dtype=float)
    x = np.array(b, dtype=float)
    n = a.shape[0]
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) < PIVOT_TOL:
            raise SingularSystemError(f"pivot {a[p, k]:.3g} in column {k}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            x[[k, p]] = x[[p, k]]
        f = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(f, a[k, k:])
        x[k + 1:] -= f * x[k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x


def pivot(T, r, c):
    """In-place Gauss-Jordan pivot of tableau ``T`` on entry (r, c)."""
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
