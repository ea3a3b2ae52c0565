"""Batched numeric kernels.

Every kernel has a loop implementation compiled by numba and a pure numpy
implementation. Both evaluate the same floating-point operations in the
same order, so they agree bit for bit (checked in the test-suite). The
public ``*_batch`` functions dispatch on :data:`momentforge._accel.USE_NUMBA`.
"""
import math

import numpy as np

from . import _accel
from ._accel import njit
from .errors import ConvergenceFailure

EPS = np.finfo(np.float64).eps


# -- Skibinsky triangular recursion -----------------------------------------

@njit
def _skibinsky_rows(z, out):
    n_rows, K = z.shape
    col = np.empty(K + 1)
    for r in range(n_rows):
        col[0] = 1.0
        for i in range(1, K + 1):
            col[i] = 0.0
        # col holds column j of g in place: col[i] = g_{i,j}
        for j in range(1, K + 1):
            for i in range(1, j + 1):
                col[i] = col[i] + z[r, j - i] * col[i - 1]
            out[r, j - 1] = col[j]


def _skibinsky_numpy(z):
    N, K = z.shape
    col = np.zeros((K + 1, N))
    col[0] = 1.0
    out = np.empty((N, K))
    for j in range(1, K + 1):
        for i in range(1, j + 1):
            col[i] = col[i] + z[:, j - i] * col[i - 1]
        out[:, j - 1] = col[j]
    return out


def skibinsky_batch(z):
    """Moments ``m_1..m_K`` for each row of z-parameters, shape (N, K)."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise ValueError("expected a 2-d array of z-parameters")
    if _accel.USE_NUMBA:
        out = np.empty(z.shape)
        _skibinsky_rows(z, out)
        return out
    return _skibinsky_numpy(z)


# -- <e1, T^j e1> for monic tridiagonal T -----------------------------------

@njit
def _tridiag_moments_rows(d, s, K, out):
    n_rows, n = d.shape
    L = min(n, K // 2 + 1)
    v = np.empty(L)
    w = np.empty(L)
    for r in range(n_rows):
        for i in range(L):
            v[i] = 0.0
        v[0] = 1.0
        for j in range(K):
            for i in range(L):
                acc = d[r, i] * v[i]
                if i + 1 < L:
                    acc = acc + v[i + 1]
                if i > 0:
                    acc = acc + s[r, i - 1] * v[i - 1]
                w[i] = acc
            for i in range(L):
                v[i] = w[i]
            out[r, j] = v[0]


def _tridiag_moments_numpy(d, s, K):
    N, n = d.shape
    L = min(n, K // 2 + 1)
    v = np.zeros((N, L))
    v[:, 0] = 1.0
    dd = d[:, :L]
    ss = s[:, :L - 1]
    out = np.empty((N, K))
    for j in range(K):
        w = dd * v
        w[:, :-1] += v[:, 1:]
        w[:, 1:] += ss * v[:, :-1]
        v = w
        out[:, j] = v[:, 0]
    return out


def tridiagonal_moments_batch(d, s, K):
    """``m_j = <e1, T^j e1>``, j = 1..K, for each row.

    ``d`` (N, n) is the diagonal and ``s`` (N, n-1) the products of the
    off-diagonal pairs, i.e. recurrence coefficients ``a_k`` or squared
    symmetric off-diagonals ``c_k**2``. Only the leading ``K//2 + 1`` rows
    of each matrix are touched.
    """
    d = np.ascontiguousarray(d, dtype=np.float64)
    s = np.ascontiguousarray(s, dtype=np.float64)
    if d.ndim != 2 or s.ndim != 2 or s.shape != (d.shape[0], d.shape[1] - 1):
        raise ValueError("d must be (N, n) and s must be (N, n-1)")
    if K < 1:
        raise ValueError("K must be >= 1")
    if _accel.USE_NUMBA:
        out = np.empty((d.shape[0], K))
        _tridiag_moments_rows(d, s, K, out)
        return out
    return _tridiag_moments_numpy(d, s, K)


# -- implicit QL for symmetric tridiagonal matrices -------------------------

@njit
def _hypot(x, y):
    # explicit scaled form: CPython and numba ship different hypot routines
    x = abs(x)
    y = abs(y)
    if x < y:
        x, y = y, x
    if x == 0.0:
        return 0.0
    r = y / x
    return x * math.sqrt(1.0 + r * r)


@njit
def _tql(d, e, z, max_iter):
    """Implicit-shift QL on (d, e) in place, rotating the rows of ``z``.

    ``e[k]`` couples ``d[k]`` and ``d[k+1]``; ``e[n-1]`` is scratch. On exit
    ``d`` holds the eigenvalues (unsorted) and column i of ``z`` has been
    multiplied by the accumulated rotations, so with ``z`` = the first row
    of the identity it ends as the first components of the eigenvectors.
    Returns 0 on success or the 1-based index of a non-converged eigenvalue.
    """
    n = d.shape[0]
    rows = z.shape[0]
    if n == 1:
        return 0
    e[n - 1] = 0.0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                return l + 1
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = _hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            deflated = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = _hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(rows):
                    f = z[k, i + 1]
                    z[k, i + 1] = s * z[k, i] + c * f
                    z[k, i] = c * z[k, i] - s * f
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


@njit
def _spectral_rows(d, c, max_iter, atoms, weights):
    n_rows, n = d.shape
    dd = np.empty(n)
    ee = np.empty(n)
    z = np.empty((1, n))
    for r in range(n_rows):
        for i in range(n):
            dd[i] = d[r, i]
            z[0, i] = 0.0
        for i in range(n - 1):
            ee[i] = c[r, i]
        z[0, 0] = 1.0
        status = _tql(dd, ee, z, max_iter)
        if status != 0:
            return r + 1
        order = np.argsort(dd)
        total = 0.0
        for i in range(n):
            total += z[0, i] * z[0, i]
        for i in range(n):
            atoms[r, i] = dd[order[i]]
            weights[r, i] = z[0, order[i]] * z[0, order[i]] / total
    return 0


def spectral_batch(d, c, max_iter=60):
    """Atoms and weights of the spectral measure at e1, one row per matrix.

    Returns ``(atoms, weights)``; atoms sorted ascending per row, weights
    renormalized to sum to one.
    """
    d = np.ascontiguousarray(d, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.float64)
    if d.ndim != 2 or c.shape != (d.shape[0], d.shape[1] - 1):
        raise ValueError("d must be (N, n) and c must be (N, n-1)")
    atoms = np.empty(d.shape)
    weights = np.empty(d.shape)
    if _accel.USE_NUMBA:
        status = _spectral_rows(d, c, max_iter, atoms, weights)
    else:
        status = _spectral_rows_py(d, c, max_iter, atoms, weights)
    if status:
        raise ConvergenceFailure(
            f"QL iteration did not converge within {max_iter} sweeps (matrix {status - 1})")
    return atoms, weights


def _spectral_rows_py(d, c, max_iter, atoms, weights):
    tql = _tql.py_func
    n = d.shape[1]
    for r in range(d.shape[0]):
        dd = d[r].copy()
        ee = np.zeros(n)
        ee[:n - 1] = c[r]
        z = np.zeros((1, n))
        z[0, 0] = 1.0
        if tql(dd, ee, z, max_iter):
            return r + 1
        order = np.argsort(dd)
        w = z[0] * z[0]
        total = 0.0
        for v in w:  # sequential, as in the compiled loop (np.sum is pairwise)
            total += v
        atoms[r] = dd[order]
        weights[r] = w[order] / total
    return 0


def tridiagonal_eigh(d, c, max_iter=60):
    """Full eigen-decomposition of one symmetric tridiagonal matrix.

    Returns ascending eigenvalues and the matrix whose columns are the
    matching orthonormal eigenvectors.
    """
    d = np.array(d, dtype=np.float64)
    n = d.shape[0]
    e = np.zeros(n)
    e[:n - 1] = np.asarray(c, dtype=np.float64)
    z = np.eye(n)
    tql = _tql if _accel.USE_NUMBA else _tql.py_func
    if tql(d, e, z, max_iter):
        raise ConvergenceFailure(f"QL iteration did not converge within {max_iter} sweeps")
    order = np.argsort(d)
    return d[order], z[:, order]
