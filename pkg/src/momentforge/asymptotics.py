"""Limit laws and scaling matrices for moment central limit theorems.

Everything here is exact: integers, or :class:`fractions.Fraction` for the
dyadic entries of ``A`` and the arcsine moments. Binomial coefficients with
a negative lower index are zero throughout.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np


def binom(n: int, k: int) -> int:
    """``C(n, k)``, zero unless ``0 <= k <= n``."""
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


# -- limit moments -------------------------------------------------------------

def catalan(k: int) -> int:
    if k < 0:
        raise ValueError("k must be non-negative")
    return comb(2 * k, k) // (k + 1)


def _check_k(k):
    if k < 1:
        raise ValueError("k must be >= 1")


def mp_moments(k: int) -> tuple:
    """Marchenko-Pastur moments ``m_j = c_j``, ``j = 1..k``."""
    _check_k(k)
    return tuple(catalan(j) for j in range(1, k + 1))


def semicircle_moments(k: int) -> tuple:
    """Moments of the semicircle on ``[-2, 2]``: ``c_{j/2}`` for even j, else 0."""
    _check_k(k)
    return tuple(catalan(j // 2) if j % 2 == 0 else 0 for j in range(1, k + 1))


def arcsine_moments(k: int, a=0, b=1) -> tuple:
    """Moments of the arcsine law on ``[a, b]``.

    On ``[0, 1]`` these are ``C(2j, j) / 4^j``; other intervals follow by
    the binomial expansion of ``x -> a + (b - a) x``.
    """
    _check_k(k)
    unit = [Fraction(comb(2 * j, j), 4 ** j) for j in range(0, k + 1)]
    exact = all(isinstance(v, (int, Fraction)) for v in (a, b))
    a = Fraction(a) if exact else float(a)
    w = (Fraction(b) if exact else float(b)) - a
    out = []
    for kk in range(1, k + 1):
        out.append(sum(comb(kk, j) * a ** (kk - j) * w ** j * unit[j] for j in range(kk + 1)))
    return tuple(out)


@dataclass(frozen=True)
class LimitMoments:
    variant: str
    values: tuple
    interval: tuple = None

    def as_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])


def limit_moments(variant: str, k: int, interval=(0, 1)) -> LimitMoments:
    """``variant`` is ``'arcsine'``, ``'marchenko_pastur'`` or ``'semicircle'``."""
    if variant == "arcsine":
        return LimitMoments(variant, arcsine_moments(k, *interval), tuple(interval))
    if variant == "marchenko_pastur":
        return LimitMoments(variant, mp_moments(k))
    if variant == "semicircle":
        return LimitMoments(variant, semicircle_moments(k))
    raise ValueError(f"unknown limit law {variant!r}")


# -- scaling matrices ------------------------------------------------------------

@dataclass(frozen=True)
class ScalingMatrix:
    """Exact lower-triangular ``k x k`` matrix; rows are 0-based tuples."""
    variant: str
    rows: tuple

    @property
    def k(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.rows])


def matrix_A(k: int, interval=(0, 1)) -> ScalingMatrix:
    """``a_{ij} = 2^{-2i+2} C(2i, i-j)`` (1-based indices).

    On ``[0, 1]`` this is exactly the Jacobian of the canonical-to-moment
    map at ``p = (1/2, ..., 1/2)``, so the ``sqrt(8n)`` factor of the CLT
    sits entirely in the standardizing scale. For another interval the
    Jacobian of the affine moment map is multiplied in from the left.
    """
    _check_k(k)
    base = [[Fraction(binom(2 * i, i - j), 4 ** (i - 1)) if j <= i else Fraction(0)
             for j in range(1, k + 1)] for i in range(1, k + 1)]
    a, b = interval
    if (a, b) != (0, 1):
        base = (np.array(_affine_jacobian(k, a, b), dtype=object) @ np.array(base, dtype=object)).tolist()
    return ScalingMatrix("A", tuple(tuple(r) for r in base))


def _affine_jacobian(k, a, b):
    """Jacobian of ``m -> moments of a + (b-a) X`` at the arcsine point.

    The map is linear in ``m``: ``m'_i = sum_j C(i, j) a^{i-j} (b-a)^j m_j``
    (``m_0 = 1`` contributes only a constant).
    """
    exact = all(isinstance(v, (int, Fraction)) for v in (a, b))
    a = Fraction(a) if exact else float(a)
    w = (Fraction(b) if exact else float(b)) - a
    return [[binom(i, j) * a ** (i - j) * w ** j if j <= i else 0 for j in range(1, k + 1)]
            for i in range(1, k + 1)]


def matrix_C(k: int) -> ScalingMatrix:
    """``c_{ij} = C(2i, i-j) - C(2i, i-j-1)``, unit diagonal."""
    _check_k(k)
    rows = tuple(tuple(binom(2 * i, i - j) - binom(2 * i, i - j - 1) if j <= i else 0
                       for j in range(1, k + 1)) for i in range(1, k + 1))
    return ScalingMatrix("C", rows)


def matrix_D(k: int) -> ScalingMatrix:
    """``d_{ij} = C(i, (i-j)/2) - C(i, (i-j)/2 - 1)``, zero when ``i + j`` is odd.

    Columns follow the interleaved order ``(b_1, a_1, b_2, a_2, ...)``.
    """
    _check_k(k)

    def entry(i, j):
        if j > i or (i + j) % 2:
            return 0
        h = (i - j) // 2
        return binom(i, h) - binom(i, h - 1)

    rows = tuple(tuple(entry(i, j) for j in range(1, k + 1)) for i in range(1, k + 1))
    return ScalingMatrix("D", rows)


# -- generalized Catalan numbers and the u-array ---------------------------------

def generalized_catalan(i: int, j: int) -> int:
    """``g0_{ij} = C(i+j, i) - C(i+j, i-1)`` for ``0 <= i <= j``; zero for ``i > j``."""
    if i < 0 or j < 0:
        raise ValueError("indices must be non-negative")
    if i > j:
        return 0
    return binom(i + j, i) - binom(i + j, i - 1)


def generalized_catalan_table(N: int) -> list:
    return [[generalized_catalan(i, j) for j in range(N + 1)] for i in range(N + 1)]


def u_array(r: int, N: int) -> list:
    """Triangular array from ``u_{0,j} = 0`` and
    ``u_{ij} = u_{i,j-1} + u_{i-1,j} + [j - i + 1 == r] g0_{i-1,j}``.

    This is the derivative of the Skibinsky array at ``z = (1, ..., 1)``
    with respect to ``z_r``. Entries with ``i > j`` are zero.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    u = [[0] * (N + 1) for _ in range(N + 1)]
    for j in range(1, N + 1):
        for i in range(1, j + 1):
            u[i][j] = u[i][j - 1] + u[i - 1][j]
            if j - i + 1 == r:
                u[i][j] += generalized_catalan(i - 1, j)
    return u


def u_closed_form(i: int, j: int, r: int) -> int:
    """Closed form of :func:`u_array` entries.

    ``C(i+j, i-1) - C(i+j, i-r-1)`` when ``j - i >= r``,
    ``C(i+j, j-r) - C(i+j, i-r-1)`` when ``0 <= j - i < r`` and 0 otherwise.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if i == 0 or i > j:
        return 0
    if j - i >= r:
        return binom(i + j, i - 1) - binom(i + j, i - r - 1)
    return binom(i + j, j - r) - binom(i + j, i - r - 1)
