"""Coordinate systems on moment spaces and the bijections between them.

Four coordinates describe the interior of a moment space:

* ordinary moments ``m_1..m_N``;
* canonical moments ``p_k in (0, 1)`` for measures on ``[a, b]``;
* z-parameters ``z_k > 0`` for measures on ``[0, inf)``;
* recurrence coefficients ``(b_k, a_k)`` of the monic orthogonal
  polynomials, ``x P_k = P_{k+1} + b_{k+1} P_k + a_k P_{k-1}``.

Scalar transforms are generic over the number type: integer or
:class:`fractions.Fraction` input is carried through exactly, float input
in double precision (any field type with ``+ - * /`` works, e.g. mpmath).
Batched float versions for sampling live at the bottom of the module.
"""
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from numbers import Rational
from typing import Sequence, Union

import numpy as np

from . import kernels
from .errors import (ConditioningWarning, EmptyInput, NonInteriorMoments,
                     NonPositiveOffDiagonal, NotPositiveDefinite, ZeroScale)

#: absolute margin by which p, z and a must clear the boundary of their range
DEFAULT_MARGIN = 1e-12
#: cancellation ratio above which moments_to_recurrence warns
DEFAULT_CONDITIONING_THRESHOLD = 1e10


# -- support classes ---------------------------------------------------------

@dataclass(frozen=True)
class Bounded:
    a: float = 0
    b: float = 1

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"bounded support needs a < b, got [{self.a}, {self.b}]")

    def __str__(self):
        return f"bounded:{self.a},{self.b}"


@dataclass(frozen=True)
class HalfLine:
    def __str__(self):
        return "halfline"


@dataclass(frozen=True)
class RealLine:
    def __str__(self):
        return "realline"


SupportClass = Union[Bounded, HalfLine, RealLine]


def parse_support(text: str) -> SupportClass:
    """Parse ``bounded:a,b``, ``halfline`` or ``realline``."""
    text = text.strip().lower()
    if text == "halfline":
        return HalfLine()
    if text == "realline":
        return RealLine()
    if text.startswith("bounded"):
        _, _, rest = text.partition(":")
        if not rest:
            return Bounded()
        parts = rest.split(",")
        if len(parts) != 2:
            raise ValueError(f"cannot parse bounded support {text!r}")
        return Bounded(_parse_number(parts[0]), _parse_number(parts[1]))
    raise ValueError(f"unknown support {text!r}")


def _parse_number(token):
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        pass
    if "/" in token:
        return Fraction(token)
    return float(token)


# -- coordinate containers ---------------------------------------------------

def _is_exact(x):
    return isinstance(x, Rational) and not isinstance(x, bool)


def _coerce(values):
    """Tuple of Fractions if every entry is rational, else of floats.

    Other number types (mpmath ``mpf`` and the like) are passed through.
    """
    values = tuple(values)
    if all(_is_exact(v) for v in values):
        return tuple(Fraction(v) for v in values)
    if all(isinstance(v, (Rational, float, np.floating, np.integer)) for v in values):
        return tuple(float(v) for v in values)
    return values


def _like(x, value):
    """``value`` converted to the number type of ``x``."""
    if isinstance(x, Fraction):
        return Fraction(value)
    if isinstance(x, float):
        return float(value)
    return type(x)(value)


@dataclass(frozen=True)
class MomentVector:
    m: tuple
    support: SupportClass = field(default_factory=RealLine)

    def __post_init__(self):
        object.__setattr__(self, "m", _coerce(self.m))

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.m)

    def __len__(self):
        return len(self.m)


@dataclass(frozen=True)
class CanonicalMoments:
    p: tuple
    interval: tuple = (0, 1)

    def __post_init__(self):
        object.__setattr__(self, "p", _coerce(self.p))
        a, b = self.interval
        if not a < b:
            raise ValueError("interval needs a < b")
        if any(v < 0 or v > 1 for v in self.p):
            raise ValueError("canonical moments must lie in [0, 1]")


@dataclass(frozen=True)
class ZVector:
    z: tuple

    def __post_init__(self):
        object.__setattr__(self, "z", _coerce(self.z))
        if any(v < 0 for v in self.z):
            raise ValueError("z-parameters must be non-negative")


@dataclass(frozen=True)
class RecurrenceCoefficients:
    """Coefficients ``b_1..b_n`` and ``a_1..a_{n-1}`` (or ``a_1..a_n``).

    With ``n - 1`` off-diagonal values the object represents a point of the
    ``(2n-1)``-dimensional moment space, with ``n`` values one of dimension
    ``2n``.
    """
    b: tuple
    a: tuple = ()

    def __post_init__(self):
        b, a = _coerce(self.b), _coerce(self.a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)
        if len(a) not in (len(b) - 1, len(b)):
            raise ValueError("need len(a) == len(b) - 1 or len(a) == len(b)")

    @property
    def dimension(self) -> int:
        return len(self.b) + len(self.a)

    def interleaved(self) -> tuple:
        """``(b_1, a_1, b_2, a_2, ...)``, ordered like the moments they fix."""
        out = []
        for k, bk in enumerate(self.b):
            out.append(bk)
            if k < len(self.a):
                out.append(self.a[k])
        return tuple(out)

    @classmethod
    def from_interleaved(cls, values):
        values = tuple(values)
        return cls(b=values[0::2], a=values[1::2])


def _values(x, attr):
    if hasattr(x, attr):
        return getattr(x, attr)
    return _coerce(x)


# -- Skibinsky array ---------------------------------------------------------

def skibinsky_array(z) -> list:
    """Triangular array ``g[i][j]``, ``0 <= i, j <= N``.

    ``g[0][j] = 1``, ``g[i][j] = 0`` for ``i > j`` and
    ``g[i][j] = g[i][j-1] + z_{j-i+1} g[i-1][j]``; the diagonal carries the
    moments, ``g[k][k] = m_k``.
    """
    z = _values(z, "z")
    if not z:
        raise EmptyInput("no z-parameters given")
    N = len(z)
    zero, one = _like(z[0], 0), _like(z[0], 1)
    g = [[zero] * (N + 1) for _ in range(N + 1)]
    for j in range(N + 1):
        g[0][j] = one
    for j in range(1, N + 1):
        for i in range(1, j + 1):
            g[i][j] = g[i][j - 1] + z[j - i] * g[i - 1][j]
    return g


def skibinsky_forward(z) -> MomentVector:
    """Moments of the half-line measure with z-parameters ``z``.

    >>> skibinsky_forward((1, 1, 1)).m
    (Fraction(1, 1), Fraction(2, 1), Fraction(5, 1))
    """
    z = _values(z, "z")
    if not z:
        raise EmptyInput("no z-parameters given")
    if any(v < 0 for v in z):
        raise ValueError("z-parameters must be non-negative")
    N = len(z)
    col = [_like(z[0], 1)] + [_like(z[0], 0)] * N
    m = []
    for j in range(1, N + 1):
        for i in range(1, j + 1):
            col[i] = col[i] + z[j - i] * col[i - 1]
        m.append(col[j])
    return MomentVector(tuple(m), HalfLine())


def moments_to_z(m, margin=DEFAULT_MARGIN) -> ZVector:
    """Invert the Skibinsky recursion column by column.

    Column ``j`` of the array is affine in the new unknown ``z_j`` with
    slope ``z_1 ... z_{j-1}`` at the diagonal, so evaluating the column with
    ``z_j = 0`` yields the lower bound ``m_j^-`` and
    ``z_j = (m_j - m_j^-) / (z_1 ... z_{j-1})``.

    Raises :class:`NonInteriorMoments` when some ``z_k <= margin``.
    """
    m = _values(m, "m")
    if not m:
        raise EmptyInput("no moments given")
    N = len(m)
    zero, one = _like(m[0], 0), _like(m[0], 1)
    col = [one] + [zero] * N
    z = []
    slope = one
    for j in range(1, N + 1):
        trial = col[:]
        # z_j only enters at i = 1 where it multiplies g[0][j] = 1
        for i in range(2, j + 1):
            trial[i] = trial[i] + z[j - i] * trial[i - 1]
        lower = trial[j]
        zj = (m[j - 1] - lower) / slope
        if not zj > margin:
            raise NonInteriorMoments(
                f"z_{j} = {float(zj):.3g} is not positive: m_{j} is not above its lower bound",
                index=j, value=zj)
        z.append(zj)
        for i in range(1, j + 1):
            col[i] = col[i] + z[j - i] * col[i - 1]
        slope = slope * zj
    return ZVector(tuple(z))


# -- affine maps ---------------------------------------------------------------

def affine_transform_moments(m, scale, shift=0) -> tuple:
    """Moments of ``scale * X + shift`` given the moments of ``X``.

    ``m'_k = sum_j C(k, j) shift^(k-j) scale^j m_j`` with ``m_0 = 1``.
    Returns a plain tuple; the caller knows the new support.
    """
    m = _values(m, "m")
    if scale == 0:
        raise ZeroScale("affine moment transform needs a non-zero scale")
    if not m:
        raise EmptyInput("no moments given")
    if isinstance(m[0], Fraction):
        scale, shift = Fraction(scale), Fraction(shift)
    else:
        scale, shift = _like(m[0], scale), _like(m[0], shift)
    full = (_like(m[0], 1),) + tuple(m)
    out = []
    for k in range(1, len(m) + 1):
        acc = _like(m[0], 0)
        for j in range(k + 1):
            acc = acc + comb(k, j) * shift ** (k - j) * scale ** j * full[j]
        out.append(acc)
    return tuple(out)


def _to_unit_interval(m, a, b):
    if a == 0 and b == 1:
        return tuple(m)
    if isinstance(m[0], float):
        # the binomial expansion cancels badly for intervals away from [0, 1];
        # floats convert to Fractions exactly, so only the final rounding remains
        unit = _to_unit_interval(tuple(Fraction(v) for v in m), Fraction(a), Fraction(b))
        return tuple(float(v) for v in unit)
    if isinstance(m[0], Fraction):
        a, b = Fraction(a), Fraction(b)
    width = b - a
    return affine_transform_moments(m, 1 / width, -a / width)


def _interval_of(x, support):
    if support is not None:
        if isinstance(support, Bounded):
            return support.a, support.b
        a, b = support
        return a, b
    s = getattr(x, "support", None)
    if isinstance(s, Bounded):
        return s.a, s.b
    if s is not None:
        raise ValueError(f"canonical moments need bounded support, got {s}")
    return 0, 1


# -- canonical moments ---------------------------------------------------------

def canonical_to_zeta(p) -> tuple:
    """``zeta_1 = p_1``, ``zeta_k = (1 - p_{k-1}) p_k``.

    These are the z-parameters of the measure transported to ``[0, 1]``.
    """
    p = _values(p, "p")
    one = _like(p[0], 1)
    return (p[0],) + tuple((one - p[k - 1]) * p[k] for k in range(1, len(p)))


def canonical_to_moments(p, interval=None) -> MomentVector:
    """Moments on ``[a, b]`` of a measure with canonical moments ``p``."""
    if interval is None:
        interval = getattr(p, "interval", (0, 1))
    a, b = interval
    p = _values(p, "p")
    if not p:
        raise EmptyInput("no canonical moments given")
    if isinstance(p[0], float) and not (a == 0 and b == 1):
        # same cancellation as on the way in: evaluate exactly, round once
        exact = canonical_to_moments(tuple(Fraction(v) for v in p), (Fraction(a), Fraction(b)))
        return MomentVector(tuple(float(v) for v in exact.m), Bounded(interval[0], interval[1]))
    unit = skibinsky_forward(canonical_to_zeta(p)).m
    if isinstance(unit[0], Fraction):
        a, b = Fraction(a), Fraction(b)
    if a == 0 and b == 1:
        return MomentVector(unit, Bounded(interval[0], interval[1]))
    return MomentVector(affine_transform_moments(unit, b - a, a), Bounded(interval[0], interval[1]))


def moments_to_canonical(m, support=None, margin=DEFAULT_MARGIN) -> CanonicalMoments:
    """Canonical moments of ``m`` with respect to ``[a, b]``.

    ``support`` may be a :class:`Bounded` or an ``(a, b)`` pair; when
    omitted it is read from a :class:`MomentVector` (default ``[0, 1]``).
    """
    a, b = _interval_of(m, support)
    m = _values(m, "m")
    if not m:
        raise EmptyInput("no moments given")
    unit = _to_unit_interval(m, a, b)
    try:
        z = moments_to_z(unit, margin=margin).z
    except NonInteriorMoments as exc:
        raise NonInteriorMoments(
            f"p_{exc.index} is not inside (0, 1): moment vector is not interior in "
            f"M_{len(m)}([{a}, {b}])", index=exc.index, value=exc.value) from None
    one = _like(unit[0], 1)
    p = []
    prev = _like(unit[0], 0)
    for k, zk in enumerate(z, start=1):
        pk = zk / (one - prev)
        if not (margin < pk < one - margin):
            raise NonInteriorMoments(
                f"p_{k} = {float(pk):.3g} is not inside (0, 1): moment vector is not "
                f"interior in M_{len(m)}([{a}, {b}])", index=k, value=pk)
        p.append(pk)
        prev = pk
    return CanonicalMoments(tuple(p), (a, b))


# -- recurrence coefficients ---------------------------------------------------

def z_to_recurrence(z) -> RecurrenceCoefficients:
    """``a_k = z_{2k-1} z_{2k}``, ``b_k = z_{2k-2} + z_{2k-1}`` with ``z_0 = 0``."""
    z = _values(z, "z")
    if not z:
        raise EmptyInput("no z-parameters given")
    zz = (_like(z[0], 0),) + tuple(z)
    n_b = (len(z) + 1) // 2
    b = tuple(zz[2 * k - 2] + zz[2 * k - 1] for k in range(1, n_b + 1))
    a = tuple(zz[2 * k - 1] * zz[2 * k] for k in range(1, len(z) // 2 + 1))
    return RecurrenceCoefficients(b, a)


def canonical_to_recurrence(p, interval=None) -> RecurrenceCoefficients:
    """Recurrence coefficients on ``[a, b]`` from canonical moments.

    Uses
    ``b_{k+1} = a + (b-a)((1-p_{2k-1}) p_{2k} + (1-p_{2k}) p_{2k+1})`` and
    ``a_k = (b-a)^2 (1-p_{2k-2}) p_{2k-1} (1-p_{2k-1}) p_{2k}``
    with ``p_{-1} = p_0 = 0``.
    """
    if interval is None:
        interval = getattr(p, "interval", (0, 1))
    p = _values(p, "p")
    if not p:
        raise EmptyInput("no canonical moments given")
    lo, hi = interval
    if isinstance(p[0], Fraction):
        lo, hi = Fraction(lo), Fraction(hi)
    else:
        lo, hi = _like(p[0], lo), _like(p[0], hi)
    width = hi - lo
    zero, one = _like(p[0], 0), _like(p[0], 1)
    # pp[i] = p_{i-1}, so pp[0] = p_{-1} and pp[1] = p_0
    pp = (zero, zero) + tuple(p)

    def q(i):
        return pp[i + 1]

    N = len(p)
    b = []
    for k in range(0, (N + 1) // 2):
        b.append(lo + width * ((one - q(2 * k - 1)) * q(2 * k) + (one - q(2 * k)) * q(2 * k + 1)))
    a = []
    for k in range(1, N // 2 + 1):
        a.append(width * width * (one - q(2 * k - 2)) * q(2 * k - 1) * (one - q(2 * k - 1)) * q(2 * k))
    return RecurrenceCoefficients(tuple(b), tuple(a))


def orthogonal_polynomials(rec) -> list:
    """Coefficient lists (ascending powers) of the monic ``P_0..P_n``."""
    b, a = rec.b, rec.a
    one, zero = _like(b[0], 1), _like(b[0], 0)
    polys = [[one]]
    prev2 = None
    for k in range(len(b)):
        prev = polys[-1]
        nxt = [zero] + prev  # x * P_k
        for i, c in enumerate(prev):
            nxt[i] = nxt[i] - b[k] * c
        if prev2 is not None:
            for i, c in enumerate(prev2):
                nxt[i] = nxt[i] - a[k - 1] * c
        prev2 = prev
        polys.append(nxt)
    return polys


def recurrence_to_moments(rec) -> MomentVector:
    """Moments ``m_1..m_{2n-1}`` pinned down by ``b_1..b_n, a_1..a_{n-1}``.

    Solves the identities ``int x^k P_k = a_1...a_k`` and
    ``int x^{k+1} P_k = a_1...a_k (b_1 + ... + b_{k+1})`` forward for the
    highest moment each one contains.
    """
    if not isinstance(rec, RecurrenceCoefficients):
        rec = RecurrenceCoefficients.from_interleaved(rec)
    b, a = rec.b, rec.a
    if not b:
        raise EmptyInput("no recurrence coefficients given")
    if len(a) != len(b) - 1:
        raise ValueError("recurrence_to_moments is defined for odd dimension 2n-1 only")
    for k, ak in enumerate(a, start=1):
        if not ak > 0:
            raise NonPositiveOffDiagonal(f"a_{k} = {ak} must be positive")
    n = len(b)
    one = _like(b[0], 1)
    polys = orthogonal_polynomials(rec)
    m = [one] + [None] * (2 * n - 1)
    prod_a = one
    sum_b = _like(b[0], 0)
    for k in range(n):
        c = polys[k]
        if k > 0:
            prod_a = prod_a * a[k - 1]
            # m_{2k} from int x^k P_k
            acc = prod_a
            for i in range(k):
                acc = acc - c[i] * m[k + i]
            m[2 * k] = acc
        sum_b = sum_b + b[k]
        acc = prod_a * sum_b
        for i in range(k):
            acc = acc - c[i] * m[k + 1 + i]
        m[2 * k + 1] = acc
    return MomentVector(tuple(m[1:]), RealLine())


def moments_to_recurrence(m, margin=DEFAULT_MARGIN,
                          conditioning_threshold=DEFAULT_CONDITIONING_THRESHOLD
                          ) -> RecurrenceCoefficients:
    """Recurrence coefficients from moments via the Chebyshev algorithm.

    The mixed moments ``sigma[k][l] = int P_k x^l`` are the entries of the
    LDL^T factorization of the Hankel matrix ``(m_{i+j})``; the pivots
    ``sigma[k][k]`` are positive exactly on the interior. Odd length
    ``2n-1`` gives ``n`` diagonal and ``n-1`` off-diagonal coefficients,
    even length ``2n`` additionally ``a_n``.

    Raises :class:`NotPositiveDefinite` when some ``a_k <= margin``. In
    floating point a :class:`ConditioningWarning` is issued when a pivot is
    smaller than the terms it was computed from by more than
    ``conditioning_threshold``.
    """
    m = _values(m, "m")
    if not m:
        raise EmptyInput("no moments given")
    L = len(m)
    one, zero = _like(m[0], 1), _like(m[0], 0)
    mu = (one,) + tuple(m)
    check = not isinstance(m[0], Fraction)
    sig_prev = [zero] * (L + 1)
    sig = list(mu)
    b = [mu[1]]
    a = []
    alpha, beta = mu[1], one
    warned = False
    for k in range(1, L // 2 + 1):
        new = [zero] * (L + 1)
        for l in range(k, L - k + 1):
            t1 = sig[l + 1]
            t2 = alpha * sig[l]
            t3 = beta * sig_prev[l]
            new[l] = t1 - t2 - t3
        if check and not warned:
            scale = abs(sig[k + 1]) + abs(alpha * sig[k]) + abs(beta * sig_prev[k])
            if scale > conditioning_threshold * abs(new[k]):
                warned = True
                digits = np.log10(float(scale / abs(new[k]))) if new[k] != 0 else np.inf
                warnings.warn(f"Hankel pivot {k} lost about {digits:.0f} digits to cancellation",
                              ConditioningWarning, stacklevel=2)
        ak = new[k] / sig[k - 1]
        if not ak > margin:
            raise NotPositiveDefinite(
                f"Hankel pivot {k} is not positive (a_{k} = {float(ak):.3g}): moments are "
                f"not interior in M_{L}(R)", index=2 * k, value=ak)
        a.append(ak)
        beta = ak
        if 2 * k + 1 <= L:
            alpha = new[k + 1] / new[k] - sig[k] / sig[k - 1]
            b.append(alpha)
        sig_prev, sig = sig, new
    return RecurrenceCoefficients(tuple(b), tuple(a))


# -- membership ------------------------------------------------------------------

@dataclass(frozen=True)
class InteriorCheck:
    """Result of :func:`is_interior`.

    ``coordinates`` are the native coordinates computed before failure (p,
    z or interleaved recurrence coefficients); ``failing_index`` is the
    1-based index of the first coordinate that left its range.
    """
    interior: bool
    coordinates: tuple
    failing_index: Union[int, None] = None
    message: str = ""

    def __bool__(self):
        return self.interior


def is_interior(m, support=None, margin=DEFAULT_MARGIN) -> InteriorCheck:
    if support is None:
        support = getattr(m, "support", RealLine())
    values = _values(m, "m")
    try:
        if isinstance(support, Bounded):
            coords = moments_to_canonical(values, support, margin=margin).p
        elif isinstance(support, HalfLine):
            coords = moments_to_z(values, margin=margin).z
        else:
            coords = moments_to_recurrence(values, margin=margin).interleaved()
    except NonInteriorMoments as exc:
        return InteriorCheck(False, (), exc.index, str(exc))
    except EmptyInput as exc:
        return InteriorCheck(False, (), None, str(exc))
    return InteriorCheck(True, coords)


# -- batched float transforms ----------------------------------------------------

def skibinsky_forward_batch(z) -> np.ndarray:
    """Rows of z-parameters (N, K) to rows of moments (N, K)."""
    return kernels.skibinsky_batch(z)


def canonical_to_zeta_batch(p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    zeta = p.copy()
    zeta[:, 1:] = (1.0 - p[:, :-1]) * p[:, 1:]
    return zeta


def affine_transform_batch(m, scale, shift=0.0) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if scale == 0:
        raise ZeroScale("affine moment transform needs a non-zero scale")
    if scale == 1 and shift == 0:
        return m
    N, K = m.shape
    full = np.hstack([np.ones((N, 1)), m])
    out = np.zeros((N, K))
    for k in range(1, K + 1):
        for j in range(k + 1):
            out[:, k - 1] += comb(k, j) * shift ** (k - j) * scale ** j * full[:, j]
    return out


def canonical_to_moments_batch(p, interval=(0.0, 1.0)) -> np.ndarray:
    a, b = interval
    unit = kernels.skibinsky_batch(canonical_to_zeta_batch(p))
    return affine_transform_batch(unit, float(b - a), float(a))


def recurrence_to_moments_batch(b, a, K=None) -> np.ndarray:
    """Moments from rows of ``b`` (N, n) and ``a`` (N, n-1).

    ``K`` defaults to ``2n - 1``; smaller values need only the leading
    coefficients.
    """
    b = np.asarray(b, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    if K is None:
        K = 2 * b.shape[1] - 1
    if K > 2 * b.shape[1] - 1:
        raise ValueError("cannot determine more than 2n-1 moments from n diagonal coefficients")
    return kernels.tridiagonal_moments_batch(b, a, K)
