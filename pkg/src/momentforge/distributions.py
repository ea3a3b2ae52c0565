"""Product densities on moment spaces and their samplers.

Three families are covered, each a product law in the native coordinates:

* ``f_n`` on ``M_n([a, b])``: canonical moments ``p_k`` independent Beta;
* ``g_n`` on ``M_n([0, inf))``: z-parameters independent Gamma;
* ``h_{2n-1}`` on ``M_{2n-1}(R)``: ``b_k`` Normal and ``a_k`` Gamma.

Gamma laws are written shape-rate throughout: ``Gamma(s, r)`` has density
``r^s x^(s-1) e^(-r x) / Gamma(s)`` (numpy samples with ``scale = 1/r``).

Randomness comes from :class:`RngStream` objects, never from global state.
Large batches are cut into fixed-size blocks and block ``i`` always draws
from ``RngStream(seed, i)``, so a batch is reproducible bit for bit
whatever the number of worker threads.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import mpmath
import numpy as np
from scipy import special

from . import core
from .core import (Bounded, CanonicalMoments, HalfLine, MomentVector, RealLine,
                   RecurrenceCoefficients, SupportClass, ZVector)
from .errors import (EnvelopeViolation, NonInteriorMoments, NonPositiveShape,
                     PointNotInBoundedSpace, RejectionBudgetExceeded)

#: number of draws per RNG block; part of the reproducibility contract
BLOCK_SIZE = 1024


# -- random streams ------------------------------------------------------------

@dataclass(frozen=True)
class RngStream:
    """Independent random stream derived from a 64-bit master seed.

    ``index`` is a non-negative integer or a tuple of them (nested streams,
    see :meth:`child`). Distinct ``(seed, index)`` pairs give independent
    PCG64 streams through :class:`numpy.random.SeedSequence`.
    """
    seed: int
    index: Union[int, tuple] = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if any(int(i) < 0 for i in self.key):
            raise ValueError("stream index must be non-negative")

    @property
    def key(self) -> tuple:
        return tuple(self.index) if isinstance(self.index, tuple) else (int(self.index),)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.key + (int(index),))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"expected RngStream, Generator or int seed, got {type(rng).__name__}")


def draw_blocks(draw: Callable, seed, count: int, block_size: int = BLOCK_SIZE,
                workers: int = 1):
    """Run ``draw(generator, m)`` over blocks and stack the results.

    Block ``i`` covers draws ``i*block_size ...`` and uses stream
    ``RngStream(seed, i)`` (or ``seed.child(i)`` when ``seed`` is itself a
    stream). ``draw`` may return an array or a tuple of arrays whose leading
    axis has length ``m``.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    n_blocks = -(-count // block_size)
    sizes = [min(block_size, count - i * block_size) for i in range(n_blocks)]

    def stream(i):
        if isinstance(seed, RngStream):
            return seed.child(i)
        return RngStream(int(seed), i)

    def run(i):
        return draw(stream(i).generator(), sizes[i])

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    else:
        parts = [run(i) for i in range(n_blocks)]
    if not parts:
        raise ValueError("count must be positive")
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate([p[j] for p in parts]) for j in range(len(parts[0])))
    return np.concatenate(parts)


# -- parameters ------------------------------------------------------------------

def _seq(x, length, name):
    if np.isscalar(x):
        return (x,) * length
    x = tuple(x)
    if len(x) != length:
        raise ValueError(f"{name} must have length {length}, got {len(x)}")
    return x


@dataclass(frozen=True)
class MomentLawParams:
    """Parameters of ``f_n``, ``g_n`` or ``h_{2n-1}``.

    ``n`` is the moment-space dimension for bounded and half-line supports.
    On the real line the space is ``M_{2n-1}(R)``: ``gamma`` holds the
    ``n - 1`` exponents of ``a_1..a_{n-1}`` and ``delta`` the ``2n - 1``
    rates, odd positions for the ``b_k`` and even positions for the ``a_k``.
    Scalars broadcast.

    Validation only requires the resulting Beta and Gamma shapes to be
    positive (the densities are then integrable), which is weaker than
    ``gamma > -1``; the ensemble laws need the extra room.
    """
    support: SupportClass
    n: int
    gamma: tuple = 0
    delta: tuple = 0

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValueError("n must be >= 1")
        object.__setattr__(self, "n", n)
        if isinstance(self.support, RealLine):
            g_len, d_len = n - 1, 2 * n - 1
        else:
            g_len = d_len = n
        object.__setattr__(self, "gamma", _seq(self.gamma, g_len, "gamma"))
        object.__setattr__(self, "delta", _seq(self.delta, d_len, "delta"))
        if isinstance(self.support, Bounded):
            a, b = self.beta_shapes()
            if np.any(a <= 0) or np.any(b <= 0):
                raise NonPositiveShape("Beta shapes gamma_k + n - k + 1 and delta_k + n - k + 1 must be positive")
        elif isinstance(self.support, HalfLine):
            if np.any(self.gamma_shapes() <= 0):
                raise NonPositiveShape("Gamma shapes gamma_k + n - k + 1 must be positive")
            if any(d <= 0 for d in self.delta):
                raise ValueError("Gamma rates delta_k must be positive")
        else:
            if any(d <= 0 for d in self.delta):
                raise ValueError("rates delta_k must be positive")
            if np.any(self.gamma_shapes() <= 0):
                raise NonPositiveShape("Gamma shapes gamma_k + 2n - 2k must be positive")

    @classmethod
    def bounded(cls, n, gamma=0, delta=0, interval=(0, 1)):
        return cls(Bounded(*interval), n, gamma, delta)

    @classmethod
    def halfline(cls, n, gamma=0, delta=None):
        """``delta`` defaults to ``n``, the scaling of the half-line CLT."""
        return cls(HalfLine(), n, gamma, n if delta is None else delta)

    @classmethod
    def realline(cls, n, gamma=0, delta=None):
        """``delta`` defaults to rates ``n`` for ``b_k`` and ``2n`` for ``a_k``.

        That choice centres the recurrence coefficients at ``b = 0, a = 1``,
        the semicircle law on ``[-2, 2]``.
        """
        if delta is None:
            delta = tuple(n if j % 2 == 0 else 2 * n for j in range(2 * n - 1))
        return cls(RealLine(), n, gamma, delta)

    @property
    def dimension(self) -> int:
        return 2 * self.n - 1 if isinstance(self.support, RealLine) else self.n

    def beta_shapes(self):
        k = np.arange(1, self.n + 1)
        off = self.n - k + 1
        return (np.asarray(self.gamma, float) + off, np.asarray(self.delta, float) + off)

    def gamma_shapes(self):
        """Gamma shapes of ``z_k`` (half-line) or of ``a_k`` (real line)."""
        if isinstance(self.support, RealLine):
            k = np.arange(1, self.n)
            return np.asarray(self.gamma, float) + 2 * self.n - 2 * k
        k = np.arange(1, self.n + 1)
        return np.asarray(self.gamma, float) + self.n - k + 1


@dataclass(frozen=True)
class GeneralWeightFamily:
    """Density ``prod_k f_k(p_k)`` in canonical-moment coordinates on ``[a, b]``.

    ``weights[k]`` evaluates ``f_k`` on arrays of points in ``(0, 1)``;
    ``bounds[k]`` must dominate ``f_k`` on the whole interval. Sampling
    is by rejection from ``Beta(n-k+1, n-k+1)``.
    """
    weights: Sequence[Callable]
    bounds: Sequence[float]
    interval: tuple = (0, 1)

    def __post_init__(self):
        if len(self.weights) != len(self.bounds) or not self.weights:
            raise ValueError("need one positive bound per weight function")
        if any(not b > 0 for b in self.bounds):
            raise ValueError("bounds must be positive")

    @property
    def n(self):
        return len(self.weights)


# -- samplers --------------------------------------------------------------------

def _leading(leading, full):
    if leading is None:
        return full
    if not 1 <= leading <= full:
        raise ValueError(f"leading must be in 1..{full}")
    return int(leading)


def _rejection(gen, f, bound, shape, size, budget):
    out = np.empty(size)
    filled = 0
    proposed = 0
    while filled < size:
        if proposed >= budget:
            raise RejectionBudgetExceeded(
                f"accepted {filled} of {size} draws after {proposed} proposals; "
                "the envelope bound is too loose")
        m = max(2 * (size - filled), 16)
        x = gen.beta(shape, shape, size=m)
        u = gen.random(m)
        fx = np.asarray(f(x), dtype=float) * np.ones(m)
        if np.any(fx > bound) or np.any(fx < 0):
            raise EnvelopeViolation("weight function is negative or exceeds its bound")
        acc = x[u * bound < fx]
        take = min(len(acc), size - filled)
        out[filled:filled + take] = acc[:take]
        filled += take
        proposed += m
    return out


def sample_canonical_bounded(params, rng, size=None, leading=None, budget_factor=1000):
    """Independent canonical moments of ``f_n``.

    ``p_k ~ Beta(gamma_k + n - k + 1, delta_k + n - k + 1)`` for
    :class:`MomentLawParams`; for :class:`GeneralWeightFamily` the law with
    density proportional to ``f_k(x) (x - x^2)^(n-k)``, by rejection with
    at most ``budget_factor * size`` proposals per coordinate.

    With ``size=None`` a single :class:`CanonicalMoments` is returned,
    otherwise an array of shape ``(size, leading or n)``. ``leading=k``
    draws only ``p_1..p_k``, whose joint law does not depend on the rest.
    """
    gen = as_generator(rng)
    m = 1 if size is None else int(size)
    K = _leading(leading, params.n)
    n = params.n
    if isinstance(params, GeneralWeightFamily):
        cols = [_rejection(gen, params.weights[k], params.bounds[k], n - k, m, budget_factor * m)
                for k in range(K)]
        p = np.column_stack(cols)
        interval = params.interval
    else:
        if not isinstance(params.support, Bounded):
            raise ValueError("bounded sampler needs bounded support")
        a, b = params.beta_shapes()
        p = gen.beta(a[:K], b[:K], size=(m, K))
        interval = (params.support.a, params.support.b)
    if size is None:
        return CanonicalMoments(tuple(float(v) for v in p[0]), interval)
    return p


def sample_moments_bounded(params, rng, size=None, leading=None, **kw):
    """Moment vectors with density ``f_n``, via the canonical moments."""
    p = sample_canonical_bounded(params, rng, size=size, leading=leading, **kw)
    interval = (params.interval if isinstance(params, GeneralWeightFamily)
                else (params.support.a, params.support.b))
    if size is None:
        return core.canonical_to_moments(p)
    return core.canonical_to_moments_batch(p, interval)


def sample_moments_halfline(params, rng, size=None, leading=None):
    """``z_k ~ Gamma(gamma_k + n - k + 1, rate delta_k)``; moments via Skibinsky.

    Returns ``(ZVector, MomentVector)`` or, with ``size``, two arrays.
    """
    if not isinstance(params.support, HalfLine):
        raise ValueError("half-line sampler needs half-line support")
    gen = as_generator(rng)
    m = 1 if size is None else int(size)
    K = _leading(leading, params.n)
    shape = params.gamma_shapes()[:K]
    rate = np.asarray(params.delta, float)[:K]
    z = gen.gamma(shape, 1.0 / rate, size=(m, K))
    moments = core.skibinsky_forward_batch(z)
    if size is None:
        return ZVector(tuple(z[0])), MomentVector(tuple(moments[0]), HalfLine())
    return z, moments


def sample_recurrence_realline(params, rng, size, leading=None):
    """Arrays ``b`` (size, nb) and ``a`` (size, na) of the ``h_{2n-1}`` law.

    ``b_k ~ N(0, 1/(2 delta_{2k-1}))`` and
    ``a_k ~ Gamma(gamma_k + 2n - 2k, rate delta_{2k})``. With
    ``leading=K`` only the first ``K`` interleaved coordinates
    ``b_1, a_1, b_2, ...`` are drawn.
    """
    if not isinstance(params.support, RealLine):
        raise ValueError("real-line sampler needs real-line support")
    gen = as_generator(rng)
    K = _leading(leading, params.dimension)
    nb, na = (K + 1) // 2, K // 2
    delta = np.asarray(params.delta, float)
    sd = np.sqrt(1.0 / (2.0 * delta[0:2 * nb:2]))
    b = gen.standard_normal((size, nb)) * sd
    a = gen.gamma(params.gamma_shapes()[:na], 1.0 / delta[1:2 * na:2], size=(size, na))
    return b, a


def sample_moments_realline(params, rng, size=None, leading=None):
    """Moments with density ``h_{2n-1}`` from independent ``(b_k, a_k)``.

    Returns ``(RecurrenceCoefficients, MomentVector)`` or two arrays: the
    interleaved coefficients ``(b_1, a_1, ...)`` and the moments.
    """
    m = 1 if size is None else int(size)
    K = _leading(leading, params.dimension)
    b, a = sample_recurrence_realline(params, rng, m, leading=K)
    if b.shape[1] == a.shape[1]:
        # m_K with K even does not involve b_{K/2+1}; pad with a placeholder
        b_full = np.hstack([b, np.zeros((m, 1))])
    else:
        b_full = b
    moments = core.recurrence_to_moments_batch(b_full, a, K)
    coords = np.empty((m, K))
    coords[:, 0::2] = b
    coords[:, 1::2] = a
    if size is None:
        return (RecurrenceCoefficients.from_interleaved(tuple(coords[0])),
                MomentVector(tuple(moments[0]), RealLine()))
    return coords, moments


# -- densities -------------------------------------------------------------------

def _values(m):
    return m.m if isinstance(m, MomentVector) else core._coerce(m)


def _mp_value(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def log_normalizer_f(params, mp=False) -> float:
    """``log c_n^{[a,b]}``."""
    n = params.n
    width = params.support.b - params.support.a
    if mp:
        total = n * (n + 1) / mpmath.mpf(2) * mpmath.log(_mp_value(width))
        for k in range(1, n + 1):
            s = _mp_value(params.gamma[k - 1]) + n - k + 1
            t = _mp_value(params.delta[k - 1]) + n - k + 1
            total += mpmath.loggamma(s) + mpmath.loggamma(t) - mpmath.loggamma(s + t)
        return -total
    a, b = params.beta_shapes()
    return -(n * (n + 1) / 2 * math.log(float(width)) + float(np.sum(special.betaln(a, b))))


def density_f(m, params: MomentLawParams, precise=False, log=False):
    """Density ``f_n^{(gamma, delta)}`` on ``M_n([a, b])``.

    Equals ``c_n prod_k p_k^gamma_k (1 - p_k)^delta_k`` where ``p`` are the
    canonical moments of ``m``; zero off the interior. ``precise=True``
    evaluates in mpmath at the current working precision (exact inputs
    recommended), ``log=True`` returns the log-density.
    """
    if not isinstance(params.support, Bounded):
        raise ValueError("density_f needs bounded support")
    values = _values(m)
    try:
        p = core.moments_to_canonical(values, params.support, margin=0).p
    except NonInteriorMoments:
        return _zero(precise, log)
    if len(p) != params.n:
        raise ValueError(f"expected {params.n} moments, got {len(p)}")
    if precise:
        total = log_normalizer_f(params, mp=True)
        for pk, g, d in zip(p, params.gamma, params.delta):
            x = _mp_value(pk)
            total += _mp_value(g) * mpmath.log(x) + _mp_value(d) * mpmath.log(1 - x)
        return total if log else mpmath.exp(total)
    p = np.array([float(v) for v in p])
    total = log_normalizer_f(params) + float(np.sum(
        special.xlogy(np.asarray(params.gamma, float), p)
        + special.xlog1py(np.asarray(params.delta, float), -p)))
    return total if log else math.exp(total)


def density_g(m, params: MomentLawParams, precise=False, log=False):
    """Density ``g_n^{(gamma, delta)}`` on ``M_n([0, inf))``.

    ``prod_k delta_k^{s_k} / Gamma(s_k) z_k^gamma_k exp(-delta_k z_k)`` with
    ``s_k = gamma_k + n - k + 1`` and ``z`` the z-parameters of ``m``.
    """
    if not isinstance(params.support, HalfLine):
        raise ValueError("density_g needs half-line support")
    values = _values(m)
    try:
        z = core.moments_to_z(values, margin=0).z
    except NonInteriorMoments:
        return _zero(precise, log)
    if len(z) != params.n:
        raise ValueError(f"expected {params.n} moments, got {len(z)}")
    shapes = params.gamma_shapes()
    if precise:
        total = mpmath.mpf(0)
        n = params.n
        for k, (zk, g, d) in enumerate(zip(z, params.gamma, params.delta), start=1):
            g, d, x = _mp_value(g), _mp_value(d), _mp_value(zk)
            s = g + n - k + 1
            total += s * mpmath.log(d) - mpmath.loggamma(s) + g * mpmath.log(x) - d * x
        return total if log else mpmath.exp(total)
    z = np.array([float(v) for v in z])
    g = np.asarray(params.gamma, float)
    d = np.asarray(params.delta, float)
    total = float(np.sum(shapes * np.log(d) - special.gammaln(shapes) + special.xlogy(g, z) - d * z))
    return total if log else math.exp(total)


def density_h(m, params: MomentLawParams, precise=False, log=False):
    """Density ``h_{2n-1}^{(gamma, delta)}`` on ``M_{2n-1}(R)``.

    ``prod_k sqrt(delta_{2k-1}/pi) exp(-delta_{2k-1} b_k^2)`` times
    ``prod_k delta_{2k}^{s_k} / Gamma(s_k) a_k^gamma_k exp(-delta_{2k} a_k)``
    with ``s_k = gamma_k + 2n - 2k``.
    """
    if not isinstance(params.support, RealLine):
        raise ValueError("density_h needs real-line support")
    values = _values(m)
    if len(values) != params.dimension:
        raise ValueError(f"expected {params.dimension} moments, got {len(values)}")
    try:
        rec = core.moments_to_recurrence(values, margin=0)
    except NonInteriorMoments:
        return _zero(precise, log)
    n = params.n
    if precise:
        total = mpmath.mpf(0)
        for k in range(1, n + 1):
            d, b = _mp_value(params.delta[2 * k - 2]), _mp_value(rec.b[k - 1])
            total += (mpmath.log(d) - mpmath.log(mpmath.pi)) / 2 - d * b * b
        for k in range(1, n):
            d, a = _mp_value(params.delta[2 * k - 1]), _mp_value(rec.a[k - 1])
            g = _mp_value(params.gamma[k - 1])
            s = g + 2 * n - 2 * k
            total += s * mpmath.log(d) - mpmath.loggamma(s) + g * mpmath.log(a) - d * a
        return total if log else mpmath.exp(total)
    delta = np.asarray(params.delta, float)
    b = np.array([float(v) for v in rec.b])
    a = np.array([float(v) for v in rec.a])
    db, da = delta[0::2], delta[1::2]
    g = np.asarray(params.gamma, float)
    s = params.gamma_shapes()
    total = float(np.sum(0.5 * np.log(db / np.pi) - db * b * b))
    total += float(np.sum(s * np.log(da) - special.gammaln(s) + special.xlogy(g, a) - da * a))
    return total if log else math.exp(total)


def _zero(precise, log):
    if log:
        return -mpmath.inf if precise else -math.inf
    return mpmath.mpf(0) if precise else 0.0


def log_abs_jacobian_phi(p, interval=(0, 1)) -> float:
    """``log |d p / d m|`` for ``p = phi_n(m)`` on ``[a, b]``.

    ``|d p / d m| = prod_k (b-a)^{-k} prod_{i<k} (p_i (1 - p_i))^{-1}``.
    """
    p = np.asarray([float(v) for v in getattr(p, "p", p)])
    n = len(p)
    width = float(interval[1] - interval[0])
    k = np.arange(1, n + 1)
    return float(-np.sum(k) * math.log(width) - np.sum((n - k) * np.log(p * (1 - p))))


# -- limit densities -------------------------------------------------------------

@dataclass(frozen=True)
class LimitGap:
    scale: object
    f: object
    limit: object
    gap: object


def _bounded_params_halfline(params, d):
    d = Fraction(d)
    gamma = tuple(Fraction(g) if isinstance(g, (int, Fraction)) else g for g in params.gamma)
    delta = tuple(d * Fraction(x) if isinstance(x, (int, Fraction)) else float(d) * x
                  for x in params.delta)
    return MomentLawParams(Bounded(0, d), params.n, gamma, delta)


def _bounded_params_realline(params, s):
    s2 = Fraction(s) ** 2
    N = params.dimension
    gamma, delta = [], []
    for j in range(1, N + 1):
        dj = Fraction(params.delta[j - 1]) if isinstance(params.delta[j - 1], (int, Fraction)) \
            else params.delta[j - 1]
        if j % 2:
            gamma.append(dj * s2)
            delta.append(dj * s2)
        else:
            gamma.append(params.gamma[j // 2 - 1])
            delta.append(dj * s2)
    return MomentLawParams(Bounded(-Fraction(s), Fraction(s)), N, tuple(gamma), tuple(delta))


def limit_density_check(point, params: MomentLawParams, grid, dps=60) -> list:
    """Gap between bounded-interval densities and their unbounded limit.

    Half-line: ``f_n`` on ``[0, d]`` with exponents ``gamma`` and
    ``d * delta`` is compared with ``g_n`` at ``point`` for each ``d``.
    Real line: ``f_{2n-1}`` on ``[-s, s]`` with
    ``gamma_{2k-1} = delta_{2k-1} = delta_{2k-1} s^2``,
    ``gamma_{2k} = gamma_k`` and ``delta_{2k} = delta_{2k} s^2`` is compared
    with ``h_{2n-1}``. Evaluated in exact arithmetic for the coordinates and
    ``dps`` significant digits for the densities.

    Raises :class:`PointNotInBoundedSpace` when ``point`` is not interior
    to the bounded moment space for some grid value.
    """
    values = tuple(Fraction(v) if isinstance(v, (int, Fraction)) else Fraction(str(v))
                   for v in _values(point))
    rows = []
    with mpmath.workdps(dps):
        if isinstance(params.support, HalfLine):
            limit = density_g(values, params, precise=True)
            make = _bounded_params_halfline
        elif isinstance(params.support, RealLine):
            limit = density_h(values, params, precise=True)
            make = _bounded_params_realline
        else:
            raise ValueError("limit_density_check needs half-line or real-line parameters")
        for scale in grid:
            bp = make(params, scale)
            if not core.is_interior(values, bp.support, margin=0):
                raise PointNotInBoundedSpace(
                    f"point is not interior in M_{len(values)}({bp.support}); increase the scale")
            f = density_f(values, bp, precise=True)
            rows.append(LimitGap(scale, f, limit, abs(f - limit)))
    return rows
