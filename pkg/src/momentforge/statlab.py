"""Monte-Carlo verification of the moment central limit theorems.

A CLT run draws ``N`` random moment vectors, keeps the first ``k``
moments, standardizes them as ``scale * M^{-1} (m - m_limit)`` and tests
the result against ``N_k(0, I)``: a one-sample Kolmogorov-Smirnov test per
coordinate and the deviation of the empirical covariance from the identity.

Presets pick the source law and the matching ``(limit, scale, M)``:

============  ==============================  ===============================
preset        source                          standardization
============  ==============================  ===============================
bounded       ``f_n`` on [0, 1], gamma=delta  arcsine, ``sqrt(8n)``, A
halfline      ``g_n`` with ``delta = n``      Marchenko-Pastur, ``sqrt(n)``, C
realline      ``h_{2n-1}``, rates n and 2n    semicircle, ``sqrt(2n)``, D
jacobi        Jacobi ensemble                 arcsine, ``sqrt(4 beta n)``, A
laguerre      rescaled Laguerre ensemble      Marchenko-Pastur, ``sqrt(beta n/2)``, C
hermite       rescaled Gaussian ensemble      semicircle, ``sqrt(beta n/2)``, D
============  ==============================  ===============================
"""
from dataclasses import dataclass, field, asdict
import math
from typing import Callable, Union

import numpy as np
from scipy import linalg, stats

from . import asymptotics, distributions, ensembles
from .core import Bounded, HalfLine, MomentVector, RealLine
from .distributions import MomentLawParams, draw_blocks
from .ensembles import EnsembleSpec
from .errors import EvaluationFailure, NonPositiveShape, SingularMatrix, TooFewSamples

KS_LEVEL = 0.01
COV_TOLERANCE = 0.1
MIN_SAMPLES = 30
PRESETS = ("bounded", "halfline", "realline", "jacobi", "laguerre", "hermite")
DEFAULT_SEED = 20261014

# centering used by the negative control: the limit law of a different family
_WRONG_LIMIT = {"arcsine": "marchenko_pastur", "marchenko_pastur": "semicircle",
                "semicircle": "marchenko_pastur"}


# -- generic statistics ------------------------------------------------------------

def _check_count(x, what="samples"):
    if len(x) < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} {what}, got {len(x)}")


def ks_normal(samples):
    """One-sample KS against ``N(0, 1)``; ``(statistic, p-value)``, asymptotic p."""
    x = np.asarray(samples, dtype=float).ravel()
    _check_count(x)
    res = stats.kstest(x, "norm", method="asymp")
    return float(res.statistic), float(res.pvalue)


def ks_uniform(samples):
    x = np.asarray(samples, dtype=float).ravel()
    _check_count(x)
    res = stats.kstest(x, "uniform", method="asymp")
    return float(res.statistic), float(res.pvalue)


def two_sample_ks(x, y):
    """Two-sample KS statistic and asymptotic p-value."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    _check_count(x)
    _check_count(y)
    res = stats.ks_2samp(x, y, method="asymp")
    return float(res.statistic), float(res.pvalue)


def empirical_cov(vectors) -> np.ndarray:
    """Unbiased covariance of the rows of ``vectors`` (N, k)."""
    v = np.asarray(vectors, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    _check_count(v)
    return np.atleast_2d(np.cov(v, rowvar=False))


def jacobian_fd(func: Callable, x0, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of ``func`` at ``x0``; error ``O(h^2)``."""
    x0 = np.asarray(x0, dtype=float)
    cols = []
    for i in range(len(x0)):
        e = np.zeros_like(x0)
        e[i] = h
        try:
            fp = np.asarray(func(x0 + e), dtype=float)
            fm = np.asarray(func(x0 - e), dtype=float)
        except Exception as exc:
            raise EvaluationFailure(f"map failed at coordinate {i + 1} +- {h:g}: {exc}") from exc
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise EvaluationFailure(f"map returned non-finite values near coordinate {i + 1}")
        cols.append((fp - fm) / (2 * h))
    return np.column_stack(cols)


# -- standardization ---------------------------------------------------------------

def standardize(samples, limit, scale, M) -> np.ndarray:
    """``scale * M^{-1} (m - limit)`` for each row, by forward substitution."""
    if isinstance(samples, (list, tuple)) and samples and isinstance(samples[0], MomentVector):
        samples = [[float(v) for v in s.m] for s in samples]
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    lim = limit.as_array() if hasattr(limit, "as_array") else np.asarray(limit, dtype=float)
    mat = M.as_array() if hasattr(M, "as_array") else np.asarray(M, dtype=float)
    k = x.shape[1]
    if mat.shape != (k, k) or lim.shape != (k,):
        raise ValueError(f"dimension mismatch: samples have {k} coordinates")
    if np.any(np.triu(mat, 1) != 0):
        raise ValueError("scaling matrix must be lower triangular")
    if np.any(np.diag(mat) == 0):
        raise SingularMatrix("scaling matrix has a zero on its diagonal")
    y = linalg.solve_triangular(mat, (x - lim).T, lower=True)
    return scale * y.T


# -- experiments -------------------------------------------------------------------

@dataclass(frozen=True)
class CltExperimentSpec:
    """One CLT run. ``source`` is a :class:`MomentLawParams` or an :class:`EnsembleSpec`."""
    source: Union[MomentLawParams, EnsembleSpec]
    k: int
    N: int
    seed: int = DEFAULT_SEED
    preset: str = ""
    wrong_centering: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.N < 100:
            raise ValueError("N must be at least 100")
        top = self.source.dimension if isinstance(self.source, MomentLawParams) else 2 * self.source.n - 1
        if not 1 <= self.k <= top:
            raise ValueError(f"k must be in 1..{top}")

    @property
    def n(self) -> int:
        return self.source.n


@dataclass
class CltReport:
    preset: str
    k: int
    n: int
    samples: int
    seed: int
    ks: list
    cov: list
    max_cov_dev: float
    passed: bool
    centering: str
    scale: float
    non_interior: list = field(default_factory=list)
    thresholds: dict = field(default_factory=lambda: {"ks_level": KS_LEVEL,
                                                       "cov_tolerance": COV_TOLERANCE})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        order = ["preset", "k", "n", "samples", "seed", "ks", "cov", "max_cov_dev", "pass",
                 "centering", "scale", "non_interior", "thresholds"]
        return {key: d[key] for key in order}


def clt_preset(preset: str, n: int = 2000, k: int = 3, N: int = 20000, seed: int = DEFAULT_SEED,
               beta: float = 2.0, gamma=0, wrong_centering: bool = False,
               workers: int = 1) -> CltExperimentSpec:
    """Experiment for one of :data:`PRESETS`; ``gamma`` only affects moment laws."""
    if preset == "bounded":
        src = MomentLawParams.bounded(n, gamma, gamma)
    elif preset == "halfline":
        src = MomentLawParams.halfline(n, gamma)
    elif preset == "realline":
        src = MomentLawParams.realline(n, gamma)
    elif preset in ("jacobi", "laguerre", "hermite"):
        src = EnsembleSpec(preset, n, beta, scaling="clt_rescaled")
    else:
        raise ValueError(f"unknown preset {preset!r}; choose from {PRESETS}")
    return CltExperimentSpec(src, k, N, seed, preset, wrong_centering, workers)


def standardization_for(source, k):
    """``(limit name, LimitMoments, scale, ScalingMatrix)`` for a source law."""
    n = source.n
    if isinstance(source, MomentLawParams):
        sup = source.support
        if isinstance(sup, Bounded):
            return ("arcsine", asymptotics.limit_moments("arcsine", k, (sup.a, sup.b)),
                    math.sqrt(8 * n), asymptotics.matrix_A(k, (sup.a, sup.b)))
        if isinstance(sup, HalfLine):
            return ("marchenko_pastur", asymptotics.limit_moments("marchenko_pastur", k),
                    math.sqrt(n), asymptotics.matrix_C(k))
        return ("semicircle", asymptotics.limit_moments("semicircle", k),
                math.sqrt(2 * n), asymptotics.matrix_D(k))
    beta = source.beta
    if source.kind == "jacobi":
        return ("arcsine", asymptotics.limit_moments("arcsine", k), math.sqrt(4 * beta * n),
                asymptotics.matrix_A(k))
    if not source.rescaled:
        raise ValueError("Laguerre and Hermite CLTs need the rescaled ensembles")
    if source.kind == "laguerre":
        return ("marchenko_pastur", asymptotics.limit_moments("marchenko_pastur", k),
                math.sqrt(beta * n / 2), asymptotics.matrix_C(k))
    return ("semicircle", asymptotics.limit_moments("semicircle", k),
            math.sqrt(beta * n / 2), asymptotics.matrix_D(k))


def _moment_law_draw(params, k):
    sup = params.support

    def draw(gen, m):
        if isinstance(sup, Bounded):
            p = distributions.sample_canonical_bounded(params, gen, size=m, leading=k)
            moments = distributions.core.canonical_to_moments_batch(p, (sup.a, sup.b))
            bad = (p <= 0) | (p >= 1)
        elif isinstance(sup, HalfLine):
            z, moments = distributions.sample_moments_halfline(params, gen, size=m, leading=k)
            bad = z <= 0
        else:
            coords, moments = distributions.sample_moments_realline(params, gen, size=m, leading=k)
            bad = np.zeros_like(coords, dtype=bool)
            bad[:, 1::2] = coords[:, 1::2] <= 0
        return moments, bad

    return draw


def _ensemble_draw(spec, k):
    def draw(gen, m):
        d, c = ensembles.tridiagonal_batch(spec, gen, m)
        moments = ensembles.tridiagonal_moments(d, c, k)
        bad = np.zeros((m, k), dtype=bool)
        L = min(spec.n - 1, k // 2)
        bad[:, 1:2 * L:2] = c[:, :L] <= 0
        return moments, bad

    return draw


def sample_clt_moments(spec: CltExperimentSpec):
    """Raw first-``k`` moments (N, k) and per-entry boundary flags."""
    if isinstance(spec.source, MomentLawParams):
        draw = _moment_law_draw(spec.source, spec.k)
    else:
        draw = _ensemble_draw(spec.source, spec.k)
    return draw_blocks(draw, spec.seed, spec.N, workers=spec.workers)


def run_clt(spec: CltExperimentSpec, ks_level: float = KS_LEVEL,
            cov_tolerance: float = COV_TOLERANCE) -> CltReport:
    name, limit, scale, M = standardization_for(spec.source, spec.k)
    centering = name
    if spec.wrong_centering:
        centering = _WRONG_LIMIT[name]
        limit = asymptotics.limit_moments(centering, spec.k)
    moments, bad = sample_clt_moments(spec)
    y = standardize(moments, limit, scale, M)
    ks = []
    for j in range(spec.k):
        stat, p = ks_normal(y[:, j])
        ks.append({"coord": j + 1, "stat": stat, "p": p})
    cov = empirical_cov(y)
    dev = float(np.max(np.abs(cov - np.eye(spec.k))))
    ok = all(row["p"] > ks_level for row in ks) and dev < cov_tolerance
    return CltReport(spec.preset or name, spec.k, spec.n, spec.N, spec.seed, ks, cov.tolist(), dev,
                     bool(ok), centering, scale, [int(v) for v in bad.sum(axis=0)],
                     {"ks_level": ks_level, "cov_tolerance": cov_tolerance})


# -- ensemble cross-checks ---------------------------------------------------------

def jacobi_route_comparison(n: int, beta: float, size: int, seed: int, K: int = None,
                            gamma0: float = 0.0, delta0: float = 0.0) -> list:
    """Two-sample KS per moment between the two Jacobi routes.

    Route one builds the tridiagonal matrix, diagonalizes it and integrates
    monomials against the spectral measure. Route two samples canonical
    moments from ``f_{2n-1}`` with the ensemble's exponents and maps them
    to moments. Returns ``[(stat, p), ...]`` for ``m_1..m_K``.
    """
    K = 2 * n - 1 if K is None else K
    spec = EnsembleSpec("jacobi", n, beta, gamma0, delta0)

    def tri(gen, m):
        d, c = ensembles.tridiagonal_batch(spec, gen, m)
        atoms, weights = ensembles.spectral_batch(d, c)
        return np.einsum("ri,jri->rj", weights, atoms[None, :, :] ** np.arange(1, K + 1)[:, None, None])

    params = jacobi_moment_law(spec)

    def law(gen, m):
        return distributions.sample_moments_bounded(params, gen, size=m)[:, :K]

    root = distributions.RngStream(seed)
    x = draw_blocks(tri, root.child(0), size)
    y = draw_blocks(law, root.child(1), size)
    return [two_sample_ks(x[:, j], y[:, j]) for j in range(K)]


def jacobi_moment_law(spec: EnsembleSpec) -> MomentLawParams:
    """``f_{2n-1}`` exponents of the Jacobi spectral-measure moments.

    With ``t_k = (beta/2 - 2)(n - k)``:
    ``gamma_{2k-1} = t_k + gamma0``, ``delta_{2k-1} = t_k + delta0``,
    ``gamma_{2k} = t_k`` and ``delta_{2k} = t_{k+1} + gamma0 + delta0``.
    """
    n, b = spec.n, spec.beta
    gamma, delta = [], []
    for j in range(1, 2 * n):
        k = (j + 1) // 2
        t = (b / 2 - 2) * (n - k)
        if j % 2:
            gamma.append(t + spec.gamma0)
            delta.append(t + spec.delta0)
        else:
            gamma.append(t)
            delta.append((b / 2 - 2) * (n - k - 1) + spec.gamma0 + spec.delta0)
    return MomentLawParams(Bounded(0, 1), 2 * n - 1, tuple(gamma), tuple(delta))


def laguerre_moment_law(spec: EnsembleSpec) -> MomentLawParams:
    """``g_{2n-1}`` parameters of the Laguerre spectral-measure moments.

    ``gamma_{2k-1} = (beta/2 - 2)(n-k) + gamma0``,
    ``gamma_{2k} = (beta/2 - 2)(n-k)`` and rate 1 (``beta n / 2`` rescaled).
    """
    n, b = spec.n, spec.beta
    gamma = []
    for j in range(1, 2 * n):
        k = (j + 1) // 2
        gamma.append((b / 2 - 2) * (n - k) + (spec.gamma0 if j % 2 else 0))
    rate = b * n / 2 if spec.rescaled else 1.0
    return MomentLawParams(HalfLine(), 2 * n - 1, tuple(gamma), rate)


@dataclass
class ArbitrationResult:
    """Outcome of one tridiagonal-versus-dense comparison.

    ``full_model_error`` is set when the parameterization has a
    non-positive Gamma shape somewhere in the full ``n x n`` model; such a
    model does not define a law and is never counted as passing.
    """
    kind: str
    beta: int
    shape: str
    pvalues: list
    passed: bool
    full_model_error: str = ""


def dense_oracle_arbitration(kind: str, beta: int, shape: str = None, n: int = 8,
                             size: int = 5000, seed: int = DEFAULT_SEED, K: int = 3,
                             level: float = KS_LEVEL) -> ArbitrationResult:
    """Compare tridiagonal and dense-matrix spectral moments ``m_1..m_K``.

    Only the leading ``(K//2 + 1)`` block of the tridiagonal model enters
    ``m_1..m_K``; sampling just that block is exact since the entries are
    independent, and it keeps the comparison informative for
    parameterizations that break down further down the diagonal.
    """
    if kind == "hermite":
        spec = EnsembleSpec(kind, n, beta, hermite_shape=shape or ensembles.DEFAULT_HERMITE_SHAPE)
        label = spec.hermite_shape
    else:
        spec = EnsembleSpec(kind, n, beta)
        label = "standard"
    error = ""
    if kind == "hermite":
        try:
            ensembles.hermite_gamma_shapes(spec)
        except NonPositiveShape as exc:
            error = str(exc)
    L = min(n, K // 2 + 1)
    root = distributions.RngStream(seed)
    d, c = ensembles.tridiagonal_batch(spec, root.child(0), size, leading=L)
    x = ensembles.tridiagonal_moments(d, c, K)
    y = ensembles.dense_oracle_moments(kind, n, beta, root.child(1), size, K)
    ps = [two_sample_ks(x[:, j], y[:, j])[1] for j in range(K)]
    return ArbitrationResult(kind, beta, label, ps, all(p > level for p in ps) and not error, error)
