"""Acceptance criteria 1-10, each at its stated tolerance.

Every test carries ``@pytest.mark.criterion(n)``; ``conftest.py`` prints one
PASS/FAIL line per criterion at the end of the run.
"""
import hashlib
import io
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from momentforge import asymptotics as asy, cli, core, distributions as dist, statlab as sl
from momentforge import ensembles as ens

SEED = 20261014  # pre-registered


def crit(n):
    return pytest.mark.criterion(n)


def rel_err(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    return float(np.max(np.abs(x - y)) / np.max(np.abs(y)))


# -- 1. Catalan fixed point ----------------------------------------------------------

@crit(1)
def test_catalan_fixed_point(record_property):
    t = time.perf_counter()
    for n in range(1, 21):
        z = core.moments_to_z([asy.catalan(k) for k in range(1, n + 1)]).z
        assert z == (Fraction(1),) * n
        assert all(isinstance(v, Fraction) for v in z)
    elapsed = time.perf_counter() - t
    record_property("seconds", round(elapsed, 3))
    assert elapsed < 1.0


# -- 2. round trips --------------------------------------------------------------------

def _bounded_case(rng, exact):
    N = int(rng.integers(1, 13))
    w = rng.uniform(0.5, 4.0)
    lo = -w * rng.uniform(0.0, 1.0)
    iv = (lo, lo + w)
    p = rng.uniform(0.05, 0.95, N)
    if exact:
        iv = tuple(Fraction(v).limit_denominator(1000) for v in iv)
        p = [Fraction(v).limit_denominator(1000) for v in p]
    m = core.canonical_to_moments(tuple(p), iv).m
    back = core.canonical_to_moments(core.moments_to_canonical(m, core.Bounded(*iv)).p, iv).m
    return m, back


def _halfline_case(rng, exact):
    N = int(rng.integers(1, 13))
    z = rng.uniform(0.2, 3.0, N)
    if exact:
        z = [Fraction(v).limit_denominator(1000) for v in z]
    m = core.skibinsky_forward(tuple(z)).m
    return m, core.skibinsky_forward(core.moments_to_z(m).z).m


def _realline_case(rng, exact):
    n = int(rng.integers(1, 7))  # dimension 2n - 1 <= 11
    b = rng.uniform(-1.0, 1.0, n)
    a = rng.uniform(0.3, 2.0, n - 1)
    if exact:
        b = [Fraction(v).limit_denominator(1000) for v in b]
        a = [Fraction(v).limit_denominator(1000) for v in a]
    m = core.recurrence_to_moments(core.RecurrenceCoefficients(tuple(b), tuple(a))).m
    rec = core.moments_to_recurrence(m)
    return m, core.recurrence_to_moments(rec).m


CASES = {"bounded": _bounded_case, "halfline": _halfline_case, "realline": _realline_case}


@crit(2)
@pytest.mark.parametrize("support", list(CASES))
def test_round_trips(support, record_property):
    rng = np.random.default_rng([SEED, list(CASES).index(support)])
    t = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        m, back = CASES[support](rng, exact=False)
        worst = max(worst, rel_err(back, m))
    for _ in range(1000):
        m, back = CASES[support](rng, exact=True)
        assert tuple(back) == tuple(m)
    elapsed = time.perf_counter() - t
    record_property("max_rel_err", f"{worst:.2e}")
    record_property("seconds", round(elapsed, 1))
    assert worst < 1e-9
    assert elapsed < 30


# -- 3. Jacobian identities ------------------------------------------------------------

@crit(3)
def test_jacobian_matrices(record_property):
    k = 6
    J = sl.jacobian_fd(lambda z: core.skibinsky_forward(z).m, np.ones(k))
    errs = [np.max(np.abs(J - asy.matrix_C(k).as_array()))]

    def from_recurrence(x):
        return core.recurrence_to_moments(core.RecurrenceCoefficients.from_interleaved(
            tuple(x) + (0.0,) if len(x) % 2 == 0 else tuple(x))).m[:k]

    x0 = np.array([0.0 if i % 2 == 0 else 1.0 for i in range(k)])
    J = sl.jacobian_fd(from_recurrence, x0)
    errs.append(np.max(np.abs(J - asy.matrix_D(k).as_array())))
    J = sl.jacobian_fd(lambda p: core.canonical_to_moments(p).m, np.full(k, 0.5))
    errs.append(np.max(np.abs(J - asy.matrix_A(k).as_array())))
    record_property("max_abs_err_C_D_A", ", ".join(f"{e:.1e}" for e in errs))
    assert max(errs) < 1e-4


@crit(3)
def test_jacobian_determinant_formula(record_property):
    rng = np.random.default_rng([SEED, 3])
    t = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 6))
        a = rng.uniform(-1.0, 0.5)
        b = a + rng.uniform(0.5, 2.0)
        p = rng.uniform(0.1, 0.9, n)
        m = np.array(core.canonical_to_moments(tuple(p), (a, b)).m)
        J = sl.jacobian_fd(lambda x: core.moments_to_canonical(tuple(x), core.Bounded(a, b)).p, m)
        fd = abs(np.linalg.det(J))
        k = np.arange(1, n + 1)
        formula = (b - a) ** (-n * (n + 1) / 2) * np.prod((p * (1 - p)) ** (-(n - k)))
        assert math.log(formula) == pytest.approx(dist.log_abs_jacobian_phi(p, (a, b)), abs=1e-12)
        worst = max(worst, abs(fd - formula) / formula)
    record_property("max_rel_err", f"{worst:.1e}")
    assert worst < 1e-4
    assert time.perf_counter() - t < 10


# -- 4. u-array induction ----------------------------------------------------------------

@crit(4)
def test_u_array_induction(record_property):
    t = time.perf_counter()
    for r in range(1, 9):
        u = asy.u_array(r, 16)
        for j in range(17):
            for i in range(17):
                assert u[i][j] == asy.u_closed_form(i, j, r), (r, i, j)
    for N in range(1, 17):
        g = core.skibinsky_array([1] * N)
        table = asy.generalized_catalan_table(N)
        for j in range(N + 1):
            for i in range(j + 1):
                assert g[i][j] == table[i][j]
    elapsed = time.perf_counter() - t
    record_property("seconds", round(elapsed, 3))
    assert elapsed < 1.0


# -- 5. moment CLTs ----------------------------------------------------------------------

def _summary(report):
    ps = ",".join(f"{row['p']:.3g}" for row in report.ks)
    return f"p=[{ps}] max_cov_dev={report.max_cov_dev:.3f}"


@crit(5)
@pytest.mark.parametrize("preset,k", [("bounded", 4), ("halfline", 3), ("realline", 4)])
def test_moment_clt(preset, k, record_property):
    r = sl.run_clt(sl.clt_preset(preset, n=2000, k=k, N=20_000, seed=SEED))
    record_property("report", _summary(r))
    assert all(row["p"] > 0.01 for row in r.ks)
    assert r.max_cov_dev < 0.1
    assert r.passed


@crit(5)
@pytest.mark.parametrize("preset,k", [("bounded", 4), ("halfline", 3), ("realline", 4)])
def test_moment_clt_negative_control(preset, k, record_property):
    r = sl.run_clt(sl.clt_preset(preset, n=2000, k=k, N=20_000, seed=SEED, wrong_centering=True))
    record_property("min_p", f"{min(row['p'] for row in r.ks):.1e}")
    assert all(row["p"] < 1e-6 for row in r.ks)
    assert not r.passed


# -- 6. ensemble route equivalence -------------------------------------------------------

@crit(6)
@pytest.mark.parametrize("beta", [1.0, 2.0, 4.0])
def test_jacobi_route_equivalence(beta, record_property):
    res = sl.jacobi_route_comparison(6, beta, 10_000, SEED)
    ps = [p for _, p in res]
    record_property("min_p", f"{min(ps):.3g}")
    assert len(ps) == 11
    assert all(p > 0.01 for p in ps)


@crit(6)
def test_jacobi_beta4_n1_uniform(record_property):
    spec = ens.EnsembleSpec("jacobi", 1, 4.0, 0.0, 0.0)
    d, c = ens.tridiagonal_batch(spec, dist.RngStream(SEED), 10_000)
    m1 = ens.tridiagonal_moments(d, c, 1)[:, 0]
    p = sl.ks_uniform(m1)[1]
    record_property("p", f"{p:.3g}")
    assert p > 0.01


# -- 7. dense-oracle arbitration ---------------------------------------------------------

@crit(7)
@pytest.mark.parametrize("beta", [1, 2])
def test_hermite_arbitration(beta, record_property):
    results = [sl.dense_oracle_arbitration("hermite", beta, shape, n=8, size=5000, seed=SEED)
               for shape in ("dumitriu_edelman", "shifted")]
    winners = [r.shape for r in results if r.passed]
    record_property("winner", ",".join(winners) or "none")
    for r in results:
        record_property(r.shape, ",".join(f"{p:.3g}" for p in r.pvalues))
    assert len(winners) == 1
    assert winners[0] == ens.DEFAULT_HERMITE_SHAPE


@crit(7)
@pytest.mark.parametrize("beta", [1, 2])
def test_laguerre_arbitration(beta, record_property):
    r = sl.dense_oracle_arbitration("laguerre", beta, n=8, size=5000, seed=SEED)
    record_property("p", ",".join(f"{p:.3g}" for p in r.pvalues))
    assert r.passed


# -- 8. ensemble CLTs --------------------------------------------------------------------

@crit(8)
@pytest.mark.parametrize("preset", ["jacobi", "laguerre", "hermite"])
def test_ensemble_clt(preset, record_property):
    r = sl.run_clt(sl.clt_preset(preset, n=500, k=3, N=10_000, seed=SEED))
    record_property("report", _summary(r))
    assert r.passed


# -- 9. limit densities ------------------------------------------------------------------

@crit(9)
def test_limit_density_convergence(record_property):
    t = time.perf_counter()
    grid = (100, 1000, 10_000)
    half = dist.limit_density_check((1, 2, 5), dist.MomentLawParams.halfline(3, 0, 1), grid)
    real = dist.limit_density_check((0, 1, 0), dist.MomentLawParams.realline(2, 0, 1), grid)
    for name, rows in (("halfline", half), ("realline", real)):
        gaps = [float(r.gap) for r in rows]
        record_property(name, ",".join(f"{g:.2e}" for g in gaps))
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert time.perf_counter() - t < 1.0


# -- 10. determinism ---------------------------------------------------------------------

def _cli(args):
    out, err = io.StringIO(), io.StringIO()
    old = sys.stdout, sys.stderr
    sys.stdout, sys.stderr = out, err
    try:
        try:
            code = cli.main(list(args))
        except SystemExit as exc:
            code = exc.code
    finally:
        sys.stdout, sys.stderr = old
    return code


INVOCATIONS = {
    "sample-bounded": ["sample", "--space", "bounded:-1,2", "--n", "4", "--count", "3000"],
    "sample-halfline": ["sample", "--space", "halfline", "--n", "5", "--count", "3000"],
    "sample-realline": ["sample", "--space", "realline", "--n", "3", "--count", "3000"],
    "ensemble": ["ensemble", "--kind", "hermite", "--n", "6", "--beta", "2", "--moments", "4",
                 "--count", "3000", "--atoms"],
    "clt": ["clt", "--preset", "laguerre", "--n", "50", "--k", "3", "--samples", "3000"],
}


@crit(10)
@pytest.mark.parametrize("name", list(INVOCATIONS))
def test_cli_determinism(name, tmp_path):
    args = INVOCATIONS[name]
    flag = "--report" if args[0] == "clt" else "--output"
    digests = set()
    for i, workers in enumerate((1, 4, 1, 3)):
        path = tmp_path / f"out{i}"
        assert _cli(args + ["--seed", "7", "--workers", str(workers), flag, str(path)]) in (0, 1)
        digests.add(hashlib.sha256(path.read_bytes()).hexdigest())
    assert len(digests) == 1


@crit(10)
def test_cli_convert_determinism(tmp_path):
    src = tmp_path / "m.csv"
    src.write_text("1/2,1/3,1/4\n0.4,0.2,0.11\n")
    digests = set()
    for i in range(3):
        path = tmp_path / f"out{i}"
        assert _cli(["convert", "--from", "moments", "--to", "canonical", "--support",
                     "bounded:0,1", "--input", str(src), "--output", str(path)]) == 0
        digests.add(hashlib.sha256(path.read_bytes()).hexdigest())
    assert len(digests) == 1
