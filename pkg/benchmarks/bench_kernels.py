"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--rows 20000] [--repeat 5]

Both paths are run in the same process by flipping
``momentforge._accel.USE_NUMBA``; the first numba call (compilation) is
excluded from the timings. Results must agree bit for bit.
"""
import argparse
import time

import numpy as np

from momentforge import _accel, kernels


def _best(func, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = func()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(rows, rng):
    z = rng.uniform(0.2, 3.0, (rows, 12))
    d = rng.normal(size=(rows, 20))
    s = rng.uniform(0.5, 2.0, (rows, 19))
    c = np.sqrt(s)
    return {
        "skibinsky_batch (K=12)": lambda: kernels.skibinsky_batch(z),
        "tridiagonal_moments_batch (n=20, K=12)": lambda: kernels.tridiagonal_moments_batch(d, s, 12),
        "spectral_batch (n=20)": lambda: kernels.spectral_batch(d[: rows // 10], c[: rows // 10]),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=20261014)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':42s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speed-up':>9s}")
    saved = _accel.USE_NUMBA
    try:
        for name, func in cases(args.rows, rng).items():
            _accel.USE_NUMBA = True
            func()  # compile
            t_jit, a = _best(func, args.repeat)
            _accel.USE_NUMBA = False
            t_np, b = _best(func, args.repeat)
            a, b = (a,) if isinstance(a, np.ndarray) else a, (b,) if isinstance(b, np.ndarray) else b
            same = all(np.array_equal(x, y) for x, y in zip(a, b))
            flag = "" if same else "  (OUTPUTS DIFFER)"
            print(f"{name:42s} {t_np:10.4f} {t_jit:10.4f} {t_np / t_jit:8.1f}x{flag}")
    finally:
        _accel.USE_NUMBA = saved


if __name__ == "__main__":
    main()
