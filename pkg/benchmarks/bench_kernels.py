"""Benchmark the compiled kernels against the numpy reference backend.

Times the two inner-loop primitives (per-mode block product, isotropic
constitutive update) in isolation and a full equilibrium solve end to end.
The solve is timed once per backend by toggling the module-level dispatch,
which is decided at import from FFTOPT_PURE_PYTHON; here we call both
implementations explicitly instead of re-importing.

Usage: python benchmarks/bench_kernels.py [--sizes 31,63,127] [--repeats 20]
"""

import argparse
import time

import numpy as np


def time_call(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n, repeats):
    from fftopt.kernels import _ck, reference

    rng = np.random.default_rng(0)
    blocks = rng.standard_normal((n, n, 6, 6)) + 1j * rng.standard_normal((n, n, 6, 6))
    vhat = rng.standard_normal((n, n, 6)) + 1j * rng.standard_normal((n, n, 6))
    field = rng.standard_normal((n, n, 2, 3))
    lam = rng.random((n, n, 1))
    mu = rng.random((n, n, 1)) + 0.5
    out_c = np.empty_like(vhat)
    out_f = np.empty_like(field)

    rows = []
    for label, impl in (("numpy", reference), ("cython", _ck)):
        t_mode = time_call(lambda: impl.mode_apply(blocks, vhat, out=out_c), repeats)
        t_iso = time_call(lambda: impl.isotropic_apply(lam, mu, field, out=out_f), repeats)
        rows.append((label, t_mode, t_iso))
    return rows


def bench_solve(n, repeats):
    import fftopt
    from fftopt.kernels import _ck, reference
    from fftopt import kernels, projection, material

    grid = fftopt.GridSpec(nx=n, ny=n)
    op = fftopt.build_projection(grid)
    pair = fftopt.MaterialPair.from_moduli(E0=0.0, nu0=0.0, E1=1.0, nu1=0.0)
    rng = np.random.default_rng(1)
    rho = 0.2 + 0.6 * rng.random(grid.shape)
    case = fftopt.load_cases(0.01)[0]

    timings = {}
    saved = (kernels.mode_apply, kernels.isotropic_apply,
             projection.kernels, material.kernels)
    try:
        for label, impl in (("numpy", reference), ("cython", _ck)):
            projection.kernels = impl
            material.kernels = impl
            timings[label] = time_call(
                lambda: fftopt.solve(op, pair, rho, case), max(1, repeats // 5)
            )
    finally:
        projection.kernels, material.kernels = saved[2], saved[3]
    return timings


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--sizes", default="31,63,127")
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    try:
        from fftopt.kernels import _ck  # noqa: F401
    except ImportError:
        raise SystemExit("compiled extension not built; nothing to compare")

    print(f"{'n':>5} {'backend':>8} {'mode_apply':>12} {'isotropic':>12} {'speedup':>8}")
    for n in sizes:
        rows = bench_kernels(n, args.repeats)
        base = rows[0]
        for label, t_mode, t_iso in rows:
            speed = base[1] / t_mode
            print(f"{n:>5} {label:>8} {t_mode * 1e6:>10.1f}us {t_iso * 1e6:>10.1f}us "
                  f"{speed:>7.2f}x")

    print()
    print(f"{'n':>5} {'backend':>8} {'full solve':>12} {'speedup':>8}")
    for n in sizes:
        timings = bench_solve(n, args.repeats)
        for label, t in timings.items():
            print(f"{n:>5} {label:>8} {t * 1e3:>10.2f}ms "
                  f"{timings['numpy'] / t:>7.2f}x")


if __name__ == "__main__":
    main()
