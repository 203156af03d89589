#!/usr/bin/env python3
"""Time the numba-jitted kernels against the pure-numpy fallback.

Runs the two hot kernels (fixed-step RK4 propagation and the cyclic Jacobi
eigensolver) through both implementations on identical inputs, checks they
agree, and prints per-path timings plus the speedup.  When numba is disabled
(NSTATE_NO_NUMBA=1) or missing, only the numpy path is timed.

    python3 benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from nstate import _kernels
from nstate._kernels import PULSE_COSINE, _jacobi_numpy, _rk4_numpy, jacobi_eigh, run_rk4


def time_best(func, repeats):
    best = float("inf")
    for _ in range(repeats):
        tic = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - tic)
    return best


def bench_rk4(repeats):
    rng = np.random.default_rng(42)
    n = 8
    w = rng.normal(size=(n, n))
    w = w + w.T
    energies = 0.05 * rng.normal(size=n)
    a0 = np.zeros(n, np.complex128)
    a0[0] = 1.0
    args = (w, energies, PULSE_COSINE, (1.0, 0.7, 0.0), 2e-5, 100_000, 1000, a0)

    print(f"RK4: n={n}, 100k steps")
    _, amps_np, _ = run_rk4(*args, core=_rk4_numpy)
    t_np = time_best(lambda: run_rk4(*args, core=_rk4_numpy), repeats)
    print(f"  numpy fallback : {t_np * 1e3:9.2f} ms")
    if _kernels.NUMBA_ENABLED:
        run_rk4(*args)  # compile outside the timed region
        _, amps_nb, _ = run_rk4(*args)
        t_nb = time_best(lambda: run_rk4(*args), repeats)
        agreement = np.max(np.abs(amps_nb - amps_np))
        print(f"  numba njit     : {t_nb * 1e3:9.2f} ms")
        print(f"  speedup        : {t_np / t_nb:9.1f}x   (paths agree to {agreement:.2e})")
    else:
        print("  numba path disabled (NSTATE_NO_NUMBA or import failure)")


def bench_jacobi(repeats):
    rng = np.random.default_rng(7)
    n = 100
    m = rng.normal(size=(n, n))
    m = m + m.T

    print(f"Jacobi eigensolve: n={n}")
    vals_np, _ = jacobi_eigh(m, core=_jacobi_numpy)
    t_np = time_best(lambda: jacobi_eigh(m, core=_jacobi_numpy), repeats)
    print(f"  numpy fallback : {t_np * 1e3:9.2f} ms")
    if _kernels.NUMBA_ENABLED:
        jacobi_eigh(m)  # compile outside the timed region
        vals_nb, _ = jacobi_eigh(m)
        t_nb = time_best(lambda: jacobi_eigh(m), repeats)
        agreement = np.max(np.abs(vals_nb - vals_np))
        print(f"  numba njit     : {t_nb * 1e3:9.2f} ms")
        print(f"  speedup        : {t_np / t_nb:9.1f}x   (eigenvalues agree to {agreement:.2e})")
    else:
        print("  numba path disabled (NSTATE_NO_NUMBA or import failure)")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timing repetitions (best-of)")
    args = parser.parse_args()
    print(f"numba enabled: {_kernels.NUMBA_ENABLED}")
    bench_rk4(args.repeats)
    bench_jacobi(args.repeats)


if __name__ == "__main__":
    main()
