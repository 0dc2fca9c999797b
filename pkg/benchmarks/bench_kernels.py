"""Compare the compiled Jacobi eigensolver against the pure-Python fallback.

Runs both implementations on random symmetric matrices of a few sizes,
checks that they agree to machine precision, and prints a timing table.

Usage::

    python benchmarks/bench_kernels.py [--sizes 10,20,40,80] [--repeat 5]
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from vizalg._kernels import BACKEND
from vizalg._kernels._pyjacobi import jacobi_eigh as py_jacobi

try:
    from vizalg._kernels._jacobi import jacobi_eigh as cy_jacobi
except ImportError:
    cy_jacobi = None


def random_symmetric(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2.0


def time_one(func, matrices: list[np.ndarray]) -> float:
    start = time.perf_counter()
    for m in matrices:
        func(m.copy())
    return time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="10,20,40,80")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    rng = np.random.default_rng(2020)
    print(f"active backend: {BACKEND}")
    if cy_jacobi is None:
        print("compiled kernel unavailable; timing the fallback only")
    header = f"{'n':>5} {'python (ms)':>14} {'compiled (ms)':>14} {'speedup':>9}"
    print(header)
    print("-" * len(header))

    for n in sizes:
        matrices = [random_symmetric(n, rng) for _ in range(args.repeat)]

        if cy_jacobi is not None:
            for m in matrices:
                vals_py, vecs_py = py_jacobi(m.copy())
                vals_cy, vecs_cy = cy_jacobi(m.copy())
                if not np.allclose(vals_py, vals_cy, rtol=1e-12, atol=1e-12):
                    raise SystemExit(f"eigenvalue mismatch at n={n}")
                if not np.allclose(np.abs(vecs_py), np.abs(vecs_cy), atol=1e-9):
                    raise SystemExit(f"eigenvector mismatch at n={n}")

        t_py = min(time_one(py_jacobi, matrices) for _ in range(3)) / args.repeat
        if cy_jacobi is not None:
            t_cy = min(time_one(cy_jacobi, matrices) for _ in range(3)) / args.repeat
            print(f"{n:>5} {t_py * 1e3:>14.3f} {t_cy * 1e3:>14.3f} {t_py / t_cy:>8.1f}x")
        else:
            print(f"{n:>5} {t_py * 1e3:>14.3f} {'-':>14} {'-':>9}")


if __name__ == "__main__":
    main()
