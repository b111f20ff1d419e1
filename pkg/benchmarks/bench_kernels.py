"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best wall time of ``--repeat`` calls after one warm-up
call (which absorbs JIT compilation) and the max abs difference between the
two outputs.
"""
import argparse
import time

import numpy as np

from cvquotient import _kernels


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    vd = np.array([5.05, 5.05])
    cd = np.array([2.475, -2.475])
    for n in (100, 10_000):
        yield (f"lattice_triplets n={n}",
               lambda n=n: _kernels.lattice_triplets_np(n, vd, cd),
               lambda n=n: _kernels.lattice_triplets_nb(n, vd, cd),
               lambda a: np.sort(a[2]))

    for n in (1_000, 100_000):
        rows, cols, vals = _kernels.lattice_triplets_np(n, vd, cd)
        yield (f"fold_triplets n={n}",
               lambda r=rows, c=cols, v=vals: _kernels.fold_triplets_np(r, c, v, 12),
               lambda r=rows, c=cols, v=vals: _kernels.fold_triplets_nb(r, c, v, 12),
               lambda a: a)

    rng = np.random.default_rng(0)
    m = 4
    a = rng.normal(size=(m, m))
    chol = np.linalg.cholesky(a @ a.T + m * np.eye(m))
    d_idx, u_idx, signs = np.array([0, 1]), np.array([2, 3]), np.array([1.0, -1.0])
    for n in (10_000, 1_000_000):
        z = rng.normal(size=(n, m))
        yield (f"product_moments n={n}",
               lambda z=z: _kernels.product_moments_np(z, chol, d_idx, u_idx, signs, 2),
               lambda z=z: _kernels.product_moments_nb(z, chol, d_idx, u_idx, signs, 2),
               lambda a: np.asarray(a, dtype=float))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if not _kernels.HAS_NUMBA:
        print("numba unavailable (or disabled); nothing to compare")
        return
    print(f"{'kernel':<28}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max diff':>12}")
    for name, f_np, f_nb, key in cases():
        t_np = best_of(f_np, args.repeat)
        t_nb = best_of(f_nb, args.repeat)
        diff = float(np.max(np.abs(key(f_np()) - key(f_nb()))))
        print(f"{name:<28}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>10.2f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
