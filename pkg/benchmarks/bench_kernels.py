"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from phasegrass import _kernels as K
from phasegrass.boson import ComplexGrid, thermal_state


def best_of(fn, args, repeat):
    fn(*args)  # warm-up, includes JIT compilation for numba
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    rng = np.random.default_rng(0)
    ma = np.unique(rng.integers(0, 1 << 18, 400)).astype(np.int64)
    mb = np.unique(rng.integers(0, 1 << 18, 400)).astype(np.int64)
    ca = rng.normal(size=ma.size) + 0j
    cb = rng.normal(size=mb.size) + 0j
    grid = ComplexGrid(5.0, 101)
    xis = np.ascontiguousarray(grid.nodes.ravel())
    rho = thermal_state(1.0, 40)
    F = np.zeros((20, 20), dtype=complex)
    F[0, 1] = 1
    g6 = np.ascontiguousarray(ComplexGrid(6.0, 121).nodes.ravel())
    return [
        ("poly_product 400x400 terms", "poly_product", (ma, ca, mb, cb)),
        ("char_normal 101^2 nodes, d=40", "char_normal_nodes", (rho, xis)),
        ("weyl_sum 121^2 nodes, d=20", "weyl_sum", (F, g6, 0.01)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'kernel':<34}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for label, name, a in cases():
        t_np = best_of(getattr(K, name + "_numpy"), a, args.repeat)
        t_nb = best_of(getattr(K, name + "_numba"), a, args.repeat)
        print(f"{label:<34}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
