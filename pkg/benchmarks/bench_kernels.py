"""Time the numba and numpy flavours of each hot kernel.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from affine_ifs import catalog, kernels
from affine_ifs.measures import transfer_table


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    bv = catalog.bv_triangle()
    s = bv.system
    rng = np.random.default_rng(0)

    idx = rng.integers(0, 2, 1_000_000).astype(np.int64)
    x0 = np.array([0.3, 0.3])
    dest, w = transfer_table(s, bv.bounds, 256)
    mass = rng.uniform(size=256 * 256)
    mass /= mass.sum()
    a = rng.uniform(size=(4000, 2))
    b = rng.uniform(size=(4000, 2))

    cases = [
        ("chaos_orbit  (1e6 steps)", lambda k: k(s.linears, s.offsets, idx, x0, 1e12), kernels.chaos_orbit_nb, kernels.chaos_orbit_np),
        ("splat        (256^2 grid)", lambda k: k(dest, w, s.probs, mass), kernels.splat_nb, kernels.splat_np),
        ("hausdorff    (4000x4000)", lambda k: k(a, b), kernels.directed_hausdorff_nb, kernels.directed_hausdorff_np),
    ]
    print(f"{'kernel':28s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name, call, nb, npy in cases:
        t_nb = best_of(lambda: call(nb), args.repeat)
        t_np = best_of(lambda: call(npy), args.repeat)
        print(f"{name:28s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
