#!/usr/bin/env python3
"""Time the compiled kernels against the pure-Python fallback.

Both implementations are imported side by side (ignoring the import-time
backend choice), checked for bitwise-identical output on the benchmark
workloads, then timed with timeit. Run from the repository root:

    python3 benchmarks/bench_kernels.py [--steps N] [--sites M]
"""

import argparse
import math
import timeit

import numpy as np

from pointjump import manybody, profiles
from pointjump._kernels import PROFILE_IDS, _fallback

try:
    from pointjump._kernels import _core
except ImportError:
    _core = None


def rk4_args(steps):
    return (PROFILE_IDS["tanh"], 0.02, 0.5, 1.3, 1e-4, steps, steps // 20)


def e2_args(sites):
    spec = manybody.LatticeSpec(M=sites, L=2.0, N=max(4, sites // 8))
    sea = manybody.fermi_sea(spec.N, spec.M)
    vt = manybody.interaction_transform(
        profiles.duality_potential("tanh", 10.0 * spec.kappa, 0.1),
        spec.M, spec.kappa)
    n_idx = sea.n_indices
    occ_h = np.sort(np.mod(2 * n_idx, 2 * spec.M)).astype(np.int64)
    occ_mask = np.zeros(2 * spec.M, dtype=np.uint8)
    occ_mask[occ_h] = 1
    return occ_h, occ_mask, vt, spec.M, spec.kappa, spec.L


def same_bits(x, y):
    if x is None or y is None:
        return x is y
    if isinstance(x, tuple):
        return (isinstance(y, tuple) and len(x) == len(y)
                and all(same_bits(a, b) for a, b in zip(x, y)))
    if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
        return np.array_equal(np.asarray(x), np.asarray(y))
    return x == y


def best_time(fn, args, repeat=5):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200_000,
                    help="integrator steps (default 200000)")
    ap.add_argument("--sites", type=int, default=96,
                    help="lattice sites for the quadratic sum (default 96)")
    args = ap.parse_args()

    workloads = [
        ("rk4_duality", rk4_args(args.steps)),
        ("e2_lattice_sum", e2_args(args.sites)),
    ]
    if _core is None:
        print("compiled backend not built; timing the fallback only")
    print(f"{'kernel':<16}{'python':>14}{'compiled':>14}{'speedup':>10}")
    for name, wargs in workloads:
        f_py = getattr(_fallback, name)
        t_py = best_time(f_py, wargs)
        if _core is None:
            print(f"{name:<16}{t_py * 1e3:>11.3f} ms{'—':>14}{'—':>10}")
            continue
        f_c = getattr(_core, name)
        if not same_bits(f_py(*wargs), f_c(*wargs)):
            raise SystemExit(f"{name}: backends disagree bitwise")
        t_c = best_time(f_c, wargs)
        print(f"{name:<16}{t_py * 1e3:>11.3f} ms{t_c * 1e3:>11.3f} ms"
              f"{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
