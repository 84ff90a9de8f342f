"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--n 196] [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from levyflow import SynthSpec, sample_levy_flows
from levyflow import _fallback
from levyflow.density import n_bins
from levyflow.smoothing import equivalent_kernel_coeffs, rot_bandwidth

try:
    from levyflow import _core
except ImportError:
    _core = None


def cases(n):
    flow, dist = sample_levy_flows(SynthSpec(n=n, n_moves=1_000_000, seed=0))
    f, d = flow.values, dist.values
    nb = n_bins(dist.max_distance, 500.0)
    off = ~np.eye(n, dtype=bool)
    order = np.argsort(d[off], kind="stable")
    ds, ws = np.ascontiguousarray(d[off][order]), np.ascontiguousarray(f[off][order])
    grid = np.linspace(0, dist.max_distance, 200)
    h = rot_bandwidth(ds, ws)
    coeffs = np.array(equivalent_kernel_coeffs(2))
    return {
        "bin_accumulate": lambda m: m.bin_accumulate(f, d, 500.0, nb),
        "local_poly_density": lambda m: m.local_poly_density(ds, ws, grid, h, coeffs),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=196)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    backends = {"python": _fallback}
    if _core is not None:
        backends["cython"] = _core
    print(f"n={args.n} countries, best of {args.repeat}")
    print(f"{'kernel':<20}" + "".join(f"{b:>12}" for b in backends) + (f"{'speedup':>10}" if _core else ""))
    for name, fn in cases(args.n).items():
        times = {b: min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for b, m in backends.items()}
        row = f"{name:<20}" + "".join(f"{t * 1e3:>10.3f}ms" for t in times.values())
        if _core is not None:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
