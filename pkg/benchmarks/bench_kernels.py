"""Compare the numba and pure-numpy kernels on cube-sized inputs.

    python benchmarks/bench_kernels.py [--sizes 12,16,20] [--repeat 5]

Both paths are timed in one process (the numba functions are called
directly, so SIGNDEG_PURE_NUMPY does not matter here) and their outputs are
checked for equality first.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from signdeg import _kernels as K


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="12,16,20")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not hasattr(K, "_fwht_numba"):
        raise SystemExit("numba path unavailable (numba missing or SIGNDEG_PURE_NUMPY=1)")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'n':>4}{'numpy s':>12}{'numba s':>12}{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        table = rng.choice(np.array([-1, 1], dtype=np.int64), size=1 << n)
        weights = rng.integers(0, 1 << 8, size=n, dtype=np.int64)
        idx = np.arange(1 << n, dtype=np.int64)
        mask = (1 << n) - 1 - 5
        cases = [
            ("fwht", lambda: K._fwht_numpy(table), lambda: K._fwht_numba(table)),
            ("subset_sums", lambda: K._subset_sums_numpy(weights, 1 << 4),
             lambda: K._subset_sums_numba(weights, np.int64(1 << 4))),
            ("parity_of_masked", lambda: K._popcount_parity_numpy(idx, mask),
             lambda: K._popcount_parity_numba(idx, np.int64(mask))),
        ]
        for name, slow, fast in cases:
            if not np.array_equal(slow(), fast()):  # also warms up the jit
                raise SystemExit(f"{name}: paths disagree at n={n}")
            a, b = best_of(slow, args.repeat), best_of(fast, args.repeat)
            print(f"{name:<18}{n:>4}{a:>12.5f}{b:>12.5f}{a / b:>9.1f}x")


if __name__ == "__main__":
    main()
