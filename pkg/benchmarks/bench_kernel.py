"""Compare the compiled and numpy trial kernels.

    python benchmarks/bench_kernel.py [--trials N] [--m M] [--repeat R]

Both backends are run on the same configuration; the script checks the
tallies are identical and reports trials per second.
"""

import argparse
import time

from tmqi import CH1
from tmqi import _kernel_py, montecarlo

try:
    from tmqi import _kernel as _kernel_c
except ImportError:
    _kernel_c = None


def run(kernel, cfg, repeat):
    montecarlo._kernel = kernel
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = montecarlo.simulate(cfg)
        best = min(best, time.perf_counter() - t0)
    return best, result.to_dict()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--m", type=int, default=14)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    cfg = montecarlo.SimConfig(CH1, args.m, args.trials, seed=12345)
    original = montecarlo._kernel
    timings = {}
    outputs = {}
    kernels = [_kernel_py] + ([_kernel_c] if _kernel_c is not None else [])
    for k in kernels:
        timings[k.BACKEND], outputs[k.BACKEND] = run(k, cfg, args.repeat)
    montecarlo._kernel = original
    print(f"m={args.m} trials={args.trials}")
    for name, t in timings.items():
        print(f"  {name:>7}: {t:8.3f} s   {args.trials / t:14,.0f} trials/s")
    if len(timings) == 2:
        print(f"  speed-up: {timings['numpy'] / timings['cython']:.1f}x")
        same = outputs["numpy"] == outputs["cython"]
        print(f"  identical tallies: {same}")
        if not same:
            raise SystemExit(1)


if __name__ == "__main__":
    main()
