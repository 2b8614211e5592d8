"""Time the Metropolis kernel with and without numba.

    python benchmarks/bench_sampler.py [--steps 20000] [--repeat 3]

Both kernels consume the same random stream, so the script also checks
that they return identical draws before reporting speeds.
"""

from __future__ import annotations

import argparse
import time

from cbm.sampler import NUMBA_ENABLED, default_config, run_chain


def best_time(cfg, accelerated: bool, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        run_chain(cfg, accelerated=accelerated)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20_000, help="sweeps per chain")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n", type=int, nargs="+", default=[2, 4, 8])
    args = ap.parse_args()

    if not NUMBA_ENABLED:
        print("numba disabled or missing; only the numpy/Python path is timed")
    print(f"{'n':>3} {'python s':>10} {'numba s':>10} {'speedup':>8}  draws equal")
    for n in args.n:
        cfg = default_config(n, 2.0, args.steps, seed=1)
        py = best_time(cfg, False, args.repeat)
        if not NUMBA_ENABLED:
            print(f"{n:>3} {py:>10.3f} {'-':>10} {'-':>8}  -")
            continue
        run_chain(default_config(n, 2.0, 10, seed=0), accelerated=True)  # compile
        jit = best_time(cfg, True, args.repeat)
        same = run_chain(cfg, accelerated=True).draws.tobytes() == run_chain(cfg, accelerated=False).draws.tobytes()
        print(f"{n:>3} {py:>10.3f} {jit:>10.3f} {py / jit:>7.1f}x  {same}")


if __name__ == "__main__":
    main()
