#!/usr/bin/env python3
"""Compare the numba-compiled kernels against the pure-Python fallback.

The fallback is selected with PALMPC_NO_NUMBA=1; this script runs itself in
a subprocess with that flag set, so one invocation reports both paths:

    python3 benchmarks/jit_vs_fallback.py [--n 2048] [--repeat 3]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def bench_once(n: int, repeat: int) -> dict:
    from palmpc._kernels import NUMBA_ENABLED, manacher_tables
    from palmpc.mpc import solve_mpc
    from palmpc.oracle import oracle_maximal_palindromes

    rng = np.random.default_rng(0)
    s = rng.integers(0, 4, n).astype(np.int64)

    manacher_tables(s)                      # warm the JIT once
    t0 = time.perf_counter()
    for _ in range(repeat * 20):
        manacher_tables(s)
    t_kernel = (time.perf_counter() - t0) / (repeat * 20)

    oracle_maximal_palindromes(s)
    t0 = time.perf_counter()
    for _ in range(repeat * 20):
        oracle_maximal_palindromes(s)
    t_oracle = (time.perf_counter() - t0) / (repeat * 20)

    solve_mpc(s, 0.5, seed=1)
    t0 = time.perf_counter()
    for _ in range(repeat):
        solve_mpc(s, 0.5, seed=1)
    t_solve = (time.perf_counter() - t0) / repeat

    return {"jit": NUMBA_ENABLED, "manacher_ms": t_kernel * 1e3,
            "oracle_ms": t_oracle * 1e3, "solve_ms": t_solve * 1e3}


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=2048)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    res = bench_once(args.n, args.repeat)
    label = "numba" if res["jit"] else "fallback"
    print(f"{label:>9s}  n={args.n}  manacher {res['manacher_ms']:8.3f} ms   "
          f"oracle {res['oracle_ms']:8.3f} ms   full solve {res['solve_ms']:9.1f} ms",
          flush=True)

    if not args.child and res["jit"]:
        env = dict(os.environ, PALMPC_NO_NUMBA="1")
        subprocess.run([sys.executable, __file__, "--n", str(args.n),
                        "--repeat", str(args.repeat), "--child"],
                       env=env, check=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
