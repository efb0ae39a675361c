"""Timing comparison of the numba and numpy evolution backends.

Runs the plain evolve kernel and the accumulating kernel for both
walks on each backend and prints a table with speedups.  The numba
functions are called once before timing so compilation cost stays out
of the numbers.

Usage: python3 benchmarks/bench_kernels.py [--d D] [--steps N]
"""

import argparse
import time

import numpy as np

from cyclewalk import _kernels


def _start_state(d):
    amps = np.zeros((d, 4), dtype=np.complex128)
    amps[0, 0] = 1.0
    return amps


def _time(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=12)
    ap.add_argument("--steps", type=int, default=200_000)
    args = ap.parse_args()

    c, s = np.cos(3 * np.pi / 4), np.sin(3 * np.pi / 4)
    amps = _start_state(args.d)
    cases = [
        ("evolve_recycled", (amps, args.steps, c, s)),
        ("evolve_memory", (amps, args.steps)),
        ("evolve_recycled_accumulate", (amps, args.steps, c, s)),
        ("evolve_memory_accumulate", (amps, args.steps)),
        ("evolve_recycled_normscan", (amps, args.steps, c, s)),
        ("evolve_memory_normscan", (amps, args.steps)),
    ]

    numpy_impl = _kernels.get_impl("numpy")
    numba_impl = None
    if _kernels.HAS_NUMBA:
        numba_impl = _kernels.get_impl("numba")
        for name, case_args in cases:
            numba_impl[name](case_args[0], 16, *case_args[2:])  # compile

    print("d=%d steps=%d" % (args.d, args.steps))
    header = "%-28s %12s %12s %9s" % ("kernel", "numpy [s]", "numba [s]",
                                      "speedup")
    print(header)
    print("-" * len(header))
    for name, case_args in cases:
        t_np = _time(numpy_impl[name], *case_args)
        if numba_impl is None:
            print("%-28s %12.4f %12s %9s" % (name, t_np, "n/a", "n/a"))
            continue
        t_nb = _time(numba_impl[name], *case_args)
        print("%-28s %12.4f %12.4f %8.1fx" % (name, t_np, t_nb, t_np / t_nb))


if __name__ == "__main__":
    main()
