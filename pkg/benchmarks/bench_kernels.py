#!/usr/bin/env python3
"""Benchmark the JIT-compiled kernels against their pure-NumPy twins.

Run with the package installed:

    python3 benchmarks/bench_kernels.py            # kernel micro-benchmarks
    python3 benchmarks/bench_kernels.py --end-to-end

The second form also times a full placement optimization twice, once in a
subprocess with MOVANT_DISABLE_NUMBA=1, so both code paths run exactly as a
user would see them.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from movant import kernels
from movant.harness import default_scenario
from movant.positioning import PenaltyConfig, optimize_positions


def _time(fn, *args, repeat=2000):
    fn(*args)  # warm-up / JIT compile
    best = float("inf")
    for _ in range(3):
        start = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        best = min(best, (time.perf_counter() - start) / repeat)
    return best


def bench_kernels():
    scenario = default_scenario()
    pos = scenario.initial_positions.coords.copy()
    dirs = scenario.direction_vectors()
    amps = scenario.amplitudes()
    wn = scenario.wavenumber
    lo, hi = scenario.region_bounds()
    point = np.array([12.0, -3.0])
    center = np.array([5.0, 5.0])

    cases = [
        ("channel_matrix", (pos, dirs, amps, wn)),
        ("trace_at", (pos, dirs, amps, wn, 1e12)),
        ("trace_and_grad", (pos, dirs, amps, wn, 1e12)),
        ("project_box_disk", (point, lo, hi, center, 1.5, 1e-10, 20000)),
        ("project_deployment", (pos + 2.0, pos, 1.5, lo, hi, 1e-10, 20000)),
    ]
    label = "numba" if kernels.NUMBA_ENABLED else "numpy (numba disabled)"
    print(f"active path: {label}")
    print(f"{'kernel':<20} {'active':>12} {'pure numpy':>12} {'speedup':>9}")
    for name, args in cases:
        active = _time(getattr(kernels, name), *args)
        pure = _time(kernels.PY_KERNELS[name], *args, repeat=200)
        ratio = pure / active if active > 0 else float("nan")
        print(f"{name:<20} {active * 1e6:>10.2f}us {pure * 1e6:>10.2f}us {ratio:>8.1f}x")


def bench_end_to_end():
    if os.environ.get("MOVANT_DISABLE_NUMBA"):
        scenario = default_scenario(max_speed_wl_s=6.0)
        cfg = PenaltyConfig()
        start = time.perf_counter()
        optimize_positions(scenario, 1.0, config=cfg)
        print(f"end-to-end optimize (numpy): {time.perf_counter() - start:.3f}s")
        return
    scenario = default_scenario(max_speed_wl_s=6.0)
    cfg = PenaltyConfig()
    optimize_positions(scenario, 1.0, config=cfg)  # JIT warm-up
    start = time.perf_counter()
    optimize_positions(scenario, 1.0, config=cfg)
    numba_s = time.perf_counter() - start
    print(f"end-to-end optimize (numba): {numba_s:.3f}s")
    env = dict(os.environ, MOVANT_DISABLE_NUMBA="1")
    subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--end-to-end-inner"],
        env=env,
        check=True,
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--end-to-end", action="store_true")
    parser.add_argument("--end-to-end-inner", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.end_to_end_inner:
        bench_end_to_end()
        return
    bench_kernels()
    if args.end_to_end:
        bench_end_to_end()


if __name__ == "__main__":
    main()
