#!/usr/bin/env python3
"""Benchmark the compiled planner kernels against the pure-Python fallback.

Times the batched channel loops directly on both kernel modules, then runs
the full exp1 gait simulation in subprocesses with GAITPLAN_BACKEND forced,
so the engine-level numbers include the Python stride logic and inverse
kinematics that do not change between backends.

Usage: python benchmarks/bench_backends.py [--steps N]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from gaitplan.backend import load_backend

ENGINE_SNIPPET = """
import time
from gaitplan.backend import BACKEND
from gaitplan.simulate import run_builtin
assert BACKEND == {backend!r}, BACKEND
t0 = time.perf_counter()
res = run_builtin("exp1")
el = time.perf_counter() - t0
assert res.report.passed
print(f"{{el:.4f}}")
"""


def time_kernel(mod, kind: str, steps: int) -> float:
    out = [np.empty(steps + 1), np.empty(steps + 1), np.empty(steps + 1), np.empty(steps)]
    dt = 5.0 / steps
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        if kind == "x":
            mod.run_x(0.0, 0.0, 0.0, 2.0, 1.0, 1.0, 5.0, 0.0, dt, dt, steps, *out)
        else:
            mod.run_y(0.0, 0.0, 0.0, 1.0, -8.6016, 5.0, 0.0, dt, dt, steps, *out)
        best = min(best, time.perf_counter() - t0)
    return best


def time_engine(backend: str) -> float | None:
    env = dict(os.environ, GAITPLAN_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, "-c", ENGINE_SNIPPET.format(backend=backend)],
        capture_output=True, text=True, env=env,
    )
    if proc.returncode != 0:
        return None
    return float(proc.stdout.strip())


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=1_000_000, help="kernel loop length")
    args = ap.parse_args()

    backends = {}
    for name in ("compiled", "python"):
        try:
            backends[name] = load_backend(name)
        except ImportError:
            print(f"note: {name} backend unavailable")

    rows = []
    for kind in ("x", "y"):
        timings = {
            name: time_kernel(mod, kind, args.steps) for name, mod in backends.items()
        }
        rows.append((f"run_{kind} ({args.steps} steps)", timings))

    engine_timings = {}
    for name in backends:
        el = time_engine(name)
        if el is not None:
            engine_timings[name] = el
    rows.append(("exp1 gait run (12000 ticks)", engine_timings))

    width = max(len(r[0]) for r in rows) + 2
    print(f"{'benchmark':<{width}}{'compiled':>12}{'python':>12}{'speedup':>10}")
    for label, timings in rows:
        c = timings.get("compiled")
        p = timings.get("python")
        cs = f"{c*1e3:9.1f} ms" if c is not None else "       n/a"
        ps = f"{p*1e3:9.1f} ms" if p is not None else "       n/a"
        sp = f"{p/c:9.1f}x" if c and p else "       n/a"
        print(f"{label:<{width}}{cs:>12}{ps:>12}{sp:>10}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
