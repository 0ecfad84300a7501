"""Timing comparison of the 0F2 series kernel: numba @njit vs pure Python.

The kernel module picks its implementation at import time from the
DUFFSPEC_DISABLE_NUMBA environment variable, so each mode runs in a
fresh subprocess and reports the time for one full response grid.

Usage:  python3 benchmarks/bench_kernels.py [--deltas N] [--epsilons M] [--repeats R]
"""

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, os, sys, time
import numpy as np
from duffspec import _kernels
from duffspec.closedform import dw_response_grid

nd, ne, repeats = json.loads(sys.argv[1])
deltas = np.linspace(-10.0, 2.0, nd)
epsilons = np.linspace(0.05, 5.0, ne)

t0 = time.perf_counter()
dw_response_grid(deltas[:2], epsilons[:2], 2.0, 1.0)   # compile + warm caches
warm = time.perf_counter() - t0

best = min(
    (lambda s: (dw_response_grid(deltas, epsilons, 2.0, 1.0), time.perf_counter() - s)[1])(
        time.perf_counter()
    )
    for _ in range(repeats)
)
print(json.dumps({"numba": _kernels.USING_NUMBA, "warmup_s": warm, "grid_s": best}))
"""


def run_mode(disable_numba, nd, ne, repeats):
    env = dict(os.environ)
    env["DUFFSPEC_DISABLE_NUMBA"] = "1" if disable_numba else ""
    out = subprocess.run(
        [sys.executable, "-c", _WORKER, json.dumps([nd, ne, repeats])],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--deltas", type=int, default=241)
    ap.add_argument("--epsilons", type=int, default=100)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    cells = args.deltas * args.epsilons
    print(f"grid {args.deltas} x {args.epsilons} = {cells} cells, best of {args.repeats}")
    jit = run_mode(False, args.deltas, args.epsilons, args.repeats)
    pure = run_mode(True, args.deltas, args.epsilons, args.repeats)
    if not jit["numba"]:
        print("note: numba unavailable; both rows ran the pure-numpy path")
    for name, r in (("numba @njit", jit), ("pure python", pure)):
        per = r["grid_s"] / cells * 1e6
        print(
            f"{name:12s}  warmup {r['warmup_s']:7.3f} s   "
            f"grid {r['grid_s']:8.4f} s   {per:8.2f} us/cell"
        )
    if jit["numba"] and jit["grid_s"] > 0:
        print(f"speedup: {pure['grid_s'] / jit['grid_s']:.1f}x")


if __name__ == "__main__":
    main()
