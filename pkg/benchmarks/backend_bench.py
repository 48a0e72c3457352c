#!/usr/bin/env python3
"""Compare the numba kernel backend against the pure-numpy fallback.

Each backend runs in its own subprocess (the backend is fixed at import
time via PULSESIM_BACKEND), timing the same workloads: a closed-system
segmented evolution, the naive baseline, and an open-system run.

Usage: python benchmarks/backend_bench.py [--repeats N]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

_CHILD = r"""
import json, sys, time
import numpy as np
import pulsesim as ps
from pulsesim.bench import synthetic_sequence

repeats = int(sys.argv[1])

def timed(spec):
    ps.evolve(spec)  # warm-up (and JIT compile on the numba backend)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        ps.evolve(spec)
        best = min(best, time.perf_counter() - t0)
    return best

def ket0(dim):
    v = np.zeros(dim, complex); v[0] = 1.0
    return ps.QuantumState(ps.StateKind.KET, v)

seq = synthetic_sequence(12, 6.0, 2)
times = np.linspace(0.0, 6.0, 25)
closed = ps.EvolveSpec(seq, ket0(2), times)

seq4 = synthetic_sequence(8, 4.0, 4)
times4 = np.linspace(0.0, 4.0, 17)
c_op = 0.15 * np.eye(4, k=1)
open_spec = ps.EvolveSpec(seq4, ket0(4), times4, collapse_ops=(c_op,))

out = {
    "backend": ps.backend_name(),
    "closed_segmented_s": timed(closed),
    "closed_naive_s": timed(ps.EvolveSpec(seq, ket0(2), times, engine=ps.Engine.NAIVE)),
    "open_segmented_s": timed(open_spec),
}
print(json.dumps(out))
"""


def run_backend(backend: str, repeats: int) -> dict:
    env = dict(os.environ, PULSESIM_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, "-c", _CHILD, str(repeats)],
        capture_output=True, text=True, env=env,
    )
    if proc.returncode != 0:
        raise RuntimeError(f"{backend} child failed:\n{proc.stderr}")
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args(argv)

    results = {b: run_backend(b, args.repeats) for b in ("numpy", "numba")}
    workloads = ["closed_segmented_s", "closed_naive_s", "open_segmented_s"]

    print(f"{'workload':<20} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for w in workloads:
        t_np = results["numpy"][w]
        t_nb = results["numba"][w]
        print(f"{w[:-2]:<20} {t_np*1e3:9.2f}ms {t_nb*1e3:9.2f}ms {t_np/t_nb:7.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
