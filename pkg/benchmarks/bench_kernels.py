"""Compare the numba and numpy propagation backends.

Run from the repository root::

    python3 benchmarks/bench_kernels.py [--points 201] [--repeat 3]

Both backends take the same adaptive step sequence, so the timings compare
like with like; the script also reports the largest fidelity difference.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from sapkit import _accel
from sapkit.dynamics import propagate_batch
from sapkit.pulse import HshParams, build_sap

CASES = {
    "SAP1": (HshParams(4.0, 0.5, 2.0, 2.0, 1.0, 4.0), 1),
    "SAP2": (HshParams(4.0, 0.5, 2.0, 2.0, 1.0, 4.0), 2),
    "SAP3": (HshParams(3.0, 0.4, 1.5, 2.0, 0.5, 5.0), 3),
}


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=201, help="detuning points per sweep")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = [b for b in _accel.BACKENDS if b != "numba" or _accel.HAVE_NUMBA]
    print(f"{'case':6} {'backend':8} {'seconds':>9} {'ms/point':>9} {'steps/point':>12}")
    for name, (params, n) in CASES.items():
        pulse = build_sap(params, n)
        grid = np.linspace(-0.75 * pulse.band_width, 0.75 * pulse.band_width, args.points)
        results = {}
        for backend in backends:
            propagate_batch(pulse, grid[:2], backend=backend)  # compile / warm up
            res = {}

            def job():
                res["r"] = propagate_batch(pulse, grid, backend=backend)

            secs = best_time(job, args.repeat)
            results[backend] = res["r"]
            print(f"{name:6} {backend:8} {secs:9.3f} {1e3 * secs / args.points:9.3f} "
                  f"{res['r'].steps.mean():12.1f}")
        if len(results) == 2:
            diff = np.nanmax(np.abs(results["numba"].fidelity - results["numpy"].fidelity))
            print(f"{name:6} max |F_numba - F_numpy| = {diff:.1e}")


if __name__ == "__main__":
    main()
