"""Compare the compiled integrator core against the pure Python kernels.

Run:  python3 benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from stiffgeo import kernels
from stiffgeo.kernels import reference


def _bench(fn, *args, repeat=200, **kwargs):
    best = math.inf
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            out = fn(*args, **kwargs)
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best, out


def main() -> None:
    eps = np.array([1.0, 1.0])
    lam = 0.0
    V0 = np.eye(2)
    args = (kernels.PATH_TRIG, np.array([1.0, 0.0]), np.array([0.0, 1.0]),
            0.0, 2.0 * math.pi, lam, eps, V0)

    impls = [("python", reference.transport_segment)]
    if kernels.BACKEND == "compiled":
        from stiffgeo import _fastkernels
        impls.append(("compiled", _fastkernels.transport_segment))
    else:
        print("compiled backend unavailable; timing the pure kernels only")

    results = {}
    for name, fn in impls:
        dt, (V, err, steps, status) = _bench(fn, *args)
        results[name] = (dt, V)
        print(f"{name:>9}: {dt * 1e3:8.3f} ms/call   steps={steps}  "
              f"status={status}  err~{err:.2e}")

    if len(results) == 2:
        dev = float(np.abs(results["python"][1] - results["compiled"][1]).max())
        speedup = results["python"][0] / results["compiled"][0]
        print(f"agreement: max deviation {dev:.2e}")
        print(f"speedup:   {speedup:.1f}x")


if __name__ == "__main__":
    main()
