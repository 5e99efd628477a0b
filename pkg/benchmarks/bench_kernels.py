"""Compare the numba and numpy simplex kernels on full DEA panel evaluations.

    python benchmarks/bench_kernels.py [--dmus 60 100 200] [--repeat 5]
"""

import argparse
import time

import numpy as np

from dea_research._kernels import NUMBA_AVAILABLE
from dea_research.dea import CostVector, DmuPanel, evaluate_panel
from dea_research.lp import SolverOptions


def make_panel(n, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(5, 120, size=(n, 3)).round()
    Y = rng.uniform(1, 150, size=(n, 3))
    return DmuPanel(1, tuple(f"U{i}" for i in range(n)), X, Y, 0.0)


def best_time(panel, backend, repeat):
    options = SolverOptions(backend=backend)
    evaluate_panel(make_panel(5), CostVector(), options)  # compile / warm caches
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        records = evaluate_panel(panel, CostVector(), options)
        times.append(time.perf_counter() - start)
    return min(times), records


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dmus", type=int, nargs="+", default=[20, 60, 120, 200])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = ["numpy"] + (["numba"] if NUMBA_AVAILABLE else [])
    print(f"{'dmus':>6} " + " ".join(f"{b:>12}" for b in backends) + "   speedup  max|dte|")
    for n in args.dmus:
        panel = make_panel(n, seed=n)
        results = {b: best_time(panel, b, args.repeat) for b in backends}
        line = f"{n:>6} " + " ".join(f"{results[b][0] * 1e3:>10.1f}ms" for b in backends)
        if len(backends) == 2:
            a, b = results["numpy"], results["numba"]
            diff = max(abs(x.te - y.te) for x, y in zip(a[1], b[1]))
            line += f"   {a[0] / b[0]:>6.2f}x  {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
