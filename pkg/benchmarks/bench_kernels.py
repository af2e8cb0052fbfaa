"""Time the per-group kernels under numba and pure numpy.

    python3 benchmarks/bench_kernels.py [--size 720] [--repeat 2000]

Both kernel modules are imported directly, so one process measures both
backends; a second table times a whole desk solve under each backend by
re-running this script in a subprocess with ``OFFGRID_DOA_NUMBA`` set.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from offgrid_doa import _kernels_numba as knb
from offgrid_doa import _kernels_numpy as knp

CASES = {
    "group_norms": lambda k, x: k.group_norms(x),
    "project_feasible": lambda k, x: k.project_feasible(x, 0.25, np.inf),
    "proj_group_l2_ball": lambda k, x: k.proj_group_l2_ball(x),
    "group_soft_threshold": lambda k, x: k.group_soft_threshold(x, 0.3),
    "smoothed_l1": lambda k, x: k.smoothed_l1(x, 0.3, 1e-3),
    "smoothed_l2": lambda k, x: k.smoothed_l2(x, 0.3, 1e-3),
}

SOLVE = """
from offgrid_doa.array_model import ArrayGeometry, AngularGrid, build_dictionary
from offgrid_doa.signal_sim import Scenario, measure
from offgrid_doa.solvers import AspgConfig, CadmmConfig, solve_aspg, solve_cadmm
import time
geo = ArrayGeometry.ula(8); D = build_dictionary(geo, AngularGrid.default())
m = measure(Scenario.from_snr((13.2220, 28.6022), 0.0, 100, seed=1), geo)
solve_aspg(m, D, AspgConfig(max_iters=5)); solve_cadmm(m, D, CadmmConfig(max_iters=5))
t = time.perf_counter(); solve_aspg(m, D, AspgConfig('l1', eta=0.24, max_iters=1000, tol=0)); a = time.perf_counter() - t
t = time.perf_counter(); solve_cadmm(m, D, CadmmConfig(eta=0.24, max_iters=1000)); c = time.perf_counter() - t
print(f"{a:.3f} {c:.3f}")
"""


def kernel_table(size, repeat):
    x = np.random.default_rng(0).normal(size=size)
    print(f"{'kernel':22s} {'numba us':>10s} {'numpy us':>10s} {'speedup':>8s}")
    for name, fn in CASES.items():
        fn(knb, x)  # compile
        a = min(timeit.repeat(lambda: fn(knb, x), number=repeat, repeat=3)) / repeat * 1e6
        b = min(timeit.repeat(lambda: fn(knp, x), number=repeat, repeat=3)) / repeat * 1e6
        print(f"{name:22s} {a:10.2f} {b:10.2f} {b / a:8.2f}")


def solve_table():
    print(f"\n{'backend':8s} {'aspg-l1 1000 it (s)':>20s} {'cadmm 1000 it (s)':>18s}")
    for flag in ("1", "0"):
        env = dict(os.environ, OFFGRID_DOA_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", SOLVE], env=env, capture_output=True, text=True, check=True)
        a, c = out.stdout.split()
        print(f"{'numba' if flag == '1' else 'numpy':8s} {float(a):20.3f} {float(c):18.3f}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--size", type=int, default=720, help="grouped vector length (2N)")
    p.add_argument("--repeat", type=int, default=2000)
    p.add_argument("--no-solve", action="store_true", help="skip the whole-solve comparison")
    args = p.parse_args()
    kernel_table(args.size, args.repeat)
    if not args.no_solve:
        solve_table()


if __name__ == "__main__":
    main()
