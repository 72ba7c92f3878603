"""Time-refinement study of the linear fractional benchmark against the Mittag-Leffler solution.

Prints, per alpha and step count, the L-inf(Q) error, the step where it peaks,
the error at t = T and the observed ratios; optionally writes a CSV.
"""

import argparse
import csv

import numpy as np

from pcdiff.kernels import TimeGrid
from pcdiff.solver import SolverConfig, solve
from pcdiff.spatial import Mesh1D
from pcdiff.verify import exact_linear_solution, linear_benchmark_problem


def study(alpha, steps, Nx, T):
    mesh = Mesh1D(1.0, Nx)
    rows = []
    for N in steps:
        grid = TimeGrid(T, N)
        sol = solve(linear_benchmark_problem(alpha, mesh, grid), SolverConfig(picard_tol=1e-14))
        err = np.abs(sol.interior - exact_linear_solution(alpha, mesh, grid)).max(axis=1)
        rows.append((alpha, N, float(err.max()), int(err.argmax()), float(err[-1])))
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--alphas", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    p.add_argument("--steps", type=int, nargs="+", default=[128, 256, 512, 1024, 2048])
    p.add_argument("--Nx", type=int, default=256)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--csv", help="write the table here")
    args = p.parse_args()
    table = []
    for a in args.alphas:
        rows = study(a, args.steps, args.Nx, args.T)
        prev = None
        for r in rows:
            ratio = prev[2] / r[2] if prev else float("nan")
            ratio_T = prev[4] / r[4] if prev else float("nan")
            print(f"alpha={r[0]:.2f} N={r[1]:5d} linf={r[2]:.4e} (step {r[3]}) "
                  f"ratio={ratio:.3f}  err(T)={r[4]:.4e} ratio(T)={ratio_T:.3f}")
            table.append(r)
            prev = r
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["alpha", "N", "linf_error", "argmax_step", "final_error"])
            w.writerows(table)


if __name__ == "__main__":
    main()
