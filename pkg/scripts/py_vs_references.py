"""Percus-Yevick solutions against Wertheim's hard-sphere c(r) and the exact Tonks g(r)."""

from __future__ import annotations

import argparse

import numpy as np

from clusterkit.closures import Grid, py_solve
from clusterkit.potentials import PairPotential
from clusterkit.reference import density_from_packing, tonks_g, wertheim_c


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eta", type=float, nargs="+", default=[0.05, 0.1, 0.2, 0.3])
    ap.add_argument("--rod-density", type=float, nargs="+", default=[0.2, 0.5, 0.7])
    ap.add_argument("--dr", type=float, nargs="+", default=[0.01, 0.005])
    args = ap.parse_args()
    print("system, parameter, dr, iterations, residual, sup error")
    for dr in args.dr:
        for eta in args.eta:
            f, d = py_solve(PairPotential.hard_sphere(), density_from_packing(eta), Grid(dr=dr, n_points=int(20 / dr)))
            r = f.c.r
            off = np.abs(r - 1) > 1e-9
            err = np.max(np.abs(f.c.values[off] - wertheim_c(r[off], eta)))
            print(f"hard sphere, eta={eta}, {dr}, {d.iterations}, {d.residual:.1e}, {err:.2e}")
        for rho in args.rod_density:
            f, d = py_solve(PairPotential.hard_rod(), rho, Grid(dr=dr, n_points=int(30 / dr), d=1))
            r = f.g.r
            off = np.abs(r - 1) > 1e-9
            err = np.max(np.abs(f.g.values[off] - tonks_g(r[off], rho)))
            print(f"hard rod, rho={rho}, {dr}, {d.iterations}, {d.residual:.1e}, {err:.2e}")


if __name__ == "__main__":
    main()
