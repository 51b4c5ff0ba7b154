"""Order-by-order OZ residuals for hard spheres at fixed anchor separations."""

from __future__ import annotations

import argparse
import json

from clusterkit.cli import OZ_RADII
from clusterkit.integrals import McConfig
from clusterkit.oz import OzGrid, oz_order_check
from clusterkit.potentials import PairPotential


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--samples", type=float, default=1e6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--dr", type=float, default=0.01)
    ap.add_argument("--out", help="JSON file for the reports")
    args = ap.parse_args()
    cfg = McConfig(seed=args.seed, n_samples=int(args.samples))
    reports = []
    for k in args.k:
        rep = oz_order_check(k, OZ_RADII, PairPotential.hard_sphere(), cfg, grid=OzGrid(dr=args.dr), method="mc")
        reports.append(rep.to_dict())
        print(f"k={k} pass={rep.passes}")
        for c in rep.to_dict()["checks"]:
            print(f"  r={c['r']:.2f} residual={c['residual']:+.3e} error={c['error']:.3e}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(reports, fh, indent=1)


if __name__ == "__main__":
    main()
