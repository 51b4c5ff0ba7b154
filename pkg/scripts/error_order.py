"""Closure error against the truncated density series, and per-order decay."""

from __future__ import annotations

import argparse
import json

from clusterkit.closures import py_error_order
from clusterkit.expansion import tail_decay
from clusterkit.integrals import McConfig
from clusterkit.potentials import PairPotential


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rho", type=float, nargs="+", default=[0.01, 0.02, 0.03, 0.04, 0.05])
    ap.add_argument("--samples", type=float, default=1e6)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--rho-c", type=float, default=0.05)
    args = ap.parse_args()
    cfg = McConfig(seed=args.seed, n_samples=int(args.samples))
    hs = PairPotential.hard_sphere()
    rep = py_error_order(hs, args.rho, K=2, cfg=cfg)
    print(json.dumps(rep.to_dict(), indent=1, default=float))
    for p in (hs, PairPotential.hard_rod()):
        print(p.kind.value, json.dumps(tail_decay(p, args.rho_c, cfg=cfg).to_dict()))


if __name__ == "__main__":
    main()
