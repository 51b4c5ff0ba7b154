"""Graph census by class and the articulation-free split identity."""

from __future__ import annotations

import argparse

from clusterkit.graphs import census, census_csv
from clusterkit.oz import census_identity


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-vertices", type=int, default=6)
    ap.add_argument("--k-max", type=int, default=3)
    args = ap.parse_args()
    print(census_csv(census(args.max_vertices)), end="")
    print("\nk, |AF_2,2+k|, split (binomial only), split (with nodal label)")
    for k in range(args.k_max + 1):
        lhs, plain = census_identity(k)
        _, labelled = census_identity(k, with_labels=True)
        print(f"{k}, {lhs}, {plain}, {labelled}")


if __name__ == "__main__":
    main()
