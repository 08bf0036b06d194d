"""Compare condition (D) against double commutation on random commuting tuples.

For untwisted k = 3, h = 2 tuples (half drawn from the nilpotent family),
records how often condition (D) fails and the smallest Brehmer eigenvalue
seen, split by whether the tuple doubly commutes.

    python3 scripts/counterexample_search.py --trials 500
"""

import argparse
import json

import numpy as np

from regdil.cli import RunConfig, cmd_search
from regdil.dilation import check_regular_dilation
from regdil.generators import nilpotent_triple


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    code, report = cmd_search(RunConfig("search", trials=args.trials, seed=args.seed, kind="commuting"))
    print(json.dumps(report["counts"], indent=2))
    worst = min(
        (min(c["certificate"]["min_eigenvalues"].values()) for c in report["counterexamples"]), default=None
    )
    print("most negative defect among stored counterexamples:", worst)
    # the nilpotent family crosses over at c = 1/sqrt(3) for the triple defect
    for c in np.linspace(0.5, 0.7, 9):
        e = check_regular_dilation(nilpotent_triple(c)).min_eigs[(0, 1, 2)]
        print(f"c={c:.3f}  min eig D_123 = {e:+.4f}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
