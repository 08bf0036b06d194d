"""Sweep von Neumann margins for doubly commuting scalar-twist tuples.

Prints the worst margin per truncation size, and, for the tuples whose
margin at the largest size is negative, how the one-generator part of the
polynomial behaves on larger boxes.

    python3 scripts/vn_sweep.py --tuples 40 --polys 10 --sizes 1,2,3,4
"""

import argparse

import numpy as np

from regdil.fock import vn_margin
from regdil.generators import generate, random_polynomial


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--tuples", type=int, default=40)
    ap.add_argument("--polys", type=int, default=10)
    ap.add_argument("--sizes", default="1,2,3,4")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)
    worst = np.full(len(sizes), np.inf)
    negatives = []
    for trial in range(args.tuples):
        k = int(rng.integers(2, 4))
        seed = int(rng.integers(2**31))
        if trial % 2 == 0:
            rep = generate("scaled_twisted_unitaries", seed, {"k": k, "q": int(rng.integers(2, 5))})
        else:
            rep = generate("scalar_tuple", seed, {"k": k})
        for _ in range(args.polys):
            p = random_polynomial(rep.system.dims, rng)
            r = vn_margin(rep, p, sizes=sizes)
            worst = np.minimum(worst, np.array(r.norm_S_by_N) - r.norm_T)
            if r.margin < -1e-8:
                scales = [abs(b[0][0, 0]) if rep.hdim == 1 else abs(np.linalg.eigvals(b[0])[0]) for b in rep.blocks]
                negatives.append((trial, scales, r.norm_T, r.norm_S_by_N))
    for N, w in zip(sizes, worst):
        print(f"N={N}: worst margin {w:+.4f}")
    print(f"{len(negatives)} negative margins at N={sizes[-1]}")
    for trial, scales, nt, ns in negatives:
        print(f"  trial {trial}: |c| = {np.round(scales, 3).tolist()}, norm_T {nt:.4f}, norm_S {np.round(ns, 4).tolist()}")


if __name__ == "__main__":
    main()
