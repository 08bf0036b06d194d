"""Build and verify a truncated dilation for one generated instance.

    python3 scripts/dilation_demo.py --kind scaled_twisted_unitaries --k 2 --box 2,2
"""

import argparse
import json

import numpy as np

from regdil.dilation import construct_dilation, dilation_doubly_commuting, verify_dilation
from regdil.generators import generate
from regdil.representation import is_doubly_commuting


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--kind", default="tensor_doubly_commuting")
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--box", default=None)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rep = generate(args.kind, args.seed, {"k": args.k})
    box = [int(x) for x in args.box.split(",")] if args.box else [2] * rep.k
    d = construct_dilation(rep, box, rng=np.random.default_rng(args.seed))
    out = {"h": rep.hdim, "dilation": d.to_dict(), "verification": verify_dilation(rep, d)}
    if is_doubly_commuting(rep).doubly_commuting:
        out["dc"] = dilation_doubly_commuting(d)
    print(json.dumps(out, indent=2, default=str))


if __name__ == "__main__":
    main()
