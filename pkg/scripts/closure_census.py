"""Size of the exact closure of (A, B_p, ..., B_p) under G by depth.

Prints CSV: p, depth, vectors, max denominator, denominator/membership checks hold, seconds.

    python scripts/closure_census.py --p 2 3 4 --depth 5
"""

import argparse
import time

from invmeans import hfamily as hf


def main():
    ap = argparse.ArgumentParser(description="closure census")
    ap.add_argument("--p", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--depth", type=int, default=5)
    ap.add_argument("--budget", type=int, default=200_000)
    args = ap.parse_args()
    print("p,depth,vectors,max_denominator,checks_ok,seconds")
    for p in args.p:
        for d in range(args.depth + 1):
            t0 = time.perf_counter()
            c = hf.closure_enumerate(p, d, budget=args.budget)
            dt = time.perf_counter() - t0
            den = max(a.denominator for v in c.vectors for a in v.alphas)
            ok = hf.verify_remark3(c).holds and hf.verify_membership(c).holds
            print(f"{p},{d},{len(c)},{den},{ok},{dt:.3f}")


if __name__ == "__main__":
    main()
