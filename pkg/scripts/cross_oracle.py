"""Bisection complements against exponent averaging, for the Beta-type roots.

For each p and each nonempty S, solves K_S(M) numerically at sampled points
and compares with H_{p,beta}, beta the mean exponent over S.  Prints CSV.

    python scripts/cross_oracle.py --p 2 3 4 5 --count 100
"""

import argparse
import time
from fractions import Fraction

from invmeans import hfamily as hf
from invmeans.complementary import ComplementSpec, all_subsets, complement_solve
from invmeans.means import G, SampleConfig, sample_vectors


def main():
    ap = argparse.ArgumentParser(description="complement cross-oracle")
    ap.add_argument("--p", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    print("p,S,beta,max_rel_gap,mean_iterations,seconds")
    for p in args.p:
        root = hf.beta_root(p)
        M = root.mapping()
        points = [tuple(r) for r in sample_vectors(SampleConfig(count=args.count, seed=args.seed), p)]
        for S in all_subsets(p):
            beta = sum((root.alphas[i - 1] for i in S), Fraction(0)) / len(S)
            spec = ComplementSpec(G, M, S)
            t0 = time.perf_counter()
            gap, iters = 0.0, 0
            for x in points:
                res = complement_solve(spec, x)
                ref = hf.hfam_eval(p, beta, x)
                gap = max(gap, abs(res.value - ref) / ref)
                iters += res.iterations
            dt = time.perf_counter() - t0
            label = "+".join(map(str, S))
            print(f"{p},{label},{beta},{gap:.2e},{iters / len(points):.1f},{dt:.3f}")


if __name__ == "__main__":
    main()
