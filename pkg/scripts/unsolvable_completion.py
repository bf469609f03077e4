"""How often the completion (A_{1,2}, P_2, ?) of A has no solution.

The third coordinate would have to equal 3A - A_{1,2} - x_2, which leaves
[min x, max x] on a sizeable share of the cube.  Reports the share for
several seeds and sample sizes.

    python scripts/unsolvable_completion.py --count 1000 --seeds 42 43 44
"""

import argparse

from invmeans.complementary import solve_completion
from invmeans.errors import NoSolutionInRange
from invmeans.means import A, Domain, Projection, SampleConfig, SubsetArithmetic, sample_vectors

FIXED = {1: SubsetArithmetic((1, 2)), 2: Projection(2)}


def unsolvable_share(cfg):
    hits = 0
    for row in sample_vectors(cfg, 3):
        try:
            solve_completion(A, FIXED, (3,), tuple(row))
        except NoSolutionInRange:
            hits += 1
    return hits / cfg.count


def main():
    ap = argparse.ArgumentParser(description="unsolvable completion share")
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[42, 43, 44, 45, 46])
    ap.add_argument("--hi", type=float, default=10.0)
    args = ap.parse_args()
    print("seed,count,unsolvable_share")
    for seed in args.seeds:
        cfg = SampleConfig(count=args.count, seed=seed, domain=Domain(0.0, args.hi))
        print(f"{seed},{args.count},{unsolvable_share(cfg):.3f}")


if __name__ == "__main__":
    main()
