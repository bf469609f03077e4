"""High-precision oracle for the Gauss AGM, independent of the package.

    python scripts/agm_oracle.py --a 1 --b 2 --digits 60
"""

import argparse

import mpmath


def agm(a, b, digits):
    mpmath.mp.dps = digits + 10
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    eps = mpmath.mpf(10) ** (-(digits + 5))
    steps = 0
    while abs(a - b) > eps:
        a, b = (a + b) / 2, mpmath.sqrt(a * b)
        steps += 1
    return a, steps


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", default="1")
    ap.add_argument("--b", default="2")
    ap.add_argument("--digits", type=int, default=60)
    args = ap.parse_args()
    value, steps = agm(args.a, args.b, args.digits)
    ref = mpmath.agm(mpmath.mpf(args.a), mpmath.mpf(args.b))
    print(mpmath.nstr(value, args.digits))
    print(f"steps={steps} gap_to_mpmath.agm={mpmath.nstr(abs(value - ref), 3)}")


if __name__ == "__main__":
    main()
