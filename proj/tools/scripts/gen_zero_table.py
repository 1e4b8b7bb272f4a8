#!/usr/bin/env python3
"""Write the imaginary parts of the first N nontrivial zeta zeros, one per line."""
import argparse

import mpmath


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("-n", type=int, default=100)
    ap.add_argument("-o", "--output", default="data/zeta_zeros_100.txt")
    args = ap.parse_args()
    mpmath.mp.dps = 30
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write("# Imaginary parts of the first %d nontrivial zeros of zeta\n" % args.n)
        fh.write("# rho_n = 1/2 + i*gamma_n; generated with mpmath.zetazero at 30 digits\n")
        for n in range(1, args.n + 1):
            fh.write(mpmath.nstr(mpmath.zetazero(n).imag, 20, strip_zeros=False) + "\n")


if __name__ == "__main__":
    main()
