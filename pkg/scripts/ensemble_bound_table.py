"""Sampled ensemble divergence next to the two-term bound for small n.

For each (n, p, alpha, t) prints the Monte Carlo mean of D_alpha(P_{HV|H} || U),
its 4-sigma upper end, and the bound, all in bits.

    python3 scripts/ensemble_bound_table.py --ns 8 12 16 --samples 1000
"""

import argparse
import math

import numpy as np

from ldpc_wiretap.bounds import prop1_lhs_samples, prop1_rhs
from ldpc_wiretap.ensemble import GallagerSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", type=int, nargs="+", default=[8, 12, 16])
    ap.add_argument("--rate", default="1/2")
    ap.add_argument("--s", type=int, default=4)
    ap.add_argument("--ps", type=float, nargs="+", default=[0.05, 0.11])
    ap.add_argument("--alphas", type=float, nargs="+", default=[1.2, 1.5, 1.9])
    ap.add_argument("--ts", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'n':>3} {'p':>5} {'alpha':>5} {'t':>2} {'lhs':>9} {'lhs+4sd':>9} {'bound':>9}")
    for n in args.ns:
        spec = GallagerSpec(n, args.rate, args.s)
        for p in args.ps:
            est = prop1_lhs_samples(spec, p, args.alphas, args.samples, args.seed)
            upper = est.mean + 4 * est.stderr
            for i, a in enumerate(args.alphas):
                up_bits = math.log2(upper[i]) / (a - 1)
                for t in args.ts:
                    rhs = prop1_rhs(n, spec.rate, spec.s, p, a, t)
                    print(f"{n:>3} {p:>5} {a:>5} {t:>2} {float(est.bits()[i]):9.4f} {up_bits:9.4f} {rhs:9.4f}"
                          + ("" if up_bits <= rhs else "  VIOLATION"))


if __name__ == "__main__":
    main()
