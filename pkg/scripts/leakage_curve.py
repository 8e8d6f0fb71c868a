"""Exact leakage against eavesdropper crossover for one sampled code pair, with both bounds.

    python3 scripts/leakage_curve.py --n 10 --seed 3
"""

import argparse

import numpy as np

from ldpc_wiretap.bounds import bms_leakage_bound
from ldpc_wiretap.channel import BmsChannel, capacity
from ldpc_wiretap.distribution import DistF2n, exact_leakage, smoothing_divergence
from ldpc_wiretap.ensemble import NestedSpec, sample_nested


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--rate-b", default="4/5")
    ap.add_argument("--rate-e", default="2/5")
    ap.add_argument("--s", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--points", type=int, default=11)
    args = ap.parse_args()

    H_B, H_E = sample_nested(NestedSpec(args.n, args.rate_b, args.rate_e, args.s), args.seed)
    print(f"{'channel':>12} {'capacity':>9} {'leakage':>9} {'smoothing':>9} {'2x bsc-eq':>9}")
    for p in np.linspace(0.0, 0.5, args.points):
        ch = BmsChannel.bsc(float(p))
        d = smoothing_divergence(H_E, DistF2n.bernoulli(args.n, float(p)), 1.0)
        print(f"{'BSC(%.2f)' % p:>12} {capacity(ch):9.4f} {exact_leakage(H_B, H_E, ch):9.4f} {d:9.4f} "
              f"{2 * d:9.4f}")
    if 3 ** args.n <= 3 ** 8:
        for e in np.linspace(0.1, 0.9, 5):
            ch = BmsChannel.bec(float(e))
            print(f"{'BEC(%.2f)' % e:>12} {capacity(ch):9.4f} {exact_leakage(H_B, H_E, ch):9.4f} {'':>9} "
                  f"{bms_leakage_bound(ch, H_E):9.4f}")


if __name__ == "__main__":
    main()
