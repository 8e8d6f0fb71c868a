"""Acceptance suite: one test per criterion, each printing a PASS/FAIL verdict line.

Run with ``pytest tests/test_acceptance.py -v``; the verdicts are repeated in
the "acceptance criteria" section of the terminal summary.
"""

import math
import subprocess
import sys
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest

from ldpc_wiretap.bounds import (
    bms_leakage_bound,
    lemma2_bound,
    log_lemma2_bound,
    prop1_lhs_samples,
    prop1_log_terms,
    select_params,
    theorem1_sweep,
)
from ldpc_wiretap.channel import BmsChannel
from ldpc_wiretap.distribution import DistF2n, exact_leakage, lemma1_check, smoothing_divergence
from ldpc_wiretap.ensemble import (
    GallagerSpec,
    NestedSpec,
    _layer,
    kernel_prob_fraction,
    sample,
    sample_nested,
    snap,
)
from ldpc_wiretap.gf2 import row_basis
from ldpc_wiretap.rng import child_seed
from ldpc_wiretap.wiretap import build, exact_error_probs, simulate

ROOT_SEED = 20240601


def binom_sigma(p, k):
    return math.sqrt(p * (1 - p) / k)


# ---------------------------------------------------------------------------


def test_c1_smoothing_identity(criterion):
    specs = {6: GallagerSpec(6, "1/3", 3), 8: GallagerSpec(8, "1/2", 4),
             10: GallagerSpec(10, "1/2", 2), 12: GallagerSpec(12, "1/2", 4)}
    ps = (0.05, 0.11, 0.25)
    with criterion("C1", "code-side and syndrome-side KL divergences agree", budget_s=30) as out:
        worst = 0.0
        for i in range(200):
            n = (6, 8, 10, 12)[i % 4]
            H = row_basis(sample(specs[n], child_seed(ROOT_SEED, 1, i)))
            _, _, diff = lemma1_check(H, DistF2n.bernoulli(n, ps[i % 3]), 1.0)
            worst = max(worst, diff)
        out.ok = worst <= 1e-9
        out.detail = f"200 instances, max |lhs - rhs| = {worst:.2e} bits (tol 1e-9)"


def test_c2_kernel_probability(criterion):
    with criterion("C2", "kernel probability: enumeration, Monte Carlo, bound dominance", budget_s=60) as out:
        # (a) full permutation enumeration at (4, 1/2, 2), one layer
        spec = GallagerSpec(4, "1/2", 2)
        brute = {}
        for w in range(1, 5):
            v = (1 << w) - 1
            hits = sum(all((r & v).bit_count() % 2 == 0 for r in _layer(np.array(p), 2, 2))
                       for p in permutations(range(4)))
            brute[w] = Fraction(hits, 24)
        enum_ok = all(kernel_prob_fraction(spec, w) == brute[w] for w in brute)
        enum_ok &= brute[2] == Fraction(1, 3) and brute[1] == brute[3] == 0

        # (b) Monte Carlo at n=12; (12, 1/2, 3) is infeasible and snaps to (12, 1/3, 3)
        mc_spec, _ = snap(12, "1/2", 3)
        N = 100_000
        hits = np.zeros(12, dtype=np.int64)
        vs = [(1 << w) - 1 for w in range(1, 12)]
        for k in range(N):
            rows = sample(mc_spec, child_seed(ROOT_SEED, 2, k)).rows
            for j, v in enumerate(vs):
                if all((r & v).bit_count() % 2 == 0 for r in rows):
                    hits[j] += 1
        worst_z = 0.0
        mc_ok = True
        for j, w in enumerate(range(1, 12)):
            q = float(kernel_prob_fraction(mc_spec, w))
            if q in (0.0, 1.0):
                mc_ok &= hits[j] == q * N
                continue
            z = abs(hits[j] / N - q) / binom_sigma(q, N)
            worst_z = max(worst_z, z)
        mc_ok &= worst_z <= 4.0

        # (c) bound dominance on every feasible (n, R, s) with n <= 64
        checked = violations = 0
        for n in range(2, 65):
            for s in (d for d in range(2, n + 1) if n % d == 0):
                for L in range(1, s):
                    g = GallagerSpec(n, Fraction(s - L, s), s)
                    for w in range(1, n):
                        q = kernel_prob_fraction(g, w)
                        checked += 1
                        if q and math.log(q) > log_lemma2_bound(n, g.rate, s, w) + 1e-12:
                            violations += 1
        out.ok = enum_ok and mc_ok and violations == 0
        out.detail = (f"enumeration {'exact' if enum_ok else 'MISMATCH'} (q_2 = {brute[2]}); "
                      f"MC at {mc_spec.n},{mc_spec.rate},{mc_spec.s} with {N} samples max |z| = {worst_z:.2f}; "
                      f"bound violations {violations}/{checked}")


def test_c3_ensemble_bound_dominance(criterion):
    alphas = (1.2, 1.5, 1.9)
    with criterion("C3", "sampled ensemble divergence lies below the two-term bound", budget_s=600) as out:
        worst = -math.inf
        cells = 0
        ok = True
        for n in (8, 12, 16):
            spec = GallagerSpec(n, "1/2", 4)
            for p in (0.05, 0.11):
                est = prop1_lhs_samples(spec, p, alphas, 1000, child_seed(ROOT_SEED, 3, n, int(p * 100)))
                upper = est.mean + 4 * est.stderr
                for i, a in enumerate(alphas):
                    for t in (0, 1, 2):
                        l1, l2 = prop1_log_terms(n, spec.rate, spec.s, p, a, t)
                        log_rhs = float(np.logaddexp(l1, l2))
                        margin = math.log(upper[i]) - log_rhs  # <= 0 required
                        worst = max(worst, margin)
                        ok &= margin <= 0
                        cells += 1
        out.ok = ok
        out.detail = (f"{cells} cells, 1000 codes each; max ln(mean + 4 sigma) - ln(bound) = {worst:.3f} "
                      f"(must be <= 0)")


def test_c4_smoothing_envelope(criterion):
    with criterion("C4", "parameter constraints and crossover of the a*log2(n)^2 envelope", budget_s=120) as out:
        sp = select_params(0.11, 0.1)
        checks = sp.check()
        results, crossover = theorem1_sweep([2**k for k in range(10, 21)], 0.11, 0.1)
        beyond = [r for r in results if crossover is not None and r.n >= crossover]
        envelope_ok = crossover is not None and crossover <= 2**20 and all(r.holds for r in beyond)
        out.ok = all(checks.values()) and envelope_ok
        worst = max(r.rhs_bits / r.target_bits for r in beyond) if beyond else float("nan")
        out.detail = (f"alpha={sp.alpha:.6f} tau={sp.tau:.4e} a={sp.a}; constraints {checks}; "
                      f"crossover n*={crossover}; max bound/envelope past n* = {worst:.4f}")


def test_c5_leakage_below_smoothing(criterion):
    specs = [NestedSpec(8, "3/4", "1/2", 4), NestedSpec(10, "4/5", "2/5", 5),
             NestedSpec(12, "3/4", "1/2", 4), NestedSpec(12, "2/3", "1/3", 3)]
    ps = np.linspace(0.02, 0.4, 20)
    with criterion("C5", "exact leakage <= smoothing divergence of C_E (BSC eavesdropper)", budget_s=300) as out:
        worst = math.inf
        for i in range(100):
            spec = specs[i % len(specs)]
            p = float(ps[i % len(ps)])
            H_B, H_E = sample_nested(spec, child_seed(ROOT_SEED, 5, i))
            leak = exact_leakage(H_B, H_E, BmsChannel.bsc(p))
            bound = smoothing_divergence(H_E, DistF2n.bernoulli(spec.n, p), 1.0)
            worst = min(worst, bound - leak)
        out.ok = worst >= -1e-9
        out.detail = f"100 nested pairs, min(bound - leakage) = {worst:.3e} bits (>= -1e-9)"


def test_c6_bec_reduction(criterion):
    specs = [NestedSpec(8, "3/4", "1/2", 4), NestedSpec(8, "3/4", "1/4", 4), NestedSpec(6, "2/3", "1/3", 3)]
    es = (0.2, 0.35, 0.5, 0.65, 0.8)
    with criterion("C6", "BEC leakage <= twice the capacity-matched BSC smoothing divergence", budget_s=300) as out:
        worst = math.inf
        for i in range(50):
            spec = specs[i % len(specs)]
            ch = BmsChannel.bec(es[i % len(es)])
            H_B, H_E = sample_nested(spec, child_seed(ROOT_SEED, 6, i))
            worst = min(worst, bms_leakage_bound(ch, H_E) - exact_leakage(H_B, H_E, ch))
        out.ok = worst >= -1e-9
        out.detail = f"50 nested pairs at n <= 8, min(bound - leakage) = {worst:.3e} bits"


def test_c7_coset_ml_dominance(criterion):
    cases = [
        (NestedSpec(8, "3/4", "1/2", 4), BmsChannel.bsc(0.05)),
        (NestedSpec(8, "3/4", "1/4", 4), BmsChannel.bsc(0.1)),
        (NestedSpec(10, "4/5", "2/5", 5), BmsChannel.bsc(0.08)),
        (NestedSpec(10, "3/5", "1/5", 5), BmsChannel.bsc(0.15)),
        (NestedSpec(6, "2/3", "1/3", 3), BmsChannel.bec(0.3)),
        (NestedSpec(8, "3/4", "1/2", 4), BmsChannel.bec(0.4)),
        (NestedSpec(8, "3/4", "1/4", 4),
         BmsChannel.table([("a", 0.7, 0.05), ("b", 0.05, 0.7), ("c", 0.25, 0.25)])),
    ]
    trials = 40_000
    with criterion("C7", "coset-ML error <= codeword-ML error, enumeration agrees with Monte Carlo",
                   budget_s=600) as out:
        dominance = True
        worst_z = 0.0
        for i, (spec, ch) in enumerate(cases * 2):
            code = build(*sample_nested(spec, child_seed(ROOT_SEED, 7, i)))
            exact = exact_error_probs(code, ch)
            dominance &= exact["coset"] <= exact["codeword"] + 1e-12
            dominance &= exact["coset_map"] <= exact["coset"] + 1e-12
            mc = simulate(code, ch, trials, child_seed(ROOT_SEED, 7, 1000 + i))
            for p, k in ((exact["coset"], mc.errors), (exact["codeword"], mc.codeword_errors)):
                sd = binom_sigma(p, trials)
                if sd == 0:
                    dominance &= k == round(p * trials)
                    continue
                worst_z = max(worst_z, abs(k / trials - p) / sd)
        out.ok = dominance and worst_z <= 4.0
        out.detail = (f"{2 * len(cases)} codes (BSC, BEC, table channel); dominance "
                      f"{'holds' if dominance else 'FAILS'}; max |z| enumeration vs MC = {worst_z:.2f}")


def test_c8_sequence_inequalities(criterion):
    g = np.random.default_rng(ROOT_SEED)
    with criterion("C8", "power-sum inequalities on random non-negative sequences", budget_s=60) as out:
        v1 = v2 = 0
        for k in range(10_000):
            length = int(g.integers(1, 65))
            a = g.exponential(size=length) * g.choice([1e-3, 1.0, 1e3])
            a[g.random(length) < 0.2] = 0.0
            # subadditivity of x -> x**s for s in (0, 1)
            s = float(g.choice(np.round(np.arange(0.1, 1.0, 0.1), 1)))
            lhs, rhs = a.sum() ** s, np.power(a, s).sum()
            v1 += lhs > rhs * (1 + 1e-12) + 1e-300
            # rearrangement: pairing a with a permutation of a**s never beats a**(s+1)
            s2 = float(g.choice([0.5, 1.0, 2.0]))
            b = np.power(a, s2)[g.permutation(length)]
            lhs, rhs = float(np.dot(a, b)), float(np.power(a, s2 + 1).sum())
            v2 += lhs > rhs * (1 + 1e-12) + 1e-300
        out.ok = v1 == 0 and v2 == 0
        out.detail = f"10^4 instances each: subadditivity violations {v1}, rearrangement violations {v2}"


def test_c9_markov_confidence(criterion):
    spec = GallagerSpec(10, "1/2", 2)
    samples = 1000
    with criterion("C9", "fraction of codes above 2*mean/delta stays below delta", budget_s=120) as out:
        noise = DistF2n.bernoulli(10, 0.11)
        D = np.array([smoothing_divergence(sample(spec, child_seed(ROOT_SEED, 9, k)), noise, 1.0)
                      for k in range(samples)])
        parts = []
        ok = True
        for delta in (0.25, 0.5):
            frac = float(np.mean(D > 2 * D.mean() / delta))
            slack = 4 * binom_sigma(delta, samples)
            ok &= frac <= delta + slack
            parts.append(f"delta={delta}: {frac:.3f} <= {delta + slack:.3f}")
        out.ok = ok
        out.detail = f"{samples} codes at n=10, mean D = {D.mean():.4f} bits; " + "; ".join(parts)


COMMANDS = [
    ["kernel-prob", "--set", "n=12", "--set", "row_weight=4"],
    ["smoothing", "--set", "log2_n_max=14", "--seed", "5"],
    ["smoothing", "--set", "mode=exact", "--set", "n=12", "--set", "samples=100", "--seed", "5"],
    ["leakage", "--set", "codes=4", "--seed", "5"],
    ["wiretap", "--set", "n=8", "--set", "codes=3", "--set", "trials=500", "--seed", "5"],
    ["wiretap", "--set", "n=16", "--set", "mode=bound", "--set", "codes=2", "--set", "trials=200", "--seed", "5"],
    ["params", "--set", "n=4096"],
    ["snap", "--set", "n=12", "--set", "rate=1/2", "--set", "row_weight=3"],
]


def test_c10_cli_reproducibility(criterion, tmp_path):
    with criterion("C10", "CLI output is byte-identical across runs", budget_s=300) as out:
        same = 0
        for i, argv in enumerate(COMMANDS):
            blobs = []
            for run in range(2):
                csv_path, json_path = tmp_path / f"{i}-{run}.csv", tmp_path / f"{i}-{run}.json"
                proc = subprocess.run([sys.executable, "-m", "ldpc_wiretap.cli", *argv,
                                       "--out", str(csv_path), "--report", str(json_path)],
                                      capture_output=True, text=True)
                assert proc.returncode == 0, proc.stderr
                blobs.append((csv_path.read_bytes(), json_path.read_bytes()))
            same += blobs[0] == blobs[1]
        out.ok = same == len(COMMANDS)
        out.detail = f"{same}/{len(COMMANDS)} commands identical over two separate processes"
