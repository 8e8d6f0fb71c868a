"""Analytical smoothing and leakage bounds for the Gallager ensemble.

Everything that can span hundreds of orders of magnitude is carried as a
natural logarithm and converted to bits only on return.  Sums over vectors
collapse onto sums over Hamming weights because both the Bernoulli noise and
the ensemble kernel probability depend on a vector only through its weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, logsumexp

from .channel import BmsChannel, bsc_equivalent, h2, h2_inverse, h_alpha
from .distribution import DistF2n, smoothing_divergence, syndrome_dist
from .ensemble import GallagerSpec, as_fraction, log_kernel_prob_table, sample
from .gf2 import Gf2Matrix, syndrome_table

LN2 = math.log(2.0)
EXHAUSTIVE_MAX_N = 12


def _log_binom(n: int, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return gammaln(n + 1) - gammaln(w + 1) - gammaln(n - w + 1)


def log_lemma2_bound(n: int, R, s: int, w: int) -> float:
    """Natural log of the kernel-probability bound for a fixed weight-``w`` vector."""
    if not 1 <= w <= n:
        raise ValueError(f"weight {w} out of range 1..{n}")
    if s <= 0 or n <= 0:
        raise ValueError("n and s must be positive")
    R = float(R)
    if not 0 < R < 1:
        raise ValueError(f"rate must lie in (0, 1), got {R}")
    base = (1.0 + (1.0 - 2.0 * w / n) ** s) / 2.0
    if base == 0.0:
        return -math.inf
    return (1 - R) * s * 0.5 * math.log(2 * n) + n * (1 - R) * math.log(base)


def lemma2_bound(n: int, R, s: int, w: int) -> float:
    return math.exp(log_lemma2_bound(n, R, s, w))


# ---------------------------------------------------------------------------
# parameter choice for the smoothing theorem


@dataclass(frozen=True)
class SmoothingParams:
    p: float
    eps: float
    alpha: float
    tau: float
    a: float
    t: int | None = None

    def with_n(self, n: int) -> SmoothingParams:
        return SmoothingParams(self.p, self.eps, self.alpha, self.tau, self.a, math.floor(self.tau * n))

    def check(self) -> dict[str, bool]:
        """The three constraints the parameters must satisfy."""
        return {
            "alpha_equation": abs(h_alpha(self.p, self.alpha) - (h2(self.p) - self.eps / 2)) <= 1e-10,
            "tau_strict": h2(self.tau) < (self.eps / 2) * (self.alpha - 1),
            "a_density": self.a * math.log2(1 / (1 - 2 * self.tau)) >= 1,
        }


def select_params(p: float, eps: float, n: int | None = None) -> SmoothingParams:
    """Order ``alpha`` with ``h_alpha(p) = h(p) - eps/2``, threshold ``tau`` and density ``a``.

    ``tau`` solves ``h(tau) = (eps/4)(alpha - 1)``, half of the strict upper
    limit.  ``a`` is ``1 / log2(1/(1 - 2 tau))`` rounded up to three decimals.
    """
    if not 0.0 < p < 0.5:
        raise ValueError(f"p must lie strictly between 0 and 1/2, got {p}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    target = h2(p) - eps / 2
    if not h_alpha(p, 2.0) < target:
        raise ValueError(f"eps={eps} too large for p={p}: h_2(p)={h_alpha(p, 2.0):.6f} "
                         f">= h(p) - eps/2 = {target:.6f}, no alpha in (1, 2)")
    alpha = brentq(lambda a: h_alpha(p, a) - target, 1.0 + 1e-12, 2.0, xtol=1e-15, rtol=1e-15, maxiter=500)
    tau = h2_inverse((eps / 4) * (alpha - 1))
    a = math.ceil(1000.0 / math.log2(1 / (1 - 2 * tau))) / 1000.0
    params = SmoothingParams(p, eps, alpha, tau, a)
    return params.with_n(n) if n is not None else params


# ---------------------------------------------------------------------------
# two-term bound on the ensemble-averaged Renyi divergence


def _log_kernel(n: int, R, s: int, kernel_prob, log_kernel_prob) -> np.ndarray:
    if log_kernel_prob is not None:
        lk = np.asarray(log_kernel_prob, dtype=float)
    elif kernel_prob is None:
        lk = log_kernel_prob_table(GallagerSpec(n, R, s))
    elif callable(kernel_prob):
        with np.errstate(divide="ignore"):
            lk = np.log(np.array([float(kernel_prob(w)) for w in range(n + 1)]))
    else:
        with np.errstate(divide="ignore"):
            lk = np.log(np.asarray(kernel_prob, dtype=float))
    if lk.shape != (n + 1,):
        raise ValueError(f"kernel probabilities must cover weights 0..{n}")
    return lk


def prop1_log_terms(n: int, R, s: int, p: float, alpha: float, t: int,
                    kernel_prob=None, log_kernel_prob=None) -> tuple[float, float]:
    """Natural logs of the two terms whose sum bounds ``2**((alpha-1) D_alpha)``."""
    if not 1.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (1, 2), got {alpha}")
    if not 0 <= t <= n:
        raise ValueError(f"radius t={t} out of range for n={n}")
    m = float((1 - as_fraction(R)) * n)
    log_nu = float(logsumexp(_log_binom(n, np.arange(t + 1))))
    log_t1 = LN2 + log_nu + (alpha - 1) * (m - n * h_alpha(p, alpha)) * LN2

    lk = _log_kernel(n, R, s, kernel_prob, log_kernel_prob)
    w = np.arange(t + 1, n - t)
    pp = 2 * p * (1 - p)
    if w.size == 0 or pp == 0.0:
        return log_t1, -math.inf
    terms = _log_binom(n, w) + lk[w] + w * math.log(pp) + (n - w) * math.log1p(-pp)
    terms = terms[np.isfinite(terms)]
    if terms.size == 0:
        return log_t1, -math.inf
    log_s = float(logsumexp(terms))
    return log_t1, (alpha - 1) * (m * LN2 + log_s)


def prop1_rhs(n: int, R, s: int, p: float, alpha: float, t: int,
              kernel_prob=None, log_kernel_prob=None) -> float:
    """Upper bound in bits on ``D_alpha(P_{HV,H} || U_m P_H)`` for ``H ~ G(n, R, s)`` and ``V ~ Bern(p)^n``.

    ``kernel_prob`` gives ``Pr(Hv = 0)`` per weight, as a callable or an array
    over ``0..n``; ``log_kernel_prob`` is the same in natural-log form.  When
    neither is given the exact ensemble values are used.
    """
    l1, l2 = prop1_log_terms(n, R, s, p, alpha, t, kernel_prob, log_kernel_prob)
    return float(np.logaddexp(l1, l2)) / ((alpha - 1) * LN2)


# ---------------------------------------------------------------------------
# the left-hand side, exactly, for small n


def _power_sum(P_u: np.ndarray, m: int, alpha: float) -> float:
    """``2**((alpha-1) D_alpha(P || U_m))`` = ``2**(m(alpha-1)) sum P**alpha``."""
    pos = P_u[P_u > 0]
    return math.exp(float(logsumexp(alpha * np.log(pos))) + m * (alpha - 1) * LN2)


def _syndrome_law(H: Gf2Matrix, noise: np.ndarray) -> np.ndarray:
    return np.bincount(syndrome_table(H), weights=noise, minlength=1 << H.m)


@dataclass
class LhsEstimate:
    """Per-sample values of ``2**((alpha-1) D_alpha(P_{HV|H} || U_m))``, one row per alpha."""

    alphas: tuple[float, ...]
    values: np.ndarray = field(repr=False)

    @property
    def mean(self) -> np.ndarray:
        return self.values.mean(axis=1)

    @property
    def stderr(self) -> np.ndarray:
        k = self.values.shape[1]
        return self.values.std(axis=1, ddof=1) / math.sqrt(k) if k > 1 else np.zeros(len(self.alphas))

    def bits(self) -> np.ndarray:
        a = np.asarray(self.alphas)
        return np.log2(self.mean) / (a - 1)


def prop1_lhs_samples(spec: GallagerSpec, p: float, alphas: Sequence[float], samples: int, seed: int) -> LhsEstimate:
    from .rng import child_seed

    noise = DistF2n.bernoulli(spec.n, p).full().masses
    vals = np.empty((len(alphas), samples))
    for k in range(samples):
        P_u = _syndrome_law(sample(spec, child_seed(seed, k)), noise)
        for i, a in enumerate(alphas):
            vals[i, k] = _power_sum(P_u, spec.rows, a)
    return LhsEstimate(tuple(alphas), vals)


def _block_partitions(items: tuple[int, ...], s: int):
    """Every split of ``items`` into unordered blocks of size ``s``, as tuples of bit masks."""
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for others in combinations(rest, s - 1):
        mask = 1 << first
        for j in others:
            mask |= 1 << j
        remaining = tuple(j for j in rest if j not in others)
        for tail in _block_partitions(remaining, s):
            yield (mask,) + tail


def prop1_lhs_exhaustive(spec: GallagerSpec, p: float, alphas: Sequence[float]) -> np.ndarray:
    """Exact ensemble average over every column permutation (single-layer ensembles only).

    A layer depends on its permutation only through the split of columns into
    blocks, and each split arises from the same number of permutations, so the
    average runs over splits.
    """
    if spec.layers != 1:
        raise ValueError("exhaustive enumeration supports one layer only")
    if spec.n > EXHAUSTIVE_MAX_N:
        raise ValueError(f"exhaustive enumeration limited to n <= {EXHAUSTIVE_MAX_N}")
    noise = DistF2n.bernoulli(spec.n, p).full().masses
    acc = np.zeros(len(alphas))
    count = 0
    for rows in _block_partitions(tuple(range(spec.n)), spec.s):
        P_u = _syndrome_law(Gf2Matrix(spec.rows, spec.n, rows), noise)
        for i, a in enumerate(alphas):
            acc[i] += _power_sum(P_u, spec.rows, a)
        count += 1
    return acc / count


# ---------------------------------------------------------------------------
# the smoothing theorem at concrete n


def _snap_up_divisor(n: int, target: int) -> int:
    for d in range(max(target, 2), n + 1):
        if n % d == 0:
            return d
    return n


@dataclass(frozen=True)
class Theorem1Result:
    n: int
    params: SmoothingParams
    s: int
    rate: Fraction
    layers: int
    log_first_term: float
    log_second_term: float
    rhs_bits: float
    target_bits: float

    @property
    def holds(self) -> bool:
        return self.rhs_bits <= self.target_bits

    @property
    def first_term(self) -> float:
        return math.exp(self.log_first_term)

    def row(self) -> dict:
        return {
            "n": self.n, "p": self.params.p, "eps": self.params.eps, "alpha": self.params.alpha,
            "tau": self.params.tau, "a": self.params.a, "s": self.s, "t": self.params.t,
            "rhs_bits": self.rhs_bits, "target_bits": self.target_bits,
        }


def theorem1_ensemble(n: int, p: float, eps: float, params: SmoothingParams | None = None) -> GallagerSpec:
    """Feasible ``G(n, R, s)`` for the theorem: ``s >= a log2 n`` (next divisor of n, at most n),
    and the layer count rounded down so that ``R >= C + eps``."""
    params = params or select_params(p, eps)
    gap = h2(p) - eps  # 1 - (C + eps)
    if gap <= 0:
        raise ValueError(f"C + eps = {1 - gap:.6f} >= 1: rate above one is undefined")
    s = _snap_up_divisor(n, math.ceil(params.a * math.log2(n)))
    layers = math.floor(gap * s + 1e-12)
    if layers < 1:
        raise ValueError(f"no feasible layer count at n={n}, s={s}")
    return GallagerSpec(n, Fraction(s - layers, s), s)


def theorem1_bound(n: int, p: float, eps: float, kernel_method: str = "auto") -> Theorem1Result:
    params = select_params(p, eps, n)
    spec = theorem1_ensemble(n, p, eps, params)
    lk = log_kernel_prob_table(spec, kernel_method)
    l1, l2 = prop1_log_terms(n, spec.rate, spec.s, p, params.alpha, params.t, log_kernel_prob=lk)
    rhs = float(np.logaddexp(l1, l2)) / ((params.alpha - 1) * LN2)
    return Theorem1Result(n, params, spec.s, spec.rate, spec.layers, l1, l2, rhs, params.a * math.log2(n) ** 2)


def theorem1_sweep(ns: Sequence[int], p: float, eps: float) -> tuple[list[Theorem1Result], int | None]:
    """Evaluate the pipeline over ``ns``; also return the smallest grid ``n`` from which the bound
    stays below ``a log2^2 n`` for every larger grid point (``None`` if the last point fails)."""
    results = [theorem1_bound(n, p, eps) for n in sorted(ns)]
    crossover = None
    for r in reversed(results):
        if not r.holds:
            break
        crossover = r.n
    return results, crossover


# ---------------------------------------------------------------------------
# general BMS eavesdropper and per-code confidence


def bms_leakage_bound(ch_E: BmsChannel, H_E: Gf2Matrix | None = None, *, n: int | None = None,
                      eps: float | None = None) -> float:
    """Twice the smoothing divergence at the capacity-matched BSC, in bits.

    With ``H_E`` the divergence is computed exactly for that code; otherwise
    the ensemble bound of the smoothing theorem at ``(n, p*, eps)`` is used.
    """
    p_star = bsc_equivalent(ch_E)
    if H_E is not None:
        return 2.0 * smoothing_divergence(H_E, DistF2n.bernoulli(H_E.n, p_star), 1.0)
    if n is None or eps is None:
        raise ValueError("ensemble mode needs n and eps")
    return 2.0 * theorem1_bound(n, p_star, eps).rhs_bits


def markov_confidence(expected_bound: float, delta: float) -> float:
    """Threshold exceeded by at most a ``delta/2`` fraction of codes when the mean is ``expected_bound``."""
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    return 2.0 * expected_bound / delta


def sweep_rows(results: Sequence[Theorem1Result], crossover: int | None) -> list[dict]:
    rows = []
    for r in results:
        row = r.row()
        row["crossover_flag"] = crossover is not None and r.n >= crossover
        rows.append(row)
    return rows


__all__ = [
    "SmoothingParams", "Theorem1Result", "LhsEstimate", "lemma2_bound", "log_lemma2_bound",
    "select_params", "prop1_rhs", "prop1_log_terms", "prop1_lhs_samples", "prop1_lhs_exhaustive",
    "theorem1_bound", "theorem1_sweep", "theorem1_ensemble", "bms_leakage_bound",
    "markov_confidence", "sweep_rows",
]
