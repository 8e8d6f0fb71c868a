"""Gallager's regular LDPC ensemble and the nested code pair built from it.

A matrix from ``G(n, R, s)`` stacks ``(1 - R) s`` layers.  Each layer is the
block-diagonal base matrix ``F`` (``n/s`` rows, row ``i`` covering columns
``[i s, (i+1) s)``) with its columns permuted by an independent uniform
permutation.  Layer ``i`` of ``sample(spec, seed)`` draws its permutation from
``rng.stream(seed, i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, logsumexp

from . import rng
from .gf2 import Gf2Matrix, kernel_basis, rank

EXACT_KERNEL_MAX_N = 2048
AUTO_EXACT_MAX_N = 512


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    f = Fraction(x).limit_denominator(1 << 20)
    if abs(float(f) - x) > 1e-12:
        raise ValueError(f"rate {x!r} is not a recognisable rational")
    return f


@dataclass(frozen=True)
class GallagerSpec:
    n: int
    rate: Fraction
    s: int

    def __post_init__(self):
        object.__setattr__(self, "rate", as_fraction(self.rate))
        n, R, s = self.n, self.rate, self.s
        if n <= 0 or s <= 0:
            raise ValueError(f"n and s must be positive, got n={n}, s={s}")
        if not 0 < R < 1:
            raise ValueError(f"rate must lie in (0, 1), got {R}")
        if n % s:
            raise ValueError(f"row weight s={s} does not divide n={n}")
        if ((1 - R) * s).denominator != 1:
            raise ValueError(f"(1-R)*s = {(1 - R) * s} is not an integer (n={n}, R={R}, s={s})")
        if ((1 - R) * n).denominator != 1:
            raise ValueError(f"(1-R)*n = {(1 - R) * n} is not an integer")

    @property
    def layers(self) -> int:
        return int((1 - self.rate) * self.s)

    @property
    def rows(self) -> int:
        return int((1 - self.rate) * self.n)

    @property
    def blocks(self) -> int:
        return self.n // self.s

    def to_dict(self) -> dict:
        return {"n": self.n, "rate": str(self.rate), "row_weight": self.s}


@dataclass(frozen=True)
class NestedSpec:
    n: int
    rate_b: Fraction
    rate_e: Fraction
    s: int

    def __post_init__(self):
        object.__setattr__(self, "rate_b", as_fraction(self.rate_b))
        object.__setattr__(self, "rate_e", as_fraction(self.rate_e))
        if not self.rate_e < self.rate_b:
            raise ValueError(f"need R_E < R_B, got R_E={self.rate_e}, R_B={self.rate_b}")
        self.outer
        self.difference

    @property
    def outer(self) -> GallagerSpec:
        return GallagerSpec(self.n, self.rate_b, self.s)

    @property
    def difference(self) -> GallagerSpec:
        """Ensemble of the extra rows ``H_{E\\B}``; its design rate is ``1 - R_B + R_E``."""
        return GallagerSpec(self.n, 1 - self.rate_b + self.rate_e, self.s)

    @property
    def inner(self) -> GallagerSpec:
        """Marginal design of ``H_E`` (same row count as a ``G(n, R_E, s)`` matrix)."""
        return GallagerSpec(self.n, self.rate_e, self.s)

    def to_dict(self) -> dict:
        return {"n": self.n, "rate_b": str(self.rate_b), "rate_e": str(self.rate_e), "row_weight": self.s}


def base_matrix(n: int, s: int) -> Gf2Matrix:
    if s <= 0 or n % s:
        raise ValueError(f"row weight s={s} does not divide n={n}")
    block = (1 << s) - 1
    return Gf2Matrix(n // s, n, tuple(block << (i * s) for i in range(n // s)))


def _layer(perm: np.ndarray, s: int, rows: int) -> tuple[int, ...]:
    # (F Pi)[r, j] = F[r, perm[j]]
    owner = perm // s
    out = [0] * rows
    for j, r in enumerate(owner.tolist()):
        out[r] |= 1 << j
    return tuple(out)


def sample(spec: GallagerSpec, seed: int) -> Gf2Matrix:
    rows: tuple[int, ...] = ()
    for i in range(spec.layers):
        perm = rng.stream(seed, i).permutation(spec.n)
        rows += _layer(perm, spec.s, spec.blocks)
    return Gf2Matrix(spec.rows, spec.n, rows)


def sample_nested(spec: NestedSpec, seed: int) -> tuple[Gf2Matrix, Gf2Matrix]:
    """Return ``(H_B, H_E)`` with ``H_E`` = ``H_B`` stacked over an independent ``H_{E\\B}``."""
    H_B = sample(spec.outer, rng.child_seed(seed, 0))
    H_EB = sample(spec.difference, rng.child_seed(seed, 1))
    return H_B, H_B.vstack(H_EB)


def actual_rate(H: Gf2Matrix) -> float:
    return (H.n - rank(H)) / H.n


def code_dimension(H: Gf2Matrix) -> int:
    return len(kernel_basis(H))


# ---------------------------------------------------------------------------
# Kernel probability of a fixed weight-w vector
# ---------------------------------------------------------------------------
#
# Pr(Hv = 0) = q_w ** layers, where q_w is the fraction of weight-w words whose
# weight in every length-s block is even.  q_w = N_even(w) / C(n, w) with
# N_even(w) = [x^w] g(x)^(n/s),  g(x) = sum_{e even} C(s, e) x^e.


@lru_cache(maxsize=64)
def even_block_counts(n: int, s: int) -> tuple[int, ...]:
    """``N_even(w)`` for ``w = 0..n`` as exact integers."""
    if s <= 0 or n % s:
        raise ValueError(f"row weight s={s} does not divide n={n}")
    b = n // s
    # g(x) = h(x^2); pack h's coefficients into one integer (Kronecker substitution)
    nbytes = (n + 8) // 8 + 1
    shift = 8 * nbytes
    h = 0
    for e in range(s // 2, -1, -1):
        h = (h << shift) | math.comb(s, 2 * e)
    raw = pow(h, b).to_bytes((b * (s // 2) + 1) * nbytes, "little")
    out = [0] * (n + 1)
    for k in range(b * (s // 2) + 1):
        out[2 * k] = int.from_bytes(raw[k * nbytes:(k + 1) * nbytes], "little")
    return tuple(out)


def _log_comb(n: int, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _support_max(n: int, s: int) -> int:
    return (n // s) * (s - (s % 2))


def _log_q_exact(n: int, s: int) -> np.ndarray:
    counts = even_block_counts(n, s)
    out = np.full(n + 1, -np.inf)
    for w, c in enumerate(counts):
        if c:
            out[w] = math.log(c) - math.log(math.comb(n, w))
    return out


def _log_q_tilted(n: int, s: int) -> np.ndarray:
    """Exponentially tilted evaluation of ``log q_w``.

    Under i.i.d. Bernoulli(theta) bits, Pr(all blocks even, |y| = w) equals
    E**b * f(w), with E the per-block even probability and f the b-fold
    convolution of the even-conditioned block-weight law.  Dividing by the
    binomial pmf at w gives q_w.  Each tilt is accurate near its own mean, so
    the weights are covered by a sequence of tilts.
    """
    b = n // s
    wmax = _support_max(n, s)
    out = np.full(n + 1, -np.inf)
    out[0] = 0.0
    if s % 2 == 0:
        out[n] = 0.0
    # complementing a word keeps every block even when s is even
    top = min(wmax, n // 2) if s % 2 == 0 else wmax
    todo = np.arange(2, top + 1, 2)
    c = np.arange(0, s + 1, 2)
    log_cs = _log_comb(s, c)
    log_cn = _log_comb(n, todo)

    def tilt(theta):
        lp = log_cs + c * math.log(theta) + (s - c) * math.log1p(-theta)
        lnE = logsumexp(lp)
        pie = np.exp(lp - lnE)
        mu1 = float(np.dot(c, pie))
        var1 = float(np.dot((c - mu1) ** 2, pie))
        mu, sigma = b * mu1, math.sqrt(b * var1)
        size = max(4096, 1 << int(math.ceil(math.log2(64 * sigma + 64))))
        f = np.fft.irfft(np.fft.rfft(np.bincount(c % size, weights=pie, minlength=size)) ** b, size)
        return lnE, f, mu, size

    def theta_for(target):
        # even-conditioned block mean: s*th*(1 - (1-2th)^(s-1)) / (1 + (1-2th)^s)
        def excess(th):
            r = 1.0 - 2.0 * th
            return b * s * th * (1.0 - r ** (s - 1)) / (1.0 + r ** s) - target
        lo, hi = 1e-300, 1.0 - 1e-15
        if excess(lo) >= 0:
            return lo
        if excess(hi) <= 0:
            return hi
        return brentq(excess, lo, hi, xtol=1e-17, rtol=1e-15)

    pos = 0
    while pos < todo.size:
        w0 = int(todo[pos])
        sd0 = math.sqrt(w0 * (1 - w0 / n)) + 1.0
        accepted = 0
        for target in (min(w0 + 3.0 * sd0, wmax), float(w0)):
            theta = theta_for(target)
            lnE, f, mu, size = tilt(theta)
            window = todo[pos:pos + size // 2]
            vals = f[window % size]
            ok = (np.abs(window - mu) <= size / 4) & (vals >= 1e-3 * f.max())
            accepted = int(np.argmin(ok)) if not ok.all() else ok.size
            if accepted:
                w = window[:accepted]
                log_binom_pmf = log_cn[pos:pos + accepted] + w * math.log(theta) + (n - w) * math.log1p(-theta)
                out[w] = b * lnE + np.log(vals[:accepted]) - log_binom_pmf
                break
        if not accepted:
            raise RuntimeError(f"tilted evaluation failed at n={n}, s={s}, w={w0}")
        pos += accepted
    if s % 2 == 0:
        out[n - todo] = out[todo]
    return out


@lru_cache(maxsize=64)
def _log_q_cached(n: int, s: int, method: str) -> np.ndarray:
    if method == "exact":
        return _log_q_exact(n, s)
    return _log_q_tilted(n, s)


def log_q_table(n: int, s: int, method: str = "auto") -> np.ndarray:
    """Natural log of the per-layer kernel probability ``q_w`` for ``w = 0..n``; ``-inf`` where zero."""
    if s <= 0 or n % s:
        raise ValueError(f"row weight s={s} does not divide n={n}")
    if method == "auto":
        method = "exact" if n <= AUTO_EXACT_MAX_N else "tilted"
    if method not in ("exact", "tilted"):
        raise ValueError(f"unknown method {method!r}")
    table = _log_q_cached(n, s, method)
    table.flags.writeable = False
    return table


def log_kernel_prob_table(spec: GallagerSpec, method: str = "auto") -> np.ndarray:
    """Natural log of ``Pr(Hv = 0)`` for a fixed weight-``w`` vector, ``w = 0..n``."""
    lq = log_q_table(spec.n, spec.s, method)
    with np.errstate(invalid="ignore"):
        return np.where(np.isneginf(lq), -np.inf, spec.layers * lq)


def _check_weight(spec: GallagerSpec, w: int) -> None:
    if w == 0:
        raise ValueError("weight 0 is excluded: the zero vector lies in every kernel")
    if not 1 <= w <= spec.n:
        raise ValueError(f"weight {w} out of range 1..{spec.n}")


def exact_kernel_prob(spec: GallagerSpec, w: int) -> float:
    """``Pr(Hv = 0)`` for a fixed ``v`` of weight ``w >= 1``; correctly rounded up to ``n = 512``."""
    _check_weight(spec, w)
    if spec.n <= AUTO_EXACT_MAX_N:
        return float(kernel_prob_fraction(spec, w))
    return math.exp(log_kernel_prob_table(spec)[w])


def kernel_prob_fraction(spec: GallagerSpec, w: int) -> Fraction:
    _check_weight(spec, w)
    if spec.n > EXACT_KERNEL_MAX_N:
        raise ValueError(f"rational kernel probability limited to n <= {EXACT_KERNEL_MAX_N}")
    q = Fraction(even_block_counts(spec.n, spec.s)[w], math.comb(spec.n, w))
    return q ** spec.layers


def snap(n: int, rate, s: int) -> tuple[GallagerSpec, dict]:
    """Nearest feasible ``(n, R, s)``: ``s`` moves to the nearest divisor of ``n``
    (ties go up), then the layer count ``(1-R)s`` rounds half up and is kept in
    ``[1, s-1]``; ``n`` is kept."""
    rate = as_fraction(rate)
    divisors = [d for d in range(1, n + 1) if n % d == 0 and d >= 2] or [1]
    s_new = min(divisors, key=lambda d: (abs(d - s), -d))
    layers = math.floor((1 - rate) * s_new + Fraction(1, 2))
    layers = min(max(layers, 1), s_new - 1) if s_new > 1 else 0
    if layers < 1:
        raise ValueError(f"no feasible ensemble for n={n}")
    spec = GallagerSpec(n, 1 - Fraction(layers, s_new), s_new)
    report = {
        "requested": {"n": n, "rate": str(rate), "row_weight": s},
        "snapped": spec.to_dict(),
        "changed": spec.rate != rate or s_new != s,
    }
    return spec, report
