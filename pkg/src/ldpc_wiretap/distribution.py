"""Probability laws on F_2^n and the information measures used by the security analysis.

A :class:`DistF2n` is either a full table of ``2**n`` masses indexed by the
integer value of the word, or a weight profile of ``n + 1`` masses for laws
that depend on a word only through its Hamming weight.  All logarithms are
base 2 at the public boundary.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .channel import BmsChannel
from .gf2 import Gf2Matrix, kernel_basis, rank, span_array, syndrome_table, weights_table

FULL_MAX_N = 20
LEMMA1_MAX_N = 16
LEAKAGE_MAX_OUTPUTS = 3 ** 8
LN2 = math.log(2.0)


class SizeCapError(ValueError):
    """An exact computation was requested beyond its enumeration cap."""


def _log_binom(n: int, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return gammaln(n + 1) - gammaln(w + 1) - gammaln(n - w + 1)


@dataclass(frozen=True, eq=False)
class DistF2n:
    n: int
    mode: str
    masses: np.ndarray
    bernoulli_p: float | None = None

    def __post_init__(self):
        if self.mode not in ("full", "weight"):
            raise ValueError(f"unknown mode {self.mode!r}")
        m = np.asarray(self.masses, dtype=float)
        expected = (1 << self.n) if self.mode == "full" else self.n + 1
        if self.mode == "full" and self.n > FULL_MAX_N:
            raise SizeCapError(f"full table needs n <= {FULL_MAX_N}, got {self.n}")
        if m.shape != (expected,):
            raise ValueError(f"expected {expected} masses, got shape {m.shape}")
        if (m < 0).any():
            raise ValueError("negative probability mass")
        total = math.fsum(m)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"masses sum to {total!r}, not 1")
        m.flags.writeable = False
        object.__setattr__(self, "masses", m)

    # constructors -------------------------------------------------------

    @classmethod
    def full_table(cls, masses) -> DistF2n:
        masses = np.asarray(masses, dtype=float)
        n = int(masses.size).bit_length() - 1
        if masses.size != 1 << n:
            raise ValueError("table length must be a power of two")
        return cls(n, "full", masses)

    @classmethod
    def bernoulli(cls, n: int, p: float) -> DistF2n:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {p}")
        w = np.arange(n + 1)
        if p == 0.0 or p == 1.0:
            masses = np.zeros(n + 1)
            masses[0 if p == 0.0 else n] = 1.0
        else:
            masses = np.exp(_log_binom(n, w) + w * math.log(p) + (n - w) * math.log1p(-p))
            masses /= math.fsum(masses)
        return cls(n, "weight", masses, float(p))

    @classmethod
    def uniform(cls, n: int, mode: str = "weight") -> DistF2n:
        if mode == "full":
            return cls(n, "full", np.full(1 << n, 2.0 ** -n))
        d = cls.bernoulli(n, 0.5)
        return d

    @classmethod
    def point(cls, n: int, v: int) -> DistF2n:
        masses = np.zeros(1 << n)
        masses[int(v)] = 1.0
        return cls(n, "full", masses)

    # views --------------------------------------------------------------

    def full(self) -> DistF2n:
        if self.mode == "full":
            return self
        if self.n > FULL_MAX_N:
            raise SizeCapError(f"cannot expand n={self.n} to a full table (cap {FULL_MAX_N})")
        w = weights_table(self.n)
        per_atom = self.masses / np.array([math.comb(self.n, k) for k in range(self.n + 1)], dtype=float)
        return DistF2n(self.n, "full", per_atom[w], self.bernoulli_p)

    def weight_profile(self) -> np.ndarray:
        if self.mode == "weight":
            return self.masses
        return np.bincount(weights_table(self.n), weights=self.masses, minlength=self.n + 1)

    def is_uniform(self) -> bool:
        return self.bernoulli_p == 0.5

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["atom_index" if self.mode == "full" else "weight", "mass"])
        for i, m in enumerate(self.masses.tolist()):
            writer.writerow([i, repr(m)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


# ---------------------------------------------------------------------------


def _wht(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform of a length-2^n vector."""
    a = np.array(a, dtype=float)
    N = a.size
    h = 1
    while h < N:
        a = a.reshape(-1, 2, h)
        a = np.stack([a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]], axis=1)
        h *= 2
    return a.reshape(N)


def convolve(P: DistF2n, Q: DistF2n) -> DistF2n:
    """Law of ``V + V'`` for independent ``V ~ P`` and ``V' ~ Q``."""
    if P.n != Q.n:
        raise ValueError(f"length mismatch: {P.n} != {Q.n}")
    if P.bernoulli_p is not None and Q.bernoulli_p is not None:
        p, q = P.bernoulli_p, Q.bernoulli_p
        return DistF2n.bernoulli(P.n, p + q - 2 * p * q)
    if P.n > FULL_MAX_N:
        raise SizeCapError(f"convolution of general laws needs n <= {FULL_MAX_N}")
    a, b = P.full().masses, Q.full().masses
    out = _wht(_wht(a) * _wht(b)) / a.size
    out = np.clip(out, 0.0, None)
    return DistF2n(P.n, "full", out / math.fsum(out))


def _log_power_sum(masses: np.ndarray, alpha: float, log_mult=None) -> float:
    """``ln sum mult * m**alpha`` over the support."""
    pos = masses > 0
    terms = alpha * np.log(masses[pos])
    if log_mult is not None:
        terms = terms + log_mult[pos]
    return float(logsumexp(terms))


def renyi_entropy(P: DistF2n, alpha: float) -> float:
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if P.bernoulli_p is not None:
        from .channel import h_alpha

        return P.n * h_alpha(P.bernoulli_p, alpha)
    m = P.masses
    log_mult = None
    if P.mode == "weight":
        # each of the C(n, w) atoms of weight w has mass m_w / C(n, w)
        lc = _log_binom(P.n, np.arange(P.n + 1))
        pos = m > 0
        atom = np.zeros_like(m)
        atom[pos] = np.exp(np.log(m[pos]) - lc[pos])
        if alpha == 1:
            return -math.fsum((m[pos] * (np.log(m[pos]) - lc[pos])).tolist()) / LN2
        return _log_power_sum(atom, alpha, lc) / ((1 - alpha) * LN2)
    pos = m > 0
    if alpha == 1:
        return -math.fsum((m[pos] * np.log2(m[pos])).tolist())
    return _log_power_sum(m, alpha) / ((1 - alpha) * LN2)


def _check_continuity(P: np.ndarray, Q: np.ndarray, mode: str) -> None:
    bad = np.flatnonzero((P > 0) & (Q == 0))
    if bad.size:
        what = "atom" if mode == "full" else "weight"
        raise ValueError(f"P is not absolutely continuous w.r.t. Q: {what} {int(bad[0])} has "
                         f"P={P[bad[0]]!r} but Q=0")


def renyi_divergence(P: DistF2n, Q: DistF2n, alpha: float) -> float:
    """``D_alpha(P || Q)`` in bits; ``alpha = 1`` gives the KL divergence."""
    if P.n != Q.n:
        raise ValueError(f"length mismatch: {P.n} != {Q.n}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if P.mode == Q.mode == "weight" and Q.is_uniform() and P.bernoulli_p is not None:
        return P.n - renyi_entropy(P, alpha)
    if P.mode == Q.mode == "weight":
        # for laws that are both weight-symmetric the sum collapses onto the profiles
        p, q, mode = P.masses, Q.masses, "weight"
    else:
        p, q, mode = P.full().masses, Q.full().masses, "full"
    _check_continuity(p, q, mode)
    pos = p > 0
    lp, lq = np.log(p[pos]), np.log(q[pos])
    if alpha == 1:
        return math.fsum((p[pos] * (lp - lq)).tolist()) / LN2
    return float(logsumexp(alpha * lp + (1 - alpha) * lq)) / ((alpha - 1) * LN2)


def divergence_from_uniform(P: DistF2n, alpha: float) -> float:
    return renyi_divergence(P, DistF2n.uniform(P.n, "weight" if P.mode == "weight" else "full"), alpha)


def syndrome_dist(H: Gf2Matrix, P_V: DistF2n) -> DistF2n:
    """Law of ``HV`` for ``V ~ P_V``; one pass over all ``2**n`` atoms."""
    if H.n != P_V.n:
        raise ValueError(f"length mismatch: H has {H.n} columns, P_V has n={P_V.n}")
    if H.n > FULL_MAX_N or H.m > FULL_MAX_N:
        raise SizeCapError(f"syndrome distribution needs n, m <= {FULL_MAX_N}")
    table = syndrome_table(H)
    masses = np.bincount(table, weights=P_V.full().masses, minlength=1 << H.m)
    return DistF2n(H.m, "full", masses / math.fsum(masses))


def coset_output_dist(codewords: np.ndarray, P_V: DistF2n) -> DistF2n:
    """``P_C * P_V`` by summing the noise table shifted by every codeword."""
    noise = P_V.full().masses
    idx = np.arange(noise.size)
    acc = np.zeros_like(noise)
    for c in codewords.tolist():
        acc += noise[idx ^ c]
    acc /= len(codewords)
    return DistF2n(P_V.n, "full", acc / math.fsum(acc))


def smoothing_divergence(H: Gf2Matrix, P_V: DistF2n, alpha: float) -> float:
    """``D_alpha(P_{X' + V} || U_n)`` with ``X'`` uniform on ``ker H``."""
    if H.n != P_V.n:
        raise ValueError(f"length mismatch: H has {H.n} columns, P_V has n={P_V.n}")
    if P_V.n > FULL_MAX_N:
        raise SizeCapError(f"smoothing divergence needs n <= {FULL_MAX_N}")
    if P_V.is_uniform():
        return 0.0
    basis = kernel_basis(H)
    if len(basis) > FULL_MAX_N:
        raise SizeCapError(f"code dimension {len(basis)} exceeds {FULL_MAX_N}")
    out = coset_output_dist(span_array(basis), P_V)
    return renyi_divergence(out, DistF2n.uniform(P_V.n, "full"), alpha)


def lemma1_check(H: Gf2Matrix, P_V: DistF2n, alpha: float = 1.0) -> tuple[float, float, float]:
    """Code side and syndrome side of the smoothing identity, computed independently."""
    if H.n > LEMMA1_MAX_N:
        raise SizeCapError(f"lemma1_check needs n <= {LEMMA1_MAX_N}, got {H.n}")
    if rank(H) != H.m:
        raise ValueError(f"H must have full row rank (rank {rank(H)} < {H.m} rows)")
    lhs = smoothing_divergence(H, P_V, alpha)
    rhs = renyi_divergence(syndrome_dist(H, P_V), DistF2n.uniform(H.m, "full"), alpha)
    return lhs, rhs, abs(lhs - rhs)


# ---------------------------------------------------------------------------
# exact leakage I(M; Z)


def _check_nested(H_B: Gf2Matrix, H_E: Gf2Matrix) -> None:
    if H_B.n != H_E.n:
        raise ValueError("H_B and H_E have different lengths")
    for v in kernel_basis(H_E):
        if any((r & v.value).bit_count() & 1 for r in H_B.rows):
            raise ValueError(f"codes are not nested: {v} is in ker H_E but not in ker H_B")


def output_likelihoods(ch: BmsChannel, codewords: np.ndarray, n: int) -> np.ndarray:
    """``P(z | x)`` for every output word ``z`` (rows, base-K digits with digit i = z_i) and codeword ``x`` (columns)."""
    K = ch.outputs
    if K ** n > LEAKAGE_MAX_OUTPUTS:
        raise SizeCapError(f"{K}^{n} outputs exceed the cap of {LEAKAGE_MAX_OUTPUTS}")
    z = np.arange(K ** n)
    digits = np.stack([(z // K ** i) % K for i in range(n)], axis=1)
    X = ((codewords[:, None] >> np.arange(n)) & 1).astype(float)
    W = ch.W
    zero0, zero1 = (W[digits, 0] == 0), (W[digits, 1] == 0)
    with np.errstate(divide="ignore"):
        l0 = np.where(zero0, 0.0, np.log(np.where(zero0, 1.0, W[digits, 0])))
        l1 = np.where(zero1, 0.0, np.log(np.where(zero1, 1.0, W[digits, 1])))
    loglik = l0.sum(axis=1)[:, None] + (l1 - l0) @ X.T
    zeros = zero0.astype(float) @ (1 - X).T + zero1.astype(float) @ X.T
    return np.where(zeros > 0, 0.0, np.exp(loglik))


def exact_leakage(H_B: Gf2Matrix, H_E: Gf2Matrix, ch: BmsChannel) -> float:
    """``I(M; Z)`` in bits for uniform ``M`` over ``C_B / C_E`` and uniform ``X`` in the coset."""
    _check_nested(H_B, H_E)
    n = H_B.n
    if ch.outputs ** n > LEAKAGE_MAX_OUTPUTS:
        raise SizeCapError(f"exact leakage over {ch.outputs}^{n} outputs exceeds the cap")
    words = span_array(kernel_basis(H_B))
    syn = syndrome_table(H_E)[words]
    _, coset = np.unique(syn, return_inverse=True)
    lik = output_likelihoods(ch, words, n)
    n_msg = coset.max() + 1
    P_zm = np.stack([lik[:, coset == m].mean(axis=1) for m in range(n_msg)], axis=1)
    P_z = P_zm.mean(axis=1)
    terms = []
    for m in range(n_msg):
        pm = P_zm[:, m]
        pos = pm > 0
        terms.append(math.fsum((pm[pos] * np.log2(pm[pos] / P_z[pos])).tolist()))
    return float(max(math.fsum(terms) / n_msg, 0.0))
