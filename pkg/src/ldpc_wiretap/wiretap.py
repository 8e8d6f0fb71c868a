"""Coset coding over a nested pair ``C_E ⊂ C_B`` and the experiment loop around it.

Message ``m`` (an integer below ``2**(k_B - k_E)``) selects the coset
``leader(m) + C_E`` with ``leader(m) = XOR of ext[j] over the set bits j of m``.
The extension basis ``ext`` is reduced against ``C_E`` and among itself, which
makes every leader the smallest integer in its coset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binomtest

from . import rng
from .bounds import bms_leakage_bound, markov_confidence, prop1_rhs, select_params
from .channel import BmsChannel, _transmit, bsc_equivalent, capacity
from .distribution import (
    DistF2n,
    SizeCapError,
    _check_nested,
    exact_leakage,
    output_likelihoods,
    smoothing_divergence,
)
from .ensemble import NestedSpec, sample_nested
from .gf2 import BitWord, Gf2Matrix, _echelon, kernel_basis, reduce_against, span_array

MAX_K_B = 24
MC_CHUNK = 1024


def _rref(vectors) -> list[int]:
    """Fully reduced basis, sorted by leading bit ascending."""
    ech = _echelon(vectors)
    for i, v in enumerate(ech):
        lead = 1 << (v.bit_length() - 1)
        for j in range(len(ech)):
            if j != i and ech[j] & lead:
                ech[j] ^= v
    return sorted(ech, key=int.bit_length)


@dataclass(frozen=True, eq=False)
class CosetCode:
    H_B: Gf2Matrix
    H_E: Gf2Matrix
    basis_e: tuple[int, ...]
    ext: tuple[int, ...]
    codewords: np.ndarray = field(repr=False)
    messages: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.H_B.n

    @property
    def k_e(self) -> int:
        return len(self.basis_e)

    @property
    def k_b(self) -> int:
        return len(self.basis_e) + len(self.ext)

    @property
    def num_messages(self) -> int:
        return 1 << len(self.ext)

    @property
    def message_rate(self) -> float:
        return (self.k_b - self.k_e) / self.n

    def leader(self, m: int) -> BitWord:
        if not 0 <= m < self.num_messages:
            raise IndexError(f"message {m} out of range 0..{self.num_messages - 1}")
        v = 0
        for j, e in enumerate(self.ext):
            if (m >> j) & 1:
                v ^= e
        return BitWord(self.n, v)

    @property
    def leaders(self) -> list[BitWord]:
        return [self.leader(m) for m in range(self.num_messages)]

    def message_of(self, x: int) -> int:
        """Message index of the coset containing the codeword ``x``."""
        r = reduce_against(int(x), self.basis_e)
        m = 0
        for j, e in enumerate(self.ext):
            if (r >> (e.bit_length() - 1)) & 1:
                m |= 1 << j
        return m


def build(H_B: Gf2Matrix, H_E: Gf2Matrix) -> CosetCode:
    _check_nested(H_B, H_E)
    kb = kernel_basis(H_B)
    if len(kb) > MAX_K_B:
        raise SizeCapError(f"dim C_B = {len(kb)} exceeds {MAX_K_B}")
    basis_e = _echelon(v.value for v in kernel_basis(H_E))
    ext = _rref([r for r in (reduce_against(v.value, basis_e) for v in kb) if r])
    words = np.sort(span_array(kb))
    code = CosetCode(H_B, H_E, tuple(basis_e), tuple(ext), words, np.zeros(0, dtype=np.int64))
    msgs = np.array([code.message_of(x) for x in words.tolist()], dtype=np.int64)
    object.__setattr__(code, "messages", msgs)
    return code


def encode(code: CosetCode, m: int, seed: int) -> BitWord:
    return _encode(code, m, rng.stream(seed))


def _encode(code: CosetCode, m: int, g: np.random.Generator) -> BitWord:
    x = code.leader(m).value
    coeffs = g.integers(0, 2, size=code.k_e)
    for c, b in zip(coeffs.tolist(), code.basis_e):
        if c:
            x ^= b
    return BitWord(code.n, x)


# ---------------------------------------------------------------------------
# maximum-likelihood decoding


def _codeword_bits(code: CosetCode) -> np.ndarray:
    return ((code.codewords[:, None] >> np.arange(code.n)) & 1).astype(np.intp)


def _log_lik(code: CosetCode, ch: BmsChannel, Y: np.ndarray) -> np.ndarray:
    """Log-likelihood of every codeword for each output row of ``Y``; rounded so that exact ties stay ties."""
    with np.errstate(divide="ignore"):
        logW = np.log(ch.W)
    X = _codeword_bits(code)
    A = logW[Y]  # (batch, n, 2)
    out = np.zeros((Y.shape[0], X.shape[0]))
    for i in range(code.n):
        out += A[:, i, :][:, X[:, i]]
    return np.round(out, 9)


def decide(code: CosetCode, ch: BmsChannel, Y: np.ndarray, rule: str = "codeword") -> np.ndarray:
    """Message decisions for a batch of output words (one per row of ``Y``).

    ``rule="codeword"`` picks the most likely codeword of ``C_B`` (ties go to the
    smallest codeword integer) and returns its coset; ``rule="coset"`` picks the
    coset with the largest total likelihood (ties go to the smallest index).
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=np.intp))
    ll = _log_lik(code, ch, Y)
    if rule == "codeword":
        return code.messages[np.argmax(ll, axis=1)]
    if rule == "coset":
        M = code.num_messages
        scores = np.full((Y.shape[0], M), -np.inf)
        for m in range(M):
            cols = ll[:, code.messages == m]
            scores[:, m] = logsumexp(cols, axis=1)
        return np.argmax(np.round(scores, 9), axis=1)
    raise ValueError(f"unknown rule {rule!r}")


def decode_codeword(code: CosetCode, ch: BmsChannel, Y: np.ndarray) -> np.ndarray:
    Y = np.atleast_2d(np.asarray(Y, dtype=np.intp))
    return code.codewords[np.argmax(_log_lik(code, ch, Y), axis=1)]


def ml_decode(code: CosetCode, ch: BmsChannel, y, rule: str = "codeword") -> int:
    return int(decide(code, ch, np.asarray(y)[None, :], rule)[0])


def exact_error_probs(code: CosetCode, ch: BmsChannel) -> dict[str, float]:
    """Error probabilities by enumerating every output word, for uniform ``X`` on ``C_B``.

    ``codeword``: decoded codeword differs from the sent one.  ``coset``: the
    message from the codeword rule is wrong.  ``coset_map``: the message from
    the coset-likelihood rule is wrong.
    """
    n, K = code.n, ch.outputs
    lik = output_likelihoods(ch, code.codewords, n)  # (K^n, |C_B|)
    z = np.arange(K ** n)
    Y = np.stack([(z // K ** i) % K for i in range(n)], axis=1)
    best = np.argmax(_log_lik(code, ch, Y), axis=1)
    m_cw = code.messages[best]
    m_map = decide(code, ch, Y, "coset")
    size = code.codewords.size
    p_cw = math.fsum(lik[np.arange(z.size), best].tolist()) / size
    same_cw = code.messages[None, :] == m_cw[:, None]
    same_map = code.messages[None, :] == m_map[:, None]
    p_coset = math.fsum(lik[same_cw].tolist()) / size
    p_map = math.fsum(lik[same_map].tolist()) / size
    return {"codeword": 1 - p_cw, "coset": 1 - p_coset, "coset_map": 1 - p_map}


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass
class McResult:
    trials: int
    errors: int
    codeword_errors: int

    @property
    def rate(self) -> float:
        return self.errors / self.trials if self.trials else 0.0

    def wilson(self, level: float = 0.95) -> tuple[float, float]:
        if self.trials == 0:
            return 0.0, 1.0
        ci = binomtest(self.errors, self.trials).proportion_ci(level, method="wilson")
        return float(ci.low), float(ci.high)


def simulate_chunk(code: CosetCode, ch: BmsChannel, seed: int, chunk: int, size: int,
                   rule: str = "codeword") -> tuple[int, int]:
    """Message and codeword error counts for trial chunk ``chunk`` (stream ``(seed, 1, chunk)``)."""
    g = rng.stream(seed, 1, chunk)
    msgs = g.integers(0, code.num_messages, size=size)
    xs = np.empty(size, dtype=np.int64)
    for i, m in enumerate(msgs.tolist()):
        xs[i] = _encode(code, m, g).value
    bits = ((xs[:, None] >> np.arange(code.n)) & 1).astype(np.uint8)
    Y = _transmit(ch, bits, g).astype(np.intp)
    best = np.argmax(_log_lik(code, ch, Y), axis=1)
    cw_errors = int(np.count_nonzero(code.codewords[best] != xs))
    dec = code.messages[best] if rule == "codeword" else decide(code, ch, Y, rule)
    return int(np.count_nonzero(dec != msgs)), cw_errors


def simulate(code: CosetCode, ch: BmsChannel, trials: int, seed: int, rule: str = "codeword") -> McResult:
    """Send uniform messages through ``ch`` and count decoding errors.

    Trials run in chunks of ``MC_CHUNK``; each chunk has its own stream, so the
    chunks can be evaluated in any order (or in parallel) with the same totals.
    """
    errors = cw_errors = 0
    for c, start in enumerate(range(0, trials, MC_CHUNK)):
        e, ce = simulate_chunk(code, ch, seed, c, min(MC_CHUNK, trials - start), rule)
        errors += e
        cw_errors += ce
    return McResult(trials, errors, cw_errors)


def run_experiment(spec: NestedSpec, ch_B: BmsChannel, ch_E: BmsChannel, trials: int, seed: int, *,
                   mode: str = "exact", delta: float | None = None, alpha: float = 1.5, t: int = 1,
                   eps: float | None = None) -> dict:
    """One code pair from the nested ensemble: rates, Monte Carlo reliability at B, leakage to E.

    In ``exact`` mode the leakage is the exact ``I(M;Z)``; in ``bound`` mode it is
    the ensemble bound (two-term Renyi bound at the capacity-matched BSC, doubled
    for a non-BSC eavesdropper).
    """
    if mode not in ("exact", "bound"):
        raise ValueError(f"unknown mode {mode!r}")
    H_B, H_E = sample_nested(spec, rng.child_seed(seed, 0))
    code = build(H_B, H_E)
    mc = simulate(code, ch_B, trials, rng.child_seed(seed, 1))
    lo, hi = mc.wilson()
    p_star = bsc_equivalent(ch_E)
    report = {
        "seed": seed,
        "mode": mode,
        "spec": spec.to_dict(),
        "channel_b": ch_B.to_config(),
        "channel_e": ch_E.to_config(),
        "trials": trials,
        "capacity_b": capacity(ch_B),
        "capacity_e": capacity(ch_E),
        "design_rate_b": float(spec.rate_b),
        "design_rate_e": float(spec.rate_e),
        "design_message_rate": float(spec.rate_b - spec.rate_e),
        "k_b": code.k_b,
        "k_e": code.k_e,
        "actual_rate_b": code.k_b / spec.n,
        "actual_rate_e": code.k_e / spec.n,
        "message_rate": code.message_rate,
        "errors": mc.errors,
        "codeword_errors": mc.codeword_errors,
        "error_rate": mc.rate,
        "error_ci_low": lo,
        "error_ci_high": hi,
        "p_star": p_star,
    }
    if mode == "exact":
        report["leakage_bits"] = exact_leakage(H_B, H_E, ch_E)
        d = smoothing_divergence(H_E, DistF2n.bernoulli(spec.n, p_star), 1.0)
        report["smoothing_divergence_bits"] = d
        report["leakage_bound_bits"] = d if ch_E.kind == "bsc" else bms_leakage_bound(ch_E, H_E)
    else:
        if eps is not None:
            params = select_params(p_star, eps, spec.n)
            alpha, t = params.alpha, params.t
        inner = spec.inner
        rhs = prop1_rhs(spec.n, inner.rate, inner.s, p_star, alpha, t)
        report["alpha"] = alpha
        report["t"] = t
        report["ensemble_divergence_bound_bits"] = rhs
        report["leakage_bound_bits"] = rhs if ch_E.kind == "bsc" else 2 * rhs
        if delta is not None:
            report["per_code_bound_bits"] = markov_confidence(report["leakage_bound_bits"], delta)
    return report
