"""Binary-input memoryless symmetric channels with finite output alphabets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from . import rng
from .gf2 import BitWord

ERASURE = 2


def h2(p: float) -> float:
    """Binary entropy in bits, with 0 log 0 = 0."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def h_alpha(p: float, alpha: float) -> float:
    """Renyi entropy of order ``alpha`` of the two-point law (p, 1-p); ``alpha = 1`` is Shannon."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if alpha == 1:
        return h2(p)
    if p <= 0.0 or p >= 1.0:
        return 0.0
    # p**a + (1-p)**a - 1 written without cancellation, so alpha near 1 stays accurate
    d = alpha - 1
    excess = p * math.expm1(d * math.log(p)) + (1 - p) * math.expm1(d * math.log1p(-p))
    return -math.log1p(excess) / (d * math.log(2))


def h2_inverse(y: float) -> float:
    """The ``p`` in [0, 1/2] with ``h(p) = y``."""
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"entropy value {y} outside [0, 1]")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 0.5
    return bisect(lambda p: h2(p) - y, 0.0, 0.5, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


@dataclass(frozen=True)
class BmsChannel:
    """A BMS channel given by its transition matrix ``W[y, x] = P(y | x)``.

    ``kind`` is ``"bsc"``, ``"bec"`` or ``"table"``; ``param`` is the crossover or
    erasure probability for the first two.  Output symbols are indexed
    ``0 .. K-1``; for the BEC, index 2 is the erasure ``?``.
    """

    kind: str
    param: float | None
    W: np.ndarray = field(repr=False)
    labels: tuple = ()

    @classmethod
    def bsc(cls, p: float) -> BmsChannel:
        if not 0.0 <= p <= 0.5:
            raise ValueError(f"BSC crossover must lie in [0, 1/2], got {p}")
        W = np.array([[1 - p, p], [p, 1 - p]])
        return cls("bsc", float(p), W, (0, 1))

    @classmethod
    def bec(cls, e: float) -> BmsChannel:
        if not 0.0 <= e <= 1.0:
            raise ValueError(f"BEC erasure probability must lie in [0, 1], got {e}")
        W = np.array([[1 - e, 0.0], [0.0, 1 - e], [e, e]])
        return cls("bec", float(e), W, (0, 1, "?"))

    @classmethod
    def table(cls, rows) -> BmsChannel:
        """Build from ``[(label, P(y|0), P(y|1)), ...]``; checks stochasticity and symmetry."""
        rows = [tuple(r) for r in rows]
        if not rows:
            raise ValueError("empty channel table")
        W = np.array([[float(r[1]), float(r[2])] for r in rows])
        if (W < 0).any():
            raise ValueError("negative transition probability")
        for x in (0, 1):
            if abs(math.fsum(W[:, x]) - 1.0) > 1e-12:
                raise ValueError(f"P(.|{x}) sums to {math.fsum(W[:, x])!r}, not 1")
        if _find_involution(W) is None:
            raise ValueError("table is not symmetric: no output involution maps P(.|0) to P(.|1)")
        return cls("table", None, W, tuple(r[0] for r in rows))

    @classmethod
    def from_config(cls, cfg: dict) -> BmsChannel:
        kind = cfg.get("type")
        if kind == "bsc":
            return cls.bsc(float(cfg["p"]))
        if kind == "bec":
            return cls.bec(float(cfg["e"]))
        if kind == "table":
            return cls.table(cfg["rows"])
        raise ValueError(f"unknown channel type {kind!r}")

    def to_config(self) -> dict:
        if self.kind == "bsc":
            return {"type": "bsc", "p": self.param}
        if self.kind == "bec":
            return {"type": "bec", "e": self.param}
        return {"type": "table", "rows": [[lab, float(a), float(b)] for lab, (a, b) in zip(self.labels, self.W)]}

    @property
    def outputs(self) -> int:
        return self.W.shape[0]


def _find_involution(W: np.ndarray, tol: float = 1e-12) -> list[int] | None:
    K = W.shape[0]
    partner = [-1] * K
    for y in range(K):
        if partner[y] >= 0:
            continue
        for z in range(y, K):
            if partner[z] >= 0:
                continue
            if abs(W[y, 0] - W[z, 1]) <= tol and abs(W[y, 1] - W[z, 0]) <= tol:
                partner[y], partner[z] = z, y
                break
        else:
            return None
    return partner


def capacity(ch: BmsChannel) -> float:
    """Capacity in bits per use; uniform input is optimal for BMS channels."""
    if ch.kind == "bsc":
        return 1.0 - h2(ch.param)
    if ch.kind == "bec":
        return 1.0 - ch.param
    total = []
    for y0, y1 in ch.W:
        py = 0.5 * (y0 + y1)
        for pyx in (y0, y1):
            if pyx > 0:
                total.append(0.5 * pyx * math.log2(pyx / py))
    return math.fsum(total)


def bsc_equivalent(ch: BmsChannel) -> float:
    """Crossover ``p*`` of the BSC with the same capacity as ``ch``."""
    if ch.kind == "bsc":
        return ch.param
    c = min(max(capacity(ch), 0.0), 1.0)
    return h2_inverse(1.0 - c)


def bernoulli_noise(n: int, p: float):
    from .distribution import DistF2n

    return DistF2n.bernoulli(n, p)


def transmit(ch: BmsChannel, x: BitWord | np.ndarray, seed: int) -> np.ndarray:
    """Pass ``x`` through ``n`` independent channel uses; returns output symbol indices."""
    bits = x.to_array() if isinstance(x, BitWord) else np.asarray(x, dtype=np.uint8)
    g = rng.stream(seed)
    return _transmit(ch, bits, g)


def _transmit(ch: BmsChannel, bits: np.ndarray, g: np.random.Generator) -> np.ndarray:
    if ch.kind == "bsc":
        return (bits ^ (g.random(bits.shape) < ch.param)).astype(np.int8)
    if ch.kind == "bec":
        out = bits.astype(np.int8)
        out[g.random(bits.shape) < ch.param] = ERASURE
        return out
    cdf = np.cumsum(ch.W, axis=0)
    u = g.random(bits.shape)
    out = np.empty(bits.shape, dtype=np.int8)
    for x in (0, 1):
        sel = bits == x
        out[sel] = np.minimum(np.searchsorted(cdf[:, x], u[sel], side="right"), ch.outputs - 1)
    return out
