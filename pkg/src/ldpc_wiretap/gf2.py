"""Bit-packed vectors and matrices over GF(2).

Words are stored as Python integers: bit ``i`` of a length-``n`` word is
``(value >> i) & 1``.  The text form of a word lists bit 0 first, so the
string ``"1100"`` is the integer 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_ENUM_N = 64


@dataclass(frozen=True, slots=True)
class BitWord:
    """A length-``n`` vector over GF(2)."""

    n: int
    value: int = 0

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError(f"word length must be positive, got {self.n}")
        if self.value < 0 or self.value >> self.n:
            raise ValueError(f"value {self.value} does not fit in {self.n} bits")

    @classmethod
    def from_str(cls, bits: str) -> BitWord:
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"not a bit string: {bits!r}")
        return cls(len(bits), sum(1 << i for i, c in enumerate(bits) if c == "1"))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitWord:
        bits = [int(b) & 1 for b in bits]
        return cls(len(bits), sum(b << i for i, b in enumerate(bits)))

    @classmethod
    def ones(cls, n: int) -> BitWord:
        return cls(n, (1 << n) - 1)

    def __str__(self) -> str:
        return "".join("1" if (self.value >> i) & 1 else "0" for i in range(self.n))

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.value >> i) & 1

    def __xor__(self, other: BitWord) -> BitWord:
        _check_len(self.n, other.n)
        return BitWord(self.n, self.value ^ other.value)

    __add__ = __xor__

    @property
    def weight(self) -> int:
        return self.value.bit_count()

    def dot(self, other: BitWord) -> int:
        _check_len(self.n, other.n)
        return (self.value & other.value).bit_count() & 1

    def to_array(self) -> np.ndarray:
        return np.array([(self.value >> i) & 1 for i in range(self.n)], dtype=np.uint8)


def _check_len(a: int, b: int) -> None:
    if a != b:
        raise ValueError(f"dimension mismatch: {a} != {b}")


def weight(w: BitWord) -> int:
    return w.weight


@dataclass(frozen=True, slots=True)
class Gf2Matrix:
    """An ``m x n`` matrix over GF(2); ``rows[r]`` is row ``r`` packed as an int."""

    m: int
    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.n <= 0 or self.m < 0:
            raise ValueError(f"bad shape {self.m}x{self.n}")
        if len(self.rows) != self.m:
            raise ValueError(f"expected {self.m} rows, got {len(self.rows)}")
        limit = 1 << self.n
        for r in self.rows:
            if r < 0 or r >= limit:
                raise ValueError(f"row {r} does not fit in {self.n} columns")

    @classmethod
    def from_rows(cls, rows: Sequence[BitWord | str | int], n: int | None = None) -> Gf2Matrix:
        packed = []
        for r in rows:
            if isinstance(r, str):
                r = BitWord.from_str(r)
            if isinstance(r, BitWord):
                if n is None:
                    n = r.n
                _check_len(n, r.n)
                packed.append(r.value)
            else:
                packed.append(int(r))
        if n is None:
            raise ValueError("column count needed for an empty or integer-row matrix")
        return cls(len(packed), n, tuple(packed))

    @classmethod
    def from_array(cls, a) -> Gf2Matrix:
        a = np.asarray(a, dtype=np.uint8) & 1
        m, n = a.shape
        weights = 1 << np.arange(n, dtype=object)
        return cls(m, n, tuple(int(np.dot(row.astype(object), weights)) for row in a))

    @classmethod
    def identity(cls, n: int) -> Gf2Matrix:
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def zeros(cls, m: int, n: int) -> Gf2Matrix:
        return cls(m, n, (0,) * m)

    def row(self, r: int) -> BitWord:
        return BitWord(self.n, self.rows[r])

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.m, self.n), dtype=np.uint8)
        for r, v in enumerate(self.rows):
            for i in range(self.n):
                out[r, i] = (v >> i) & 1
        return out

    def columns(self) -> list[int]:
        """Column ``i`` packed as an ``m``-bit integer (bit ``r`` = row ``r``)."""
        cols = [0] * self.n
        for r, v in enumerate(self.rows):
            for i in range(self.n):
                if (v >> i) & 1:
                    cols[i] |= 1 << r
        return cols

    def vstack(self, other: Gf2Matrix) -> Gf2Matrix:
        _check_len(self.n, other.n)
        return Gf2Matrix(self.m + other.m, self.n, self.rows + other.rows)

    def __matmul__(self, v: BitWord) -> BitWord:
        return matvec(self, v)

    def to_text(self) -> str:
        lines = [f"{self.m} {self.n}"]
        lines += [str(BitWord(self.n, r)) for r in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Gf2Matrix:
        lines = [ln.strip() for ln in text.strip().splitlines()]
        try:
            m, n = (int(x) for x in lines[0].split())
        except (IndexError, ValueError):
            raise ValueError("first line must be 'm n'") from None
        body = lines[1:]
        if len(body) != m:
            raise ValueError(f"expected {m} rows, found {len(body)}")
        for k, ln in enumerate(body):
            if len(ln) != n:
                raise ValueError(f"row {k} has {len(ln)} columns, expected {n}")
        return cls.from_rows([BitWord.from_str(ln) for ln in body], n=n) if m else cls(0, n, ())

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> Gf2Matrix:
        return cls.from_text(Path(path).read_text())


def matvec(M: Gf2Matrix, v: BitWord) -> BitWord:
    _check_len(M.n, v.n)
    if M.m == 0:
        raise ValueError("matrix has no rows")
    out = 0
    for i, r in enumerate(M.rows):
        out |= ((r & v.value).bit_count() & 1) << i
    return BitWord(M.m, out)


def _echelon(rows: Iterable[int]) -> list[int]:
    """Rows reduced so that each has a distinct leading (highest) bit, sorted by that bit descending."""
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top not in basis:
                basis[top] = r
                break
            r ^= basis[top]
    return [basis[k] for k in sorted(basis, reverse=True)]


def reduce_against(v: int, echelon: Sequence[int]) -> int:
    """Clear the leading bits of ``echelon`` from ``v``; gives the smallest element of ``v + span``."""
    for b in echelon:
        if (v >> (b.bit_length() - 1)) & 1:
            v ^= b
    return v


def rank(M: Gf2Matrix) -> int:
    return len(_echelon(M.rows))


def row_basis(M: Gf2Matrix) -> Gf2Matrix:
    """A full-row-rank matrix with the same row space (hence the same kernel) as ``M``."""
    return Gf2Matrix(0, M.n, ()) if not any(M.rows) else Gf2Matrix.from_rows(_echelon(M.rows), n=M.n)


def kernel_basis(M: Gf2Matrix) -> list[BitWord]:
    """Basis of ``{v : Mv = 0}``, one vector per free column of the reduced row echelon form."""
    n = M.n
    pivots: list[tuple[int, int]] = []  # (pivot column, row)
    rows = [r for r in M.rows if r]
    reduced: list[int] = []
    for col in range(n):
        bit = 1 << col
        k = next((i for i, r in enumerate(rows) if r & bit), None)
        if k is None:
            continue
        piv = rows.pop(k)
        rows = [r ^ piv if r & bit else r for r in rows]
        reduced = [r ^ piv if r & bit else r for r in reduced]
        reduced.append(piv)
        pivots.append((col, len(reduced) - 1))
    pivot_cols = {c for c, _ in pivots}
    basis = []
    for f in range(n):
        if f in pivot_cols:
            continue
        v = 1 << f
        for c, i in pivots:
            if (reduced[i] >> f) & 1:
                v |= 1 << c
        basis.append(BitWord(n, v))
    return basis


def in_span(v: int, basis: Sequence[int]) -> bool:
    return reduce_against(v, _echelon(basis)) == 0


def span(basis: Sequence[BitWord]) -> Iterator[BitWord]:
    """All ``2**k`` combinations of ``basis``, in Gray-code order (one XOR per step)."""
    if not basis:
        return
    n = basis[0].n
    vals = [b.value for b in basis]
    cur = 0
    yield BitWord(n, 0)
    for i in range(1, 1 << len(vals)):
        cur ^= vals[(i & -i).bit_length() - 1]
        yield BitWord(n, cur)


def span_array(basis: Sequence[BitWord | int]) -> np.ndarray:
    """All combinations of ``basis`` as an int64 array; index bit ``j`` selects basis vector ``j``."""
    words = np.zeros(1, dtype=np.int64)
    for b in basis:
        b = b.value if isinstance(b, BitWord) else int(b)
        words = np.concatenate([words, words ^ b])
    return words


def syndrome_table(H: Gf2Matrix) -> np.ndarray:
    """``Hv`` (as an integer) for every ``v`` in ``0 .. 2**n - 1``."""
    if H.n > 26:
        raise ValueError(f"syndrome table for n={H.n} is too large")
    cols = H.columns()
    table = np.zeros(1, dtype=np.int64)
    for c in cols:
        table = np.concatenate([table, table ^ c])
    return table


def weights_table(n: int) -> np.ndarray:
    """Hamming weight of every integer below ``2**n``."""
    w = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        w = np.concatenate([w, w + 1])
    return w


def ball_volume(n: int, t: int) -> int:
    if not 0 <= t <= n:
        raise ValueError(f"radius {t} out of range for n={n}")
    return sum(comb(n, i) for i in range(t + 1))


def gamma_size(n: int, t: int) -> int:
    """Size of ``B_t(0) | B_t(1^n)``."""
    if not 0 <= t <= n:
        raise ValueError(f"radius {t} out of range for n={n}")
    if n > 2 * t:
        return 2 * ball_volume(n, t)
    # words within t of both centers have weight in [n - t, t]
    both = sum(comb(n, w) for w in range(n - t, t + 1))
    return 2 * ball_volume(n, t) - both


@dataclass(frozen=True)
class BallGeometry:
    n: int
    t: int

    @property
    def volume(self) -> int:
        return ball_volume(self.n, self.t)

    @property
    def gamma(self) -> int:
        return gamma_size(self.n, self.t)

    def shell(self, i: int) -> int:
        return comb(self.n, i)
