"""Dense linear algebra over GF(2) with bit-packed rows.

A length-``n`` vector is stored as a Python int whose most significant of
the ``n`` bits is entry 0.  Integer order therefore coincides with
lexicographic order of the bit strings, which is what the enumeration and
greedy-construction routines rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ComplexityError, DimensionError, ParseError

MAX_ENUM_BITS = 24


def _pack(bits: Iterable[int]) -> tuple[int, int]:
    word = 0
    length = 0
    for b in bits:
        b = int(b)
        if b not in (0, 1):
            raise ValueError(f"GF(2) entries must be 0 or 1, got {b}")
        word = (word << 1) | b
        length += 1
    return word, length


@dataclass(frozen=True)
class Gf2Vector:
    """Immutable binary vector."""

    word: int
    length: int

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("length must be nonnegative")
        if self.word < 0 or self.word >> self.length:
            raise ValueError(f"word {self.word:#x} does not fit in {self.length} bits")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "Gf2Vector":
        word, length = _pack(bits)
        return cls(word, length)

    @classmethod
    def zeros(cls, length: int) -> "Gf2Vector":
        return cls(0, length)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, j: int) -> int:
        if j < 0:
            j += self.length
        if not 0 <= j < self.length:
            raise IndexError(j)
        return (self.word >> (self.length - 1 - j)) & 1

    def __iter__(self) -> Iterator[int]:
        for j in range(self.length):
            yield (self.word >> (self.length - 1 - j)) & 1

    def __xor__(self, other: "Gf2Vector") -> "Gf2Vector":
        if self.length != other.length:
            raise DimensionError(f"length mismatch: {self.length} vs {other.length}")
        return Gf2Vector(self.word ^ other.word, self.length)

    __add__ = __xor__

    def weight(self) -> int:
        return self.word.bit_count()

    def to_list(self) -> list[int]:
        return list(self)

    def to_array(self) -> np.ndarray:
        return np.fromiter(self, dtype=np.uint8, count=self.length)

    def __str__(self) -> str:
        return "".join(str(b) for b in self)


@dataclass(frozen=True)
class Gf2Matrix:
    """Immutable ``k x n`` binary matrix stored as ``k`` packed rows."""

    rows: tuple[int, ...]
    ncols: int
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        for r in rows:
            if r < 0 or r >> self.ncols:
                raise ValueError(f"row {r:#x} does not fit in {self.ncols} columns")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "_hash", hash((rows, self.ncols)))

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def from_rows(cls, rows: Sequence[Iterable[int]]) -> "Gf2Matrix":
        packed = [_pack(r) for r in rows]
        if not packed:
            raise DimensionError("matrix needs at least one row")
        widths = {w for _, w in packed}
        if len(widths) != 1:
            raise DimensionError(f"ragged rows with lengths {sorted(widths)}")
        return cls(tuple(w for w, _ in packed), widths.pop())

    @classmethod
    def from_array(cls, a) -> "Gf2Matrix":
        a = np.asarray(a)
        if a.ndim != 2:
            raise DimensionError(f"expected a 2-D array, got shape {a.shape}")
        return cls.from_rows(a.tolist())

    @classmethod
    def identity(cls, k: int) -> "Gf2Matrix":
        return cls(tuple(1 << (k - 1 - i) for i in range(k)), k)

    @classmethod
    def zeros(cls, k: int, n: int) -> "Gf2Matrix":
        return cls((0,) * k, n)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def row(self, i: int) -> Gf2Vector:
        return Gf2Vector(self.rows[i], self.ncols)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not 0 <= j < self.ncols:
            raise IndexError(j)
        return (self.rows[i] >> (self.ncols - 1 - j)) & 1

    def column(self, j: int) -> Gf2Vector:
        return Gf2Vector.from_bits(self[i, j] for i in range(self.nrows))

    def columns(self) -> list[Gf2Vector]:
        return [self.column(j) for j in range(self.ncols)]

    def transpose(self) -> "Gf2Matrix":
        return Gf2Matrix(tuple(c.word for c in self.columns()), self.nrows)

    def select_columns(self, keep: Sequence[int]) -> "Gf2Matrix":
        cols = self.to_array()[:, list(keep)]
        return Gf2Matrix(tuple(_pack(r)[0] for r in cols), len(keep))

    @cached_property
    def _array(self) -> np.ndarray:
        a = np.zeros(self.shape, dtype=np.uint8)
        for i, r in enumerate(self.rows):
            for j in range(self.ncols):
                a[i, j] = (r >> (self.ncols - 1 - j)) & 1
        a.setflags(write=False)
        return a

    def to_array(self) -> np.ndarray:
        """Read-only ``uint8`` array view of the entries."""
        return self._array

    def to_lists(self) -> list[list[int]]:
        return self._array.tolist()

    def __str__(self) -> str:
        return "\n".join(" ".join(str(b) for b in row) for row in self.to_lists())


def mat_vec_mul(u: Gf2Vector, G: Gf2Matrix) -> Gf2Vector:
    """Codeword ``uG``."""
    if len(u) != G.nrows:
        raise DimensionError(f"message length {len(u)} does not match {G.nrows} rows")
    word = 0
    for i, r in enumerate(G.rows):
        if u[i]:
            word ^= r
    return Gf2Vector(word, G.ncols)


def hamming_weight(x: Gf2Vector) -> int:
    return x.word.bit_count()


def rank_of_rows(rows: Iterable[int]) -> int:
    # XOR basis keyed by leading bit
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            lead = r.bit_length() - 1
            if lead not in basis:
                basis[lead] = r
                break
            r ^= basis[lead]
    return len(basis)


def rank(G: Gf2Matrix) -> int:
    return rank_of_rows(G.rows)


def _check_enum(k: int) -> None:
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > MAX_ENUM_BITS:
        raise ComplexityError(f"refusing to enumerate 2^{k} messages (limit 2^{MAX_ENUM_BITS})")


def enumerate_messages(k: int) -> Iterator[Gf2Vector]:
    """All ``2**k`` binary k-vectors in lexicographic order."""
    _check_enum(k)
    for w in range(1 << k):
        yield Gf2Vector(w, k)


def message_array(k: int) -> np.ndarray:
    """``(2**k, k)`` uint8 array of all messages, lexicographic row order."""
    _check_enum(k)
    idx = np.arange(1 << k, dtype=np.int64)
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def codebook_words(G: Gf2Matrix) -> np.ndarray:
    """Packed codewords ``uG`` for every message, indexed by message word."""
    _check_enum(G.nrows)
    words = np.zeros(1 << G.nrows, dtype=np.int64)
    k = G.nrows
    for i, r in enumerate(G.rows):
        bit = 1 << (k - 1 - i)
        # message words with bit i set occupy alternating blocks of size `bit`
        mask = (np.arange(1 << k) & bit).astype(bool)
        words[mask] ^= r
    return words


def popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a)


def parse_matrix(lines: Sequence[str], first_line: int = 1) -> Gf2Matrix:
    """Parse rows of 0/1 characters; separators (spaces) are optional.

    ``first_line`` is used only for error messages.
    """
    rows = []
    width = None
    for offset, raw in enumerate(lines):
        lineno = first_line + offset
        text = raw.strip().replace(" ", "").replace("\t", "")
        if not text:
            raise ParseError("empty matrix row", lineno)
        bad = set(text) - {"0", "1"}
        if bad:
            raise ParseError(f"row {offset + 1} has non-binary characters {sorted(bad)}", lineno)
        if width is None:
            width = len(text)
        elif len(text) != width:
            raise ParseError(
                f"row {offset + 1} has length {len(text)}, expected {width}", lineno
            )
        rows.append([int(c) for c in text])
    if not rows:
        raise ParseError("matrix has no rows", first_line)
    return Gf2Matrix.from_rows(rows)
