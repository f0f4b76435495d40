"""Network-code construction and per-source distance analysis."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import gf2
from .errors import ComplexityError, DimensionError, NotAchievableError, RankError
from .gf2 import Gf2Matrix

MAX_GREEDY_N = 24

Schedule = tuple[int, ...]


@dataclass(frozen=True)
class CodeSpec:
    n: int
    k: int
    d: int

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.d < 1:
            raise ValueError(f"need d >= 1, got {self.d}")

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.n)


def default_schedule(k: int, n: int) -> Schedule:
    """Slot ``j`` (1-based) goes to source ``(j - 1) mod k + 1``."""
    return tuple((j % k) + 1 for j in range(n))


def greedy_construct(spec: CodeSpec) -> Gf2Matrix:
    """Lexicode basis for ``spec``.

    Nonzero length-n vectors are scanned in increasing lexicographic order
    and a candidate is kept when every word of (span of kept vectors) + candidate
    is at distance >= d from it.  Scanning stops as soon as k generators
    are kept; the generators become the rows of G in the order found.
    """
    n, k, d = spec.n, spec.k, spec.d
    if n > MAX_GREEDY_N:
        raise ComplexityError(f"greedy scan over 2^{n} vectors exceeds limit 2^{MAX_GREEDY_N}")
    span = np.zeros(1, dtype=np.int64)
    gens: list[int] = []
    for cand in range(1, 1 << n):
        if int(gf2.popcount(span ^ cand).min()) >= d:
            gens.append(cand)
            if len(gens) == k:
                return Gf2Matrix(tuple(gens), n)
            span = np.concatenate([span, span ^ cand])
    raise NotAchievableError(
        f"({n}, {k}, {d}) not achievable by greedy construction; "
        f"best dimension reached is {len(gens)}",
        best_dimension=len(gens),
    )


def require_full_rank(G: Gf2Matrix) -> None:
    if gf2.rank(G) == G.nrows:
        return
    # name the first source whose row lies in the span of the earlier rows
    for i in range(G.nrows):
        if gf2.rank_of_rows(G.rows[: i + 1]) <= i:
            raise RankError(f"generator is rank-deficient: source {i + 1} is not recoverable", i + 1)
    raise RankError("generator is rank-deficient")


def separation_vector(G: Gf2Matrix) -> tuple[int, ...]:
    """Per-source minimum distance: entry i is min wt(uG) over u with u_i = 1."""
    require_full_rank(G)
    k = G.nrows
    weights = gf2.popcount(gf2.codebook_words(G))
    msgs = np.arange(1 << k)
    out = []
    for i in range(k):
        has_bit = (msgs >> (k - 1 - i)) & 1
        out.append(int(weights[has_bit == 1].min()))
    return tuple(out)


def minimum_distance(G: Gf2Matrix) -> int:
    """Brute-force minimum weight of a nonzero codeword."""
    words = gf2.codebook_words(G)
    return int(gf2.popcount(words[1:]).min())


def network_diversity_order(sv: Sequence[int]) -> Fraction:
    return Fraction(sum(sv), len(sv))


def puncture(G: Gf2Matrix, v: Sequence[int], drop: Iterable[int]) -> tuple[Gf2Matrix, Schedule]:
    """Remove the given 0-based columns from G and the matching slots from v."""
    drop = set(drop)
    if len(v) != G.ncols:
        raise DimensionError(f"schedule has {len(v)} slots but G has {G.ncols} columns")
    bad = sorted(j for j in drop if not 0 <= j < G.ncols)
    if bad:
        raise DimensionError(f"column indices out of range: {bad}")
    keep = [j for j in range(G.ncols) if j not in drop]
    if not keep:
        raise DimensionError("cannot drop every column")
    P = G.select_columns(keep)
    require_full_rank(P)
    return P, tuple(v[j] for j in keep)


def repetition_code(k: int, repeats: int) -> tuple[Gf2Matrix, Schedule]:
    if k < 1 or repeats < 1:
        raise ValueError("k and repeats must be positive")
    eye = np.eye(k, dtype=np.uint8)
    G = Gf2Matrix.from_array(np.tile(eye, repeats))
    return G, tuple(range(1, k + 1)) * repeats


def systematic_form(G: Gf2Matrix) -> Gf2Matrix:
    """Row-reduce G and move the pivot columns to the front, in row order.

    The result generates a permuted copy of the same code and has the form
    ``[I | P]``, so the default schedule gives every source a direct slot
    before any combined slot.  Row operations can change the separation
    vector; callers that care must re-check it.
    """
    require_full_rank(G)
    a = np.array(G.to_array(), dtype=np.uint8)
    k, n = a.shape
    pivots = []
    r = 0
    for c in range(n):
        hits = np.nonzero(a[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        a[[r, p]] = a[[p, r]]
        for i in range(k):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        pivots.append(c)
        r += 1
        if r == k:
            break
    rest = [c for c in range(n) if c not in pivots]
    return Gf2Matrix.from_array(a[:, pivots + rest])
