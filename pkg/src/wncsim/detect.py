"""Exact detectors at the destination.

Every detector works on a batch of independent rounds.  Hypotheses are
all pairs (u, e) where ``e`` ranges only over slots that some round in
the batch reports as fallible (``p_e > 0``); rounds whose ``p_e`` is zero
on such a slot give the ``e_j = 1`` branch a log-prior of ``-inf``, which
pins it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf2
from .errors import ComplexityError, DimensionError
from .network import NetworkCode

MAX_HYPOTHESIS_BITS = 26
_BLOCK_ELEMS = 1 << 22


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


@dataclass
class DetectorInput:
    y: np.ndarray
    h: np.ndarray
    n0: float
    code: NetworkCode
    p_e: np.ndarray

    def __post_init__(self):
        self.y = np.atleast_2d(np.asarray(self.y, dtype=complex))
        self.h = np.atleast_2d(np.asarray(self.h, dtype=complex))
        self.p_e = np.atleast_2d(np.asarray(self.p_e, dtype=float))
        n = self.code.n
        for name in ("y", "h", "p_e"):
            arr = getattr(self, name)
            if arr.shape[1] != n:
                raise DimensionError(f"{name} has {arr.shape[1]} slots, code has n={n}")
        if not (self.y.shape == self.h.shape == self.p_e.shape):
            raise DimensionError(
                f"batch shapes differ: y{self.y.shape} h{self.h.shape} p_e{self.p_e.shape}"
            )
        if np.any(self.p_e < 0) or np.any(self.p_e > 0.5):
            raise ValueError("reliabilities must lie in [0, 0.5]")
        if not self.n0 > 0:
            raise ValueError("n0 must be positive")

    @property
    def batch(self) -> int:
        return self.y.shape[0]

    def channel_llr(self) -> np.ndarray:
        """Per-slot observation LLR ``4 Re{h* y} / N0``."""
        return 4.0 * np.real(np.conj(self.h) * self.y) / self.n0

    def without_reliability(self) -> "DetectorInput":
        return DetectorInput(self.y, self.h, self.n0, self.code, np.zeros_like(self.p_e))


@dataclass
class PosteriorMarginals:
    """Per-source posteriors, stored as LLRs ``log p(u_i=0|y) - log p(u_i=1|y)``."""

    llr: np.ndarray

    @property
    def p1(self) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(np.clip(self.llr, -700, 700)))

    @property
    def p0(self) -> np.ndarray:
        return 1.0 - self.p1

    @property
    def log_p1(self) -> np.ndarray:
        return -np.logaddexp(0.0, self.llr)

    @property
    def log_p0(self) -> np.ndarray:
        return -np.logaddexp(0.0, -self.llr)

    @property
    def hard(self) -> np.ndarray:
        # ties decide 0
        return (self.llr < 0).astype(np.uint8)

    @property
    def max_posterior(self) -> np.ndarray:
        return np.maximum(self.p0, self.p1)


def _fallible_mask(p_e: np.ndarray) -> np.ndarray:
    return np.any(p_e > 0, axis=0)


def message_scores(inp: DetectorInput) -> np.ndarray:
    """``log p(y | u)`` up to a per-round constant, shape ``(B, 2**k)``.

    Columns follow the lexicographic message order of
    :func:`gf2.message_array`.
    """
    code = inp.code
    k, n = code.k, code.n
    fallible = np.nonzero(_fallible_mask(inp.p_e))[0]
    f = fallible.size
    if k + f > MAX_HYPOTHESIS_BITS:
        raise ComplexityError(
            f"{k} sources + {f} fallible slots exceeds the {MAX_HYPOTHESIS_BITS}-bit enumeration guard"
        )
    B = inp.batch
    # -|y - h s|^2 / N0 = const + s * 2 Re{h* y} / N0
    half_llr = 0.5 * inp.channel_llr()

    e_pat = gf2.message_array(f)
    e_full = np.zeros((1 << f, n), dtype=np.uint8)
    e_full[:, fallible] = e_pat
    p = inp.p_e[:, fallible]
    with np.errstate(divide="ignore"):
        log_p = np.log(p)
    log_q = np.log1p(-p)
    # (B, 2^f) log prior of each error pattern
    e_prior = np.zeros((B, 1 << f))
    for t in range(f):
        e_prior += np.where(e_pat[None, :, t] == 1, log_p[:, t, None], log_q[:, t, None])

    msgs = gf2.message_array(k)
    cw = ((msgs.astype(np.int64) @ code.G.to_array().astype(np.int64)) & 1).astype(np.uint8)
    out = np.empty((B, 1 << k))
    ublock = max(1, _BLOCK_ELEMS // max(1, B * (1 << f)))
    for start in range(0, 1 << k, ublock):
        stop = min(start + ublock, 1 << k)
        c_hat = cw[start:stop, None, :] ^ e_full[None, :, :]
        s = 1.0 - 2.0 * c_hat.reshape(-1, n)
        ll = (half_llr @ s.T).reshape(B, stop - start, 1 << f)
        out[:, start:stop] = _logsumexp(ll + e_prior[:, None, :], axis=2)
    return out


def _marginals_from_scores(scores: np.ndarray, k: int) -> PosteriorMarginals:
    msgs = gf2.message_array(k)
    llr = np.empty((scores.shape[0], k))
    for i in range(k):
        one = msgs[:, i] == 1
        llr[:, i] = _logsumexp(scores[:, ~one], axis=1) - _logsumexp(scores[:, one], axis=1)
    return PosteriorMarginals(llr)


def map_detect(inp: DetectorInput) -> PosteriorMarginals:
    """Individually optimal per-source posteriors with relay reliabilities, uniform prior on u."""
    return _marginals_from_scores(message_scores(inp), inp.code.k)


def naive_detect(inp: DetectorInput) -> PosteriorMarginals:
    """MAP detection that assumes the relays never err."""
    return map_detect(inp.without_reliability())


def joint_map_detect(inp: DetectorInput) -> np.ndarray:
    """Jointly most probable message per round, shape ``(B, k)``.

    Ties go to the lexicographically first message.
    """
    scores = message_scores(inp)
    best = np.argmax(scores, axis=1)
    return gf2.message_array(inp.code.k)[best]
