"""Demodulate-and-forward round model over Rayleigh fading.

All per-round arrays carry a leading batch axis of independent trials:
messages are ``(B, k)`` and per-slot quantities are ``(B, n)``.  Sources
and transmitters are numbered from 1 in schedules (as printed in code
files) and from 0 everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import erfc

from .codes import require_full_rank
from .errors import DimensionError, ScheduleError
from .gf2 import Gf2Matrix


def qfunc(x):
    """Gaussian tail probability."""
    return 0.5 * erfc(np.asarray(x) / np.sqrt(2.0))


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True)
class OverhearLink:
    """Relay ``relay`` listening to slot ``slot`` to estimate ``source``."""

    relay: int
    source: int
    slot: int


@dataclass(frozen=True, eq=False)
class NetworkCode:
    G: Gf2Matrix
    v: tuple[int, ...]
    deps: tuple[frozenset[int], ...]
    direct_slots: tuple[tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return self.G.nrows

    @property
    def n(self) -> int:
        return self.G.ncols

    @property
    def transmitters(self) -> np.ndarray:
        return np.asarray(self.v, dtype=np.int64) - 1

    @property
    def fallible(self) -> tuple[int, ...]:
        """Slots whose symbol depends on at least one relay estimate."""
        return tuple(j for j, d in enumerate(self.deps) if d)

    def estimate_needs(self) -> dict[tuple[int, int], int]:
        """Map (relay, source) to the first slot in which the relay uses that estimate."""
        needs: dict[tuple[int, int], int] = {}
        for j, d in enumerate(self.deps):
            m = self.v[j] - 1
            for i in sorted(d):
                needs.setdefault((m, i), j)
        return needs

    def overhear_links(self, mrc: bool = False) -> tuple[OverhearLink, ...]:
        """Overhearing links a round needs, in a fixed order.

        Without MRC each estimate comes from the source's earliest direct
        slot; with MRC every direct slot preceding first use is combined.
        """
        links = []
        for (m, i), first_use in sorted(self.estimate_needs().items()):
            slots = [j for j in self.direct_slots[i] if j < first_use]
            if not mrc:
                slots = slots[:1]
            links.extend(OverhearLink(m, i, j) for j in slots)
        return tuple(links)

    def __repr__(self) -> str:
        return f"NetworkCode(k={self.k}, n={self.n}, v={list(self.v)})"


def validate(G: Gf2Matrix, v: Sequence[int]) -> NetworkCode:
    """Check that schedule ``v`` can realize ``G`` with demodulate-and-forward relays."""
    v = tuple(int(x) for x in v)
    k, n = G.shape
    if len(v) != n:
        raise DimensionError(f"schedule has {len(v)} entries but G has {n} columns")
    for j, m in enumerate(v):
        if not 1 <= m <= k:
            raise ScheduleError(f"slot {j + 1}: transmitter {m} outside 1..{k}", j + 1)
    require_full_rank(G)
    a = G.to_array()
    direct: list[list[int]] = [[] for _ in range(k)]
    deps = []
    for j in range(n):
        m = v[j] - 1
        col = a[:, j]
        need = frozenset(int(i) for i in np.nonzero(col)[0] if i != m)
        for i in sorted(need):
            if not direct[i]:
                raise ScheduleError(
                    f"slot {j + 1}: node {m + 1} must combine u_{i + 1} but no earlier "
                    f"slot carries u_{i + 1} uncoded from node {i + 1}",
                    j + 1,
                )
        deps.append(need)
        if col.sum() == 1 and col[m] == 1:
            direct[m].append(j)
    return NetworkCode(G, v, tuple(deps), tuple(tuple(d) for d in direct))


def modulate(c_hat) -> np.ndarray:
    """BPSK map 0 -> +1, 1 -> -1."""
    c_hat = np.asarray(c_hat)
    return 1.0 - 2.0 * c_hat.astype(float)


def encode(u: np.ndarray, G: Gf2Matrix) -> np.ndarray:
    """Batched ``uG`` over GF(2) for ``u`` of shape (B, k)."""
    u = np.asarray(u, dtype=np.int64)
    if u.shape[-1] != G.nrows:
        raise DimensionError(f"message length {u.shape[-1]} does not match {G.nrows} rows")
    return ((u @ G.to_array().astype(np.int64)) & 1).astype(np.uint8)


@dataclass
class ChannelRealization:
    """Fading and noise for a batch of rounds.

    ``overhear_gains``/``overhear_noise`` columns follow
    ``code.overhear_links(mrc)``.  Noise samples are already scaled to
    their link's noise variance.
    """

    dest_gains: np.ndarray
    dest_noise: np.ndarray
    overhear_gains: np.ndarray
    overhear_noise: np.ndarray
    n0: float
    n0_relay: float
    es: float = 1.0

    @property
    def batch(self) -> int:
        return self.dest_gains.shape[0]


def _cn(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    z = rng.standard_normal(shape + (2,))
    return np.sqrt(variance / 2.0) * (z[..., 0] + 1j * z[..., 1])


def draw_channel(
    rng: np.random.Generator,
    code: NetworkCode,
    batch: int,
    snr_db: float,
    relay_offset_db: float = 0.0,
    mrc: bool = False,
    es: float = 1.0,
) -> ChannelRealization:
    """Independent Rayleigh gains and AWGN for ``batch`` rounds.

    ``snr_db`` is the average received Es/N0 per symbol on destination links.
    Overhearing links use ``snr_db + relay_offset_db``.
    """
    n0 = es / float(db_to_linear(snr_db))
    n0_relay = es / float(db_to_linear(snr_db + relay_offset_db))
    nlinks = len(code.overhear_links(mrc))
    # draw order is part of the reproducibility contract
    h = _cn(rng, (batch, code.n), es)
    w = _cn(rng, (batch, code.n), n0)
    g = _cn(rng, (batch, nlinks), es)
    wr = _cn(rng, (batch, nlinks), n0_relay)
    return ChannelRealization(h, w, g, wr, n0, n0_relay, es)


@dataclass
class RelayRound:
    u: np.ndarray
    c: np.ndarray
    e: np.ndarray
    c_hat: np.ndarray
    s: np.ndarray
    p_e: np.ndarray


def odd_error_probability(probs: Sequence[np.ndarray]) -> np.ndarray | float:
    """Probability that an odd number of independent events occur."""
    prod = 1.0
    for p in probs:
        prod = prod * (1.0 - 2.0 * np.asarray(p, dtype=float))
    return 0.5 * (1.0 - prod)


def simulate_relays(
    code: NetworkCode,
    u: np.ndarray,
    ch: ChannelRealization,
    mrc: bool = False,
    genie: bool = False,
) -> RelayRound:
    """Run one round of relay estimation and re-encoding for each trial.

    Each relay hard-decides every source bit it must combine from its own
    overhearing link(s) and reports the conditional bit-error probability
    ``Q(sqrt(2 sum|g|^2 / N0_relay))``.  With ``genie`` the relays never err.
    """
    u = np.atleast_2d(np.asarray(u, dtype=np.uint8))
    B = u.shape[0]
    if u.shape[1] != code.k:
        raise DimensionError(f"messages have {u.shape[1]} bits, code has k={code.k}")
    if ch.batch != B:
        raise DimensionError(f"channel batch {ch.batch} does not match {B} messages")
    c = encode(u, code.G)
    e = np.zeros((B, code.n), dtype=np.uint8)
    p_e = np.zeros((B, code.n))
    if not genie:
        links = code.overhear_links(mrc)
        if ch.overhear_gains.shape != (B, len(links)):
            raise DimensionError(
                f"channel has overhearing gains of shape {ch.overhear_gains.shape}, "
                f"round needs {(B, len(links))}"
            )
        stat: dict[tuple[int, int], np.ndarray] = {}
        energy: dict[tuple[int, int], np.ndarray] = {}
        for col, link in enumerate(links):
            g = ch.overhear_gains[:, col]
            s = 1.0 - 2.0 * u[:, link.source]
            r = g * s + ch.overhear_noise[:, col]
            key = (link.relay, link.source)
            stat[key] = stat.get(key, 0.0) + np.real(np.conj(g) * r)
            energy[key] = energy.get(key, 0.0) + np.abs(g) ** 2
        err = {}
        prob = {}
        for key in code.estimate_needs():
            if key not in stat:
                raise DimensionError(f"no overhearing gain for relay {key[0] + 1}, source {key[1] + 1}")
            decided = (stat[key] < 0).astype(np.uint8)
            err[key] = decided ^ u[:, key[1]]
            prob[key] = qfunc(np.sqrt(2.0 * energy[key] / ch.n0_relay))
        for j, d in enumerate(code.deps):
            if not d:
                continue
            m = code.v[j] - 1
            keys = [(m, i) for i in sorted(d)]
            ej = np.zeros(B, dtype=np.uint8)
            for key in keys:
                ej ^= err[key]
            e[:, j] = ej
            p_e[:, j] = odd_error_probability([prob[key] for key in keys])
    c_hat = c ^ e
    return RelayRound(u=u, c=c, e=e, c_hat=c_hat, s=modulate(c_hat), p_e=p_e)


def transmit(rnd: RelayRound, ch: ChannelRealization) -> np.ndarray:
    """Destination observations ``y_j = h_j s_j + w_j``."""
    return ch.dest_gains * rnd.s + ch.dest_noise


__all__ = [
    "ChannelRealization",
    "NetworkCode",
    "OverhearLink",
    "RelayRound",
    "db_to_linear",
    "draw_channel",
    "encode",
    "modulate",
    "odd_error_probability",
    "qfunc",
    "simulate_relays",
    "transmit",
    "validate",
]
