"""Monte Carlo BER sweeps with counter-based, worker-invariant seeding.

Trials at one SNR point are grouped into fixed-size chunks.  Chunk ``c``
of SNR point ``s`` draws from a Philox stream keyed by
``SeedSequence([seed, s, c])``, so its counts depend only on
``(seed, s, c)`` and the chunk size, never on how chunks are spread over
workers.  Chunks are reduced in index order and the stopping rule is
checked after each one; chunks computed speculatively past the stopping
point are discarded.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .detect import DetectorInput, PosteriorMarginals, map_detect, naive_detect
from .errors import BracketError, ConfigError
from .network import NetworkCode, db_to_linear, draw_channel, simulate_relays, transmit
from .sumprod import DEFAULT_ITERATIONS, build_graph, sumprod_detect

DETECTORS = ("map", "naive", "genie", "sumprod")
CSV_COLUMNS = ("snr_db", "source", "trials", "errors", "ber", "ci95")
Z95 = 1.959963984540054


@dataclass(frozen=True)
class SweepConfig:
    code: NetworkCode
    detector: str
    snr_db: tuple[float, ...]
    min_errors: int = 100
    max_trials: int = 10**8
    seed: int = 0
    relay_offset_db: float = 0.0
    chunk_size: int = 1 << 14
    mrc: bool = False
    iterations: int = DEFAULT_ITERATIONS
    clamp: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if self.detector not in DETECTORS:
            raise ConfigError(f"unknown detector {self.detector!r}; choose from {DETECTORS}")
        if not self.snr_db:
            raise ConfigError("SNR grid is empty")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ConfigError("SNR grid must be strictly increasing")
        if self.min_errors < 1:
            raise ConfigError("min_errors must be at least 1")
        if self.max_trials < 1 or self.chunk_size < 1:
            raise ConfigError("max_trials and chunk_size must be positive")
        if self.iterations < 1:
            raise ConfigError("iterations must be at least 1")


@dataclass
class PointResult:
    snr_db: float
    trials: int
    errors: np.ndarray
    hit_max_trials: bool = False


@dataclass
class BerCurve:
    """Per-SNR, per-source error counts.  Sources are numbered from 1."""

    snr_db: np.ndarray
    trials: np.ndarray
    errors: np.ndarray
    hit_max_trials: np.ndarray = field(default=None)
    label: str = ""

    def __post_init__(self):
        self.snr_db = np.asarray(self.snr_db, dtype=float)
        self.trials = np.asarray(self.trials, dtype=np.int64)
        self.errors = np.asarray(self.errors, dtype=np.int64)
        if self.hit_max_trials is None:
            self.hit_max_trials = np.zeros(self.snr_db.size, dtype=bool)
        if np.any(self.errors > self.trials[:, None]):
            raise ValueError("error count exceeds trial count")

    @property
    def k(self) -> int:
        return self.errors.shape[1]

    @property
    def ber(self) -> np.ndarray:
        return self.errors / self.trials[:, None]

    @property
    def ci95(self) -> np.ndarray:
        p = self.ber
        return Z95 * np.sqrt(p * (1.0 - p) / self.trials[:, None])

    def rows(self):
        ber, ci = self.ber, self.ci95
        for s in range(self.snr_db.size):
            for i in range(self.k):
                yield (self.snr_db[s], i + 1, int(self.trials[s]), int(self.errors[s, i]), ber[s, i], ci[s, i])

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for snr, src, n, e, b, c in self.rows():
            w.writerow((repr(float(snr)), src, n, e, f"{b:.10e}", f"{c:.10e}"))
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="ascii")
        return text

    @classmethod
    def from_csv(cls, source: str | Path, label: str = "") -> "BerCurve":
        text = Path(source).read_text(encoding="ascii")
        reader = csv.DictReader(io.StringIO(text))
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{source}: missing CSV columns {sorted(missing)}")
        table: dict[float, dict[int, tuple[int, int]]] = {}
        for row in reader:
            table.setdefault(float(row["snr_db"]), {})[int(row["source"])] = (
                int(row["trials"]),
                int(row["errors"]),
            )
        snrs = sorted(table)
        sources = sorted(table[snrs[0]])
        if any(sorted(table[s]) != sources for s in snrs):
            raise ValueError(f"{source}: every SNR point must list the same sources")
        if sources != list(range(1, len(sources) + 1)):
            raise ValueError(f"{source}: sources must be numbered 1..k")
        trials = [table[s][sources[0]][0] for s in snrs]
        errors = [[table[s][i][1] for i in sources] for s in snrs]
        return cls(np.array(snrs), np.array(trials), np.array(errors), label=label or str(source))


def chunk_rng(seed: int, snr_index: int, chunk_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, snr_index, chunk_index])))


def detect_batch(cfg: SweepConfig, inp: DetectorInput, graph=None) -> PosteriorMarginals:
    if cfg.detector == "naive":
        return naive_detect(inp)
    if cfg.detector == "sumprod":
        return sumprod_detect(inp, max_iters=cfg.iterations, clamp=cfg.clamp, graph=graph)
    return map_detect(inp)


def run_chunk(cfg: SweepConfig, snr_index: int, chunk_index: int, size: int) -> np.ndarray:
    """Per-source bit-error counts of one chunk of ``size`` trials."""
    code = cfg.code
    rng = chunk_rng(cfg.seed, snr_index, chunk_index)
    u = rng.integers(0, 2, size=(size, code.k), dtype=np.uint8)
    ch = draw_channel(rng, code, size, cfg.snr_db[snr_index], cfg.relay_offset_db, cfg.mrc)
    rnd = simulate_relays(code, u, ch, mrc=cfg.mrc, genie=cfg.detector == "genie")
    y = transmit(rnd, ch)
    inp = DetectorInput(y, ch.dest_gains, ch.n0, code, rnd.p_e)
    graph = build_graph(code) if cfg.detector == "sumprod" else None
    post = detect_batch(cfg, inp, graph)
    return np.sum(post.hard != u, axis=0).astype(np.int64)


def _chunk_job(args):
    cfg, s, c, size = args
    return run_chunk(cfg, s, c, size)


def run_point(cfg: SweepConfig, snr_index: int, workers: int = 1, pool=None) -> PointResult:
    """Run chunks at one SNR point until every source has ``min_errors`` or the trial cap is hit."""
    k = cfg.code.k
    errors = np.zeros(k, dtype=np.int64)
    trials = 0
    chunk = 0
    while True:
        sizes = []
        planned = trials
        for _ in range(max(1, workers)):
            if planned >= cfg.max_trials:
                break
            size = min(cfg.chunk_size, cfg.max_trials - planned)
            sizes.append(size)
            planned += size
        jobs = [(cfg, snr_index, chunk + t, size) for t, size in enumerate(sizes)]
        if pool is None:
            results = map(_chunk_job, jobs)
        else:
            results = pool.map(_chunk_job, jobs)
        for size, counts in zip(sizes, results):
            errors += counts
            trials += size
            chunk += 1
            if np.all(errors >= cfg.min_errors):
                return PointResult(cfg.snr_db[snr_index], trials, errors)
            if trials >= cfg.max_trials:
                return PointResult(cfg.snr_db[snr_index], trials, errors, hit_max_trials=True)


def run_sweep(cfg: SweepConfig, workers: int = 1, progress=None) -> BerCurve:
    """Simulate every SNR point of ``cfg``; ``progress`` is called with each finished point."""
    points = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for s in range(len(cfg.snr_db)):
                points.append(run_point(cfg, s, workers, pool))
                if progress:
                    progress(points[-1])
    else:
        for s in range(len(cfg.snr_db)):
            points.append(run_point(cfg, s))
            if progress:
                progress(points[-1])
    return BerCurve(
        snr_db=[p.snr_db for p in points],
        trials=[p.trials for p in points],
        errors=[p.errors for p in points],
        hit_max_trials=np.array([p.hit_max_trials for p in points]),
        label=cfg.detector,
    )


def estimate_diversity(curve: BerCurve, window: tuple[float, float] | None = None) -> list[float]:
    """Negated least-squares slope of log10(BER) against SNR_dB / 10, per source."""
    lo, hi = window if window is not None else (-math.inf, math.inf)
    sel = (curve.snr_db >= lo) & (curve.snr_db <= hi)
    slopes = []
    for i in range(curve.k):
        ok = sel & (curve.errors[:, i] > 0)
        if ok.sum() < 2:
            raise ValueError(f"source {i + 1}: need at least 2 points with nonzero BER in window")
        x = curve.snr_db[ok] / 10.0
        yv = np.log10(curve.ber[ok, i])
        slope = np.polyfit(x, yv, 1)[0]
        slopes.append(float(-slope))
    return slopes


def snr_at_ber(snr_db: Sequence[float], ber: Sequence[float], target: float) -> float:
    """SNR where the log-linear interpolation of a BER curve first reaches ``target``."""
    snr_db = np.asarray(snr_db, dtype=float)
    ber = np.asarray(ber, dtype=float)
    for a in range(snr_db.size - 1):
        b0, b1 = ber[a], ber[a + 1]
        if b0 >= target >= b1 and b0 > 0 and b1 > 0:
            if b0 == b1:
                return float(snr_db[a])
            t = (math.log10(b0) - math.log10(target)) / (math.log10(b0) - math.log10(b1))
            return float(snr_db[a] + t * (snr_db[a + 1] - snr_db[a]))
    raise BracketError(f"target BER {target:g} is not bracketed by the curve")


def snr_gap(curve_a: BerCurve, curve_b: BerCurve, target_ber: float) -> list[float]:
    """Per-source SNR that ``curve_a`` needs beyond ``curve_b`` to reach ``target_ber`` (dB)."""
    if curve_a.k != curve_b.k:
        raise ValueError(f"curves have different source counts ({curve_a.k} vs {curve_b.k})")
    gaps = []
    for i in range(curve_a.k):
        try:
            sa = snr_at_ber(curve_a.snr_db, curve_a.ber[:, i], target_ber)
            sb = snr_at_ber(curve_b.snr_db, curve_b.ber[:, i], target_ber)
        except BracketError as exc:
            raise BracketError(f"source {i + 1}: {exc}") from None
        gaps.append(sa - sb)
    return gaps


def mrc_rayleigh_ber(snr_db, branches: int) -> np.ndarray:
    """BPSK BER with ``branches``-fold MRC over i.i.d. Rayleigh fading, average Es/N0 per branch."""
    g = db_to_linear(snr_db)
    mu = np.sqrt(g / (1.0 + g))
    total = 0.0
    for l in range(branches):
        total = total + math.comb(branches - 1 + l, l) * ((1.0 + mu) / 2.0) ** l
    return ((1.0 - mu) / 2.0) ** branches * total
