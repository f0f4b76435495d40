"""Experiment configuration files.

INI-style sections with flat keys, for example::

    [scenario]
    name = net1_detectors

    [code]
    file = net1.txt

    [sweep]
    detectors = map genie naive
    snr_db = 0:25:2.5
    seed = 1

Exactly one code source is allowed in ``[code]``: ``file``, ``matrix``
(rows separated by ``;``, with ``schedule``), ``greedy = n k d`` or
``repetition = k repeats``.  ``puncture`` (0-based columns) and
``schedule`` may be combined with any source.  Relative paths are
resolved against the config file's directory.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import codes
from .codefile import read_code
from .errors import ComplexityError, ConfigError, ParseError
from .gf2 import Gf2Matrix, parse_matrix
from .mc import DETECTORS

CODE_SOURCES = ("file", "matrix", "greedy", "repetition")
_ALLOWED = {
    "scenario": {"name"},
    "code": set(CODE_SOURCES) | {"schedule", "puncture", "systematic"},
    "sweep": {
        "detectors", "snr_db", "min_errors", "max_trials", "seed", "relay_offset_db",
        "chunk_size", "workers", "iterations", "mrc", "clamp",
    },
    "output": {"dir"},
    "summary": {"diversity_window", "target_ber", "reference"},
}


@dataclass
class ExperimentConfig:
    name: str
    code_source: str
    G: Gf2Matrix
    v: tuple[int, ...]
    detectors: tuple[str, ...]
    snr_db: tuple[float, ...]
    min_errors: int = 100
    max_trials: int = 10**8
    seed: int = 0
    relay_offset_db: float = 0.0
    chunk_size: int = 1 << 14
    workers: int = 1
    iterations: int = 4
    mrc: bool = False
    clamp: float | None = None
    output_dir: Path = field(default_factory=lambda: Path("."))
    diversity_window: tuple[float, float] | None = None
    target_ber: float = 1e-3
    reference: str | None = None


def parse_snr_grid(text: str) -> tuple[float, ...]:
    """``start:stop:step`` (inclusive) or a list separated by spaces/commas."""
    text = text.strip()
    if not text:
        raise ConfigError("SNR grid is empty")
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ConfigError(f"bad SNR range {text!r}; expected start:stop:step with step > 0")
            start, stop, step = parts
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            grid = tuple(round(start + i * step, 10) for i in range(max(count, 0)))
        else:
            grid = tuple(float(p) for p in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"bad SNR grid {text!r}") from None
    if not grid:
        raise ConfigError("SNR grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("SNR grid must be strictly increasing")
    return grid


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{what}: expected integers, got {text!r}") from None


def _bool(text: str, what: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{what}: expected a boolean, got {text!r}")


def resolve_code(sec, base: Path) -> tuple[str, Gf2Matrix, tuple[int, ...]]:
    present = [s for s in CODE_SOURCES if s in sec]
    if len(present) != 1:
        raise ConfigError(f"[code] needs exactly one of {CODE_SOURCES}, found {present or 'none'}")
    source = present[0]
    v = None
    try:
        if source == "file":
            path = base / sec["file"]
            if not path.exists():
                raise ConfigError(f"code file {path} does not exist")
            G, v = read_code(path)
        elif source == "matrix":
            G = parse_matrix([r for r in sec["matrix"].split(";")])
            if "schedule" not in sec:
                raise ConfigError("[code] matrix needs a schedule")
        elif source == "greedy":
            n, k, d = _ints(sec["greedy"], "greedy")
            G = codes.greedy_construct(codes.CodeSpec(n, k, d))
            if _bool(sec.get("systematic", "true"), "systematic"):
                G = codes.systematic_form(G)
        else:
            k, repeats = _ints(sec["repetition"], "repetition")
            G, v = codes.repetition_code(k, repeats)
    except ParseError as exc:
        raise ConfigError(f"[code] {source}: {exc}") from None
    except ComplexityError:
        raise
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[code] {source}: {exc}") from None
    if "schedule" in sec:
        v = tuple(_ints(sec["schedule"], "schedule"))
    if v is None:
        v = codes.default_schedule(G.nrows, G.ncols)
    if "puncture" in sec:
        try:
            G, v = codes.puncture(G, v, _ints(sec["puncture"], "puncture"))
        except ValueError as exc:
            raise ConfigError(f"[code] puncture: {exc}") from None
    return source, G, tuple(v)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_parser(parser, path.parent)


def config_from_parser(parser: configparser.ConfigParser, base: Path) -> ExperimentConfig:
    for name in parser.sections():
        if name not in _ALLOWED:
            raise ConfigError(f"unknown section [{name}]")
        unknown = set(parser[name]) - _ALLOWED[name]
        if unknown:
            raise ConfigError(f"[{name}] unknown keys {sorted(unknown)}")
    for required in ("code", "sweep"):
        if required not in parser:
            raise ConfigError(f"missing [{required}] section")

    source, G, v = resolve_code(parser["code"], base)
    sw = parser["sweep"]
    detectors = tuple(sw.get("detectors", "map").replace(",", " ").split())
    if not detectors:
        raise ConfigError("[sweep] detectors is empty")
    for det in detectors:
        if det not in DETECTORS:
            raise ConfigError(f"[sweep] unknown detector {det!r}; choose from {DETECTORS}")
    if "snr_db" not in sw:
        raise ConfigError("[sweep] snr_db is required")

    def num(key, conv, default):
        if key not in sw:
            return default
        try:
            return conv(sw[key])
        except ValueError:
            raise ConfigError(f"[sweep] {key}: bad value {sw[key]!r}") from None

    cfg = ExperimentConfig(
        name=parser.get("scenario", "name", fallback="scenario"),
        code_source=source,
        G=G,
        v=v,
        detectors=detectors,
        snr_db=parse_snr_grid(sw["snr_db"]),
        min_errors=num("min_errors", int, 100),
        max_trials=num("max_trials", lambda s: int(float(s)), 10**8),
        seed=num("seed", int, 0),
        relay_offset_db=num("relay_offset_db", float, 0.0),
        chunk_size=num("chunk_size", int, 1 << 14),
        workers=num("workers", int, 1),
        iterations=num("iterations", int, 4),
        mrc=_bool(sw.get("mrc", "false"), "mrc"),
        clamp=num("clamp", float, None),
        output_dir=base / parser.get("output", "dir", fallback="."),
    )
    if cfg.min_errors < 1 or cfg.max_trials < 1 or cfg.chunk_size < 1 or cfg.workers < 1:
        raise ConfigError("[sweep] min_errors, max_trials, chunk_size and workers must be positive")
    if "summary" in parser:
        sm = parser["summary"]
        if "diversity_window" in sm:
            try:
                lo, hi = (float(x) for x in sm["diversity_window"].split())
            except ValueError:
                raise ConfigError("[summary] diversity_window needs two numbers") from None
            cfg.diversity_window = (lo, hi)
        if "target_ber" in sm:
            try:
                cfg.target_ber = float(sm["target_ber"])
            except ValueError:
                raise ConfigError("[summary] target_ber must be a number") from None
        ref = sm.get("reference")
        if ref is not None and ref not in detectors:
            raise ConfigError(f"[summary] reference {ref!r} is not among the detectors")
        cfg.reference = ref
    return cfg
