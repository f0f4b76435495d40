"""Command-line entry point: ``wncsim construct | analyze | simulate | compare``."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import codes, gf2
from .codefile import format_code, read_code
from .config import load_config
from .detect import MAX_HYPOTHESIS_BITS
from .errors import BracketError, ComplexityError, ConfigError, WncError
from .mc import BerCurve, SweepConfig, estimate_diversity, run_sweep, snr_at_ber
from .network import validate
from .sumprod import build_graph

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_GUARD = 3


def _fmt_fraction(r: Fraction) -> str:
    if r.denominator == 1:
        return str(r.numerator)
    return f"{r.numerator}/{r.denominator} ({float(r):.4g})"


def analysis_lines(G: gf2.Gf2Matrix, v) -> list[str]:
    k, n = G.shape
    rk = gf2.rank(G)
    lines = [f"k: {k}", f"n: {n}", f"rate: {_fmt_fraction(Fraction(k, n))}", f"rank: {rk}"]
    if rk == k:
        sv = codes.separation_vector(G)
        ndo = codes.network_diversity_order(sv)
        lines.append("separation vector: " + " ".join(map(str, sv)))
        lines.append(f"minimum distance: {min(sv)}")
        lines.append(f"network diversity order: {_fmt_fraction(ndo)}")
    else:
        lines.append("separation vector: undefined (rank-deficient)")
    try:
        code = validate(G, v)
    except WncError as exc:
        lines.append(f"schedule: invalid ({exc})")
        lines.append("tanner graph cycles: n/a")
    else:
        lines.append("schedule: valid " + " ".join(map(str, v)))
        fallible = " ".join(str(j + 1) for j in code.fallible) or "none"
        lines.append(f"fallible slots: {fallible}")
        lines.append(f"tanner graph cycles: {'yes' if build_graph(code).has_cycle else 'no'}")
    return lines


def cmd_construct(args) -> int:
    if args.source_file:
        G, v = read_code(args.source_file)
    elif args.repetition:
        if args.k is None:
            raise ConfigError("--repetition needs --k")
        G, v = codes.repetition_code(args.k, args.repeats)
    else:
        if None in (args.n, args.k, args.d):
            raise ConfigError("greedy construction needs --n, --k and --d")
        G = codes.greedy_construct(codes.CodeSpec(args.n, args.k, args.d))
        if not args.raw:
            G = codes.systematic_form(G)
        v = codes.default_schedule(G.nrows, G.ncols)
    if args.schedule:
        v = tuple(args.schedule)
    if args.puncture:
        G, v = codes.puncture(G, v, args.puncture)
    report = analysis_lines(G, v)
    text = format_code(G, v, comments=report)
    if args.output:
        Path(args.output).write_text(text, encoding="ascii")
        print(f"wrote {args.output}")
        print("\n".join(report))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_analyze(args) -> int:
    G, v = read_code(args.code_file)
    print("\n".join(analysis_lines(G, v)))
    return EXIT_OK


def _guard(cfg, code) -> None:
    for det in cfg.detectors:
        if det == "sumprod":
            continue
        # naive and genie enumerate messages only
        bits = code.k + (len(code.fallible) if det == "map" else 0)
        if bits > MAX_HYPOTHESIS_BITS:
            raise ComplexityError(
                f"detector {det}: {bits} enumerated bits exceeds guard {MAX_HYPOTHESIS_BITS}"
            )


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    try:
        code = validate(cfg.G, cfg.v)
    except WncError as exc:
        raise ConfigError(f"invalid network code: {exc}") from None
    _guard(cfg, code)
    workers = args.workers or cfg.workers
    out_dir = Path(args.output_dir) if args.output_dir else cfg.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    curves: dict[str, BerCurve] = {}
    for det in cfg.detectors:
        sweep = SweepConfig(
            code=code,
            detector=det,
            snr_db=cfg.snr_db,
            min_errors=cfg.min_errors,
            max_trials=cfg.max_trials,
            seed=cfg.seed,
            relay_offset_db=cfg.relay_offset_db,
            chunk_size=cfg.chunk_size,
            mrc=cfg.mrc,
            iterations=cfg.iterations,
            clamp=cfg.clamp,
        )

        def progress(p, det=det):
            if not args.quiet:
                bers = " ".join(f"{e / p.trials:.3e}" for e in p.errors)
                flag = " (trial cap)" if p.hit_max_trials else ""
                print(f"[{cfg.name}/{det}] {p.snr_db:6.2f} dB  trials={p.trials}  ber={bers}{flag}",
                      file=sys.stderr)

        curve = run_sweep(sweep, workers=workers, progress=progress)
        path = out_dir / f"{cfg.name}_{det}.csv"
        curve.to_csv(path)
        curves[det] = curve
        print(f"wrote {path}")

    print(summary_table(cfg, curves))
    return EXIT_OK


def summary_table(cfg, curves: dict[str, BerCurve]) -> str:
    top = max(cfg.snr_db)
    window = cfg.diversity_window or (top - 10.0, top)
    k = cfg.G.nrows
    header = ["detector"] + [f"slope u{i + 1}" for i in range(k)]
    ref = cfg.reference
    if ref:
        header += [f"gap u{i + 1} vs {ref} @{cfg.target_ber:g}" for i in range(k)]
    rows = []
    for det, curve in curves.items():
        try:
            slopes = [f"{s:.2f}" for s in estimate_diversity(curve, window)]
        except ValueError:
            slopes = ["n/a"] * k
        row = [det] + slopes
        if ref:
            for i in range(k):
                try:
                    a = snr_at_ber(curve.snr_db, curve.ber[:, i], cfg.target_ber)
                    b = snr_at_ber(curves[ref].snr_db, curves[ref].ber[:, i], cfg.target_ber)
                    row.append(f"{a - b:+.2f} dB")
                except BracketError:
                    row.append("unbracketed")
        rows.append(row)
    widths = [max(len(r[c]) for r in [header] + rows) for c in range(len(header))]
    lines = [f"diversity window: {window[0]:g}..{window[1]:g} dB"]
    for r in [header] + rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)))
    return "\n".join(lines)


def cmd_compare(args) -> int:
    a = BerCurve.from_csv(args.curve_a)
    b = BerCurve.from_csv(args.curve_b)
    if a.k != b.k:
        raise ConfigError(f"curves cover different source sets ({a.k} vs {b.k} sources)")
    print(f"gap = SNR({args.curve_a}) - SNR({args.curve_b}) at BER {args.target_ber:g}")
    failed = False
    for i in range(a.k):
        try:
            sa = snr_at_ber(a.snr_db, a.ber[:, i], args.target_ber)
            sb = snr_at_ber(b.snr_db, b.ber[:, i], args.target_ber)
        except BracketError as exc:
            print(f"u{i + 1}: unbracketed: {exc}")
            failed = True
            continue
        print(f"u{i + 1}: {sa - sb:+.3f} dB")
    return EXIT_RUNTIME if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wncsim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a network code file")
    c.add_argument("--n", type=int)
    c.add_argument("--k", type=int)
    c.add_argument("--d", type=int)
    c.add_argument("--repetition", action="store_true", help="block-repeated identity code")
    c.add_argument("--repeats", type=int, default=2)
    c.add_argument("--from", dest="source_file", help="start from an existing code file")
    c.add_argument("--puncture", type=int, nargs="+", metavar="COL", help="0-based columns to drop")
    c.add_argument("--schedule", type=int, nargs="+", metavar="NODE", help="override the transmit schedule")
    c.add_argument("--raw", action="store_true", help="keep the greedy basis instead of systematic form")
    c.add_argument("-o", "--output", help="write the code file here (default: stdout)")
    c.set_defaults(func=cmd_construct)

    a = sub.add_parser("analyze", help="report code parameters and separation vector")
    a.add_argument("code_file")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="run the Monte Carlo sweeps of a config file")
    s.add_argument("config")
    s.add_argument("--workers", type=int, help="override [sweep] workers")
    s.add_argument("--output-dir", help="override [output] dir")
    s.add_argument("-q", "--quiet", action="store_true")
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("compare", help="per-source SNR gap between two BER CSVs")
    m.add_argument("curve_a")
    m.add_argument("curve_b")
    m.add_argument("--target-ber", type=float, required=True)
    m.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ComplexityError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (WncError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
