"""Plain-text network code files.

Layout (blank lines and ``#`` comments are ignored)::

    k n
    <k rows of n space-separated 0/1 entries>
    <n schedule entries, transmitting node per slot, 1-based>
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from .errors import ParseError
from .gf2 import Gf2Matrix, parse_matrix


def format_code(G: Gf2Matrix, v: Sequence[int], comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"{G.nrows} {G.ncols}")
    lines.extend(" ".join(str(b) for b in row) for row in G.to_lists())
    lines.append(" ".join(str(int(x)) for x in v))
    return "\n".join(lines) + "\n"


def write_code(path: str | Path, G: Gf2Matrix, v: Sequence[int], comments: Sequence[str] = ()) -> None:
    Path(path).write_text(format_code(G, v, comments), encoding="ascii")


def parse_code(text: str) -> tuple[Gf2Matrix, tuple[int, ...]]:
    content = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            content.append((lineno, line))
    if not content:
        raise ParseError("empty code file", 1)

    lineno, header = content[0]
    parts = header.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise ParseError(f"expected header 'k n', got {header!r}", lineno)
    k, n = int(parts[0]), int(parts[1])
    if k < 1 or n < 1:
        raise ParseError("k and n must be positive", lineno)
    if len(content) != k + 2:
        raise ParseError(
            f"expected {k} matrix rows and one schedule line after the header, "
            f"found {len(content) - 1} lines",
            content[-1][0],
        )

    rows = content[1 : k + 1]
    for r, (ln, line) in enumerate(rows, start=1):
        entries = line.split()
        if len(entries) != n:
            raise ParseError(f"matrix row {r} has {len(entries)} entries, expected {n}", ln)
        if any(e not in ("0", "1") for e in entries):
            raise ParseError(f"matrix row {r} has entries other than 0/1", ln)
    G = parse_matrix([line for _, line in rows], first_line=rows[0][0])

    ln, sched = content[k + 1]
    entries = sched.split()
    if len(entries) != n:
        raise ParseError(f"schedule has {len(entries)} entries, expected {n}", ln)
    try:
        v = tuple(int(e) for e in entries)
    except ValueError:
        raise ParseError(f"schedule entries must be integers: {sched!r}", ln) from None
    return G, v


def read_code(path: str | Path) -> tuple[Gf2Matrix, tuple[int, ...]]:
    try:
        text = Path(path).read_text(encoding="ascii")
    except OSError as exc:
        raise ParseError(f"cannot read code file {path}: {exc.strerror}") from None
    try:
        return parse_code(text)
    except ParseError as exc:
        err = ParseError(f"{path}: {exc}")
        err.line = exc.line
        raise err from None
