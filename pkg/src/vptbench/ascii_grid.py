"""Plain-text rendering of Director grids and the matching parser.

Layout (column width ``W`` grows to fit the longest line, minimum 18)::

    =====================================================================================
    | A1                 | B1                 | C1                 | D1                 |
    | [BLOCKED]          | blue_book_small    | blue_book_small    | Empty              |
    | cookie             | B: blue,stackable, | B: blue,stackable, |                    |
    |                    |    book            |    book            |                    |
    | S: size:1          | S: size:0          | S: size:0          |                    |
    -------------------------------------------------------------------------------------
    ... rows 2-4 ...
    =====================================================================================

Per cell: the coordinate, an optional ``[BLOCKED]`` marker, the item id or
``Empty``, an optional attribute line ``B: ...`` (continuation lines are
indented three spaces) and an optional ``S: size:<k>`` line.
"""

from __future__ import annotations

import re

from .director import COLUMNS, Cell, Grid, Library, cell_ref

MIN_WIDTH = 18
_SIZE = re.compile(r"^S: size:(\S*)$")


class AsciiParseError(ValueError):
    pass


def _attribute_lines(terms: list[str], width: int) -> list[str]:
    lines, line = [], "B: "
    for i, term in enumerate(terms):
        piece = term + ("," if i < len(terms) - 1 else "")
        if len(line) + len(piece) > width and line.strip() not in ("B:", ""):
            lines.append(line)
            line = "   "
        line += piece
    lines.append(line)
    return lines


def _cell_lines(col: int, row: int, cell: Cell, width: int, attributes: bool, sizes: bool) -> list[str]:
    lines = [cell_ref(col, row)]
    if cell.occluded:
        lines.append("[BLOCKED]")
    if cell.item is None:
        lines.append("Empty")
        return lines
    lines.append(cell.item.item_id)
    if attributes:
        lines.extend(_attribute_lines(cell.item.attribute_terms(), width))
    if sizes:
        lines.append(f"S: size:{cell.item.size_level}")
    return lines


def render_director_ascii(grid: Grid, attributes: bool = True, sizes: bool = True) -> str:
    width = MIN_WIDTH
    for _, _, cell in grid.positions():
        if cell.item is not None:
            width = max(width, len(cell.item.item_id))
    total = 4 * (width + 3) + 1
    out = ["=" * total]
    for row in range(4):
        blocks = [_cell_lines(col, row, grid.at(col, row), width, attributes, sizes) for col in range(4)]
        height = max(len(b) for b in blocks)
        for i in range(height):
            parts = [(b[i] if i < len(b) else "").ljust(width) for b in blocks]
            out.append("".join(f"| {p} " for p in parts) + "|")
        out.append(("-" if row < 3 else "=") * total)
    return "\n".join(out) + "\n"


def _split_row(line: str, lineno: int) -> list[str]:
    if not (line.startswith("|") and line.endswith("|")):
        raise AsciiParseError(f"line {lineno}: expected a '|'-delimited row, got {line!r}")
    cells = [c.strip() for c in line[1:-1].split("|")]
    if len(cells) != 4:
        raise AsciiParseError(f"line {lineno}: expected 4 cells, found {len(cells)}")
    return cells


def _is_rule(line: str, ch: str) -> bool:
    return len(line) >= 3 and set(line) == {ch}


def _parse_cell(ref: str, content: list[str], library: Library) -> Cell:
    lines = [c for c in content if c]
    occluded = False
    if lines and lines[0] == "[BLOCKED]":
        occluded = True
        lines = lines[1:]
    if not lines:
        raise AsciiParseError(f"cell {ref}: missing item token or 'Empty'")
    token, rest = lines[0], lines[1:]
    if token == "Empty":
        if rest:
            raise AsciiParseError(f"cell {ref}: unexpected lines after Empty: {rest}")
        return Cell(occluded, None)
    if token not in library:
        raise AsciiParseError(f"cell {ref}: unknown item token {token!r}")
    item = library[token]
    size_seen = False
    in_attrs = False
    for line in rest:
        if line.startswith("S:"):
            m = _SIZE.match(line)
            if not m or not m.group(1).isdigit():
                raise AsciiParseError(f"cell {ref}: bad size tag {line!r}")
            if int(m.group(1)) != item.size_level:
                raise AsciiParseError(
                    f"cell {ref}: size tag {m.group(1)} disagrees with {token} (size {item.size_level})"
                )
            if size_seen:
                raise AsciiParseError(f"cell {ref}: repeated size tag")
            size_seen, in_attrs = True, False
        elif line.startswith("B:"):
            if size_seen:
                raise AsciiParseError(f"cell {ref}: attribute line after size tag")
            in_attrs = True
        elif not in_attrs:
            raise AsciiParseError(f"cell {ref}: unexpected line {line!r}")
    return Cell(occluded, item)


def parse_director_ascii(text: str, library: Library) -> Grid:
    """Inverse of :func:`render_director_ascii`; tolerant of indentation and
    rule length, strict about structure."""
    raw = text.splitlines()
    numbered = [(i + 1, line.strip()) for i, line in enumerate(raw)]
    numbered = [(n, l) for n, l in numbered if l]
    if not numbered:
        raise AsciiParseError("empty document")
    lineno, first = numbered[0]
    if not _is_rule(first, "="):
        raise AsciiParseError(f"line {lineno}: expected '=' rule at top of grid")

    cells: dict[str, Cell] = {}
    row = 0
    pos = 1
    closed = False
    while pos < len(numbered):
        lineno, line = numbered[pos]
        if row >= 4:
            raise AsciiParseError(f"line {lineno}: content after the last row")
        header = _split_row(line, lineno)
        expected = [f"{c}{row + 1}" for c in COLUMNS]
        if header != expected:
            raise AsciiParseError(f"line {lineno}: expected header {' '.join(expected)}, got {header}")
        content: list[list[str]] = [[] for _ in range(4)]
        pos += 1
        while True:
            if pos >= len(numbered):
                raise AsciiParseError(f"line {lineno}: row {row + 1} is not terminated by a rule")
            lineno, line = numbered[pos]
            if _is_rule(line, "-") or _is_rule(line, "="):
                break
            parts = _split_row(line, lineno)
            if row < 3 and parts == [f"{c}{row + 2}" for c in COLUMNS]:
                raise AsciiParseError(
                    f"line {lineno}: missing row separator before row {row + 2} header"
                )
            for col, part in enumerate(parts):
                content[col].append(part)
            pos += 1
        for col in range(4):
            ref = cell_ref(col, row)
            cells[ref] = _parse_cell(ref, content[col], library)
        row += 1
        pos += 1
        if _is_rule(line, "="):
            closed = True
            if row != 4:
                raise AsciiParseError(f"line {lineno}: grid closed after {row} rows")
            if pos < len(numbered):
                raise AsciiParseError(f"line {numbered[pos][0]}: content after closing rule")
            break
        if row == 4:
            raise AsciiParseError(f"line {lineno}: expected '=' rule after row 4")
    if not closed:
        raise AsciiParseError("grid is missing its closing '=' rule")
    return Grid(tuple(cells[cell_ref(c, r)] for r in range(4) for c in range(4)))
