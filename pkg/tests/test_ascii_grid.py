from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vptbench.ascii_grid import AsciiParseError, parse_director_ascii, render_director_ascii
from vptbench.director import Cell, Grid
from vptbench.director_gen import generate_dataset

from helpers import grid_from

FIXTURE = Path(__file__).parent / "fixtures" / "reference_grid.txt"


def test_parse_reference_grid(library):
    grid = parse_director_ascii(FIXTURE.read_text(), library)
    assert grid.occluded_count == 6
    assert grid["A1"].occluded and grid["A1"].item.item_id == "cookie"
    assert grid["A1"].item.size_level == 1
    assert grid["D4"].item is None and not grid["D4"].occluded
    assert grid["A4"].occluded and grid["A4"].item is None
    assert grid["C3"].item.item_id == "blue_book"
    assert grid.occupied == 14


def test_reference_grid_round_trip(library):
    grid = parse_director_ascii(FIXTURE.read_text(), library)
    assert parse_director_ascii(render_director_ascii(grid), library) == grid


def test_render_layout(library):
    grid = grid_from(library, {"A1": "cookie", "B1": "blue_book_small"}, occluded=("A1",))
    text = render_director_ascii(grid)
    lines = text.splitlines()
    assert set(lines[0]) == {"="} and set(lines[-1]) == {"="}
    assert lines[1].startswith("| A1 ") and "| D1 " in lines[1]
    assert "[BLOCKED]" in lines[2]
    assert "B: blue,stackable," in text
    assert "S: size:0" in text
    assert "| Empty " in text
    assert len({len(l) for l in lines}) == 1


def test_render_without_attributes(library):
    grid = grid_from(library, {"A1": "cookie"})
    text = render_director_ascii(grid, attributes=False, sizes=False)
    assert "B:" not in text and "S:" not in text
    assert parse_director_ascii(text, library) == grid


def test_long_attribute_list_wraps(library):
    grid = grid_from(library, {"A1": "black_pot_large"})
    text = render_director_ascii(grid)
    assert "|    " in text  # continuation line
    assert parse_director_ascii(text, library) == grid


def test_round_trip_generated(library):
    trials = generate_dataset(1000, 3, 0.7, library=library)
    for t in trials:
        assert parse_director_ascii(render_director_ascii(t.grid), library) == t.grid


def test_missing_row_separator(library):
    lines = FIXTURE.read_text().splitlines()
    # drop the rule between rows 1 and 2
    idx = next(i for i, l in enumerate(lines) if l.strip().startswith("---"))
    broken = "\n".join(lines[:idx] + lines[idx + 1:])
    with pytest.raises(AsciiParseError, match="separator"):
        parse_director_ascii(broken, library)


def test_unknown_token(library):
    text = FIXTURE.read_text().replace("kitchen_knife", "kitchen_spoon")
    with pytest.raises(AsciiParseError, match="unknown item token 'kitchen_spoon'"):
        parse_director_ascii(text, library)


@pytest.mark.parametrize("tag", ["S: size:x", "S: size:7", "S:size:1"])
def test_bad_size_tag(library, tag):
    text = FIXTURE.read_text().replace("S: size:1          | S: size:1          | S: size:1", tag.ljust(18) + " | S: size:1          | S: size:1", 1)
    assert text != FIXTURE.read_text()
    with pytest.raises(AsciiParseError, match="size"):
        parse_director_ascii(text, library)


def test_missing_closing_rule(library):
    lines = FIXTURE.read_text().rstrip().splitlines()
    with pytest.raises(AsciiParseError):
        parse_director_ascii("\n".join(lines[:-1]), library)


def test_empty_document(library):
    with pytest.raises(AsciiParseError):
        parse_director_ascii("   \n", library)


def test_wrong_cell_count(library):
    text = FIXTURE.read_text().replace("| A3                 | B3", "| A3 B3", 1)
    with pytest.raises(AsciiParseError):
        parse_director_ascii(text, library)


@settings(max_examples=100)
@given(st.data())
def test_round_trip_arbitrary_grid(library, data):
    ids = sorted(library.items)
    cells = []
    for _ in range(16):
        item = data.draw(st.one_of(st.none(), st.sampled_from(ids)))
        cells.append(Cell(data.draw(st.booleans()), library[item] if item else None))
    grid = Grid(tuple(cells))
    text = render_director_ascii(grid)
    assert parse_director_ascii(text, library) == grid
    assert parse_director_ascii("\n".join("   " + l for l in text.splitlines()), library) == grid
