import pytest
from hypothesis import given
from hypothesis import strategies as st

from vptbench.symbols import (
    ALPHABET,
    Orientation,
    PlacedSymbol,
    glyph_outline,
    pair_class,
    rotation_pair,
    viewer_snap_reading,
)


@pytest.mark.parametrize("g,partner", [("6", "9"), ("p", "d"), ("b", "q"), ("m", "w"), ("n", "u")])
def test_rotation_pair_examples(g, partner):
    assert rotation_pair(g) == partner
    assert rotation_pair(partner) == g


def test_pairing_is_perfect_matching():
    assert len(ALPHABET) == 10
    for g in ALPHABET:
        assert rotation_pair(g) != g
        assert rotation_pair(rotation_pair(g)) == g
    classes = {pair_class(g) for g in ALPHABET}
    assert len(classes) == 5


def test_no_case_collisions():
    assert len({g.upper() for g in ALPHABET}) == len(ALPHABET)


@pytest.mark.parametrize("bad", ["x", "6 ", "", "D"])
def test_unknown_glyph(bad):
    with pytest.raises(ValueError):
        rotation_pair(bad)
    with pytest.raises(ValueError):
        glyph_outline(bad)


def _sym(glyph, up):
    return PlacedSymbol(glyph, Orientation.UPRIGHT, 0.0, 0.0, 0.5, up)


@pytest.mark.parametrize(
    "glyph,up,expected",
    [("6", 0, "6"), ("6", 180, "9"), ("6", 90, "6"), ("6", 270, "6"), ("6", 90.01, "9"), ("p", 200, "d"), ("p", 355, "p")],
)
def test_viewer_snap_reading(glyph, up, expected):
    assert viewer_snap_reading(_sym(glyph, up)) == expected


def test_figure_reading_follows_orientation():
    assert PlacedSymbol("6", Orientation.UPRIGHT, 0, 0, 0.5, 0).figure_reading == "6"
    assert PlacedSymbol("6", Orientation.INVERTED, 0, 0, 0.5, 180).figure_reading == "9"


def _vertices(lines):
    return sorted((round(x, 9), round(y, 9)) for line in lines for x, y in line)


@pytest.mark.parametrize("g", ALPHABET)
def test_outline_pair_is_180_rotation(g):
    rotated = [[(1 - x, 1 - y) for x, y in line] for line in glyph_outline(g)]
    partner = glyph_outline(rotation_pair(g))
    a, b = _vertices(rotated), _vertices(partner)
    assert len(a) == len(b)
    for (x1, y1), (x2, y2) in zip(a, b):
        assert abs(x1 - x2) <= 1e-6 and abs(y1 - y2) <= 1e-6


@pytest.mark.parametrize("g", ALPHABET)
def test_outline_in_unit_square(g):
    lines = glyph_outline(g)
    assert lines
    for line in lines:
        assert len(line) >= 2
        for x, y in line:
            assert 0 <= x <= 1 and 0 <= y <= 1


def test_outlines_distinct_within_pairs():
    # a pair whose halves look identical would make the task unanswerable
    for g in ALPHABET:
        assert _vertices(glyph_outline(g)) != _vertices(glyph_outline(rotation_pair(g)))


def test_outline_deterministic():
    assert glyph_outline("m") == glyph_outline("m")


@given(st.sampled_from(ALPHABET), st.floats(min_value=0, max_value=360, exclude_max=True))
def test_snap_reading_in_pair_class(g, up):
    assert viewer_snap_reading(_sym(g, up)) in pair_class(g)
