"""Reversible glyph alphabet and font-free glyph outlines.

Every glyph has a partner that it turns into when rotated by 180 degrees
(6/9, b/q, d/p, m/w, n/u). Outlines live in the unit square with y pointing
down; the partner outlines are generated by rotating the base outlines about
(0.5, 0.5), so the pairing holds exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .geometry import fold_disparity, normalize

ALPHABET = ("6", "9", "b", "q", "d", "p", "m", "w", "n", "u")

_BASE_PAIRS = (("6", "9"), ("b", "q"), ("d", "p"), ("m", "w"), ("n", "u"))
PAIRS: dict[str, str] = {}
for _a, _b in _BASE_PAIRS:
    PAIRS[_a] = _b
    PAIRS[_b] = _a

Point = tuple[float, float]
Polyline = tuple[Point, ...]


class Orientation(str, enum.Enum):
    UPRIGHT = "UPRIGHT"
    INVERTED = "INVERTED"


@dataclass(frozen=True)
class PlacedSymbol:
    """A glyph on the floor of the room.

    ``glyph`` is the glyph whose outline is drawn, with its up direction
    pointing along ``rendered_up``. The figure reads ``glyph`` when
    ``orientation`` is UPRIGHT and its rotation partner when INVERTED.
    """

    glyph: str
    orientation: Orientation
    jitter: float
    position_angle: float
    radius: float
    rendered_up: float
    cone: str = "FRONT"

    def __post_init__(self):
        if self.glyph not in PAIRS:
            raise ValueError(f"unknown glyph {self.glyph!r}")

    @property
    def figure_reading(self) -> str:
        if self.orientation is Orientation.UPRIGHT:
            return self.glyph
        return rotation_pair(self.glyph)


def rotation_pair(glyph: str) -> str:
    try:
        return PAIRS[glyph]
    except KeyError:
        raise ValueError(f"unknown glyph {glyph!r}") from None


def pair_class(glyph: str) -> frozenset[str]:
    return frozenset((glyph, rotation_pair(glyph)))


def viewer_snap_reading(symbol: PlacedSymbol, heading: float | None = None) -> str:
    """What a viewer who never rotates reads: the drawn glyph, or its pair
    when the glyph's up direction is more than 90 degrees from image-up.
    ``heading`` is accepted for call-site symmetry and is not used."""
    if fold_disparity(symbol.rendered_up) <= 90.0:
        return symbol.glyph
    return rotation_pair(symbol.glyph)


def _arc(cx, cy, rx, ry, t0, t1, steps=16) -> list[Point]:
    pts = []
    for i in range(steps + 1):
        t = math.radians(t0 + (t1 - t0) * i / steps)
        pts.append((cx + rx * math.cos(t), cy + ry * math.sin(t)))
    return pts


def _base_outlines() -> dict[str, tuple[Polyline, ...]]:
    six_loop = _arc(0.5, 0.68, 0.22, 0.22, 0, 360, 32)
    six_stem = _arc(0.72, 0.68, 0.44, 0.58, -90, -180, 12)
    b_bowl = _arc(0.5, 0.68, 0.2, 0.22, 0, 360, 32)
    d_bowl = _arc(0.5, 0.68, 0.2, 0.22, 0, 360, 32)
    n_arch = _arc(0.5, 0.5, 0.22, 0.22, 180, 360, 16)
    m_arch1 = _arc(0.325, 0.5, 0.175, 0.22, 180, 360, 12)
    m_arch2 = _arc(0.675, 0.5, 0.175, 0.22, 180, 360, 12)
    return {
        "6": (tuple(six_stem), tuple(six_loop)),
        "b": (((0.3, 0.08), (0.3, 0.92)), tuple(b_bowl)),
        "d": (((0.7, 0.08), (0.7, 0.92)), tuple(d_bowl)),
        "n": (
            ((0.28, 0.28), (0.28, 0.78)),
            tuple(n_arch) + ((0.72, 0.78),),
        ),
        "m": (
            ((0.15, 0.28), (0.15, 0.78)),
            tuple(m_arch1) + ((0.5, 0.78),),
            tuple(m_arch2) + ((0.85, 0.78),),
        ),
    }


def _rotate_180(lines):
    return tuple(tuple((1.0 - x, 1.0 - y) for x, y in line) for line in lines)


def _build_outlines() -> dict[str, tuple[Polyline, ...]]:
    out = {}
    for glyph, lines in _base_outlines().items():
        lines = tuple(tuple((round(x, 12), round(y, 12)) for x, y in line) for line in lines)
        out[glyph] = lines
        out[PAIRS[glyph]] = _rotate_180(lines)
    return out


_OUTLINES = _build_outlines()


def glyph_outline(glyph: str) -> tuple[Polyline, ...]:
    """Stroke polylines for ``glyph`` in the unit square (y down)."""
    try:
        return _OUTLINES[glyph]
    except KeyError:
        raise ValueError(f"unknown glyph {glyph!r}") from None


def rendered_up_for(heading: float, orientation: Orientation, jitter: float) -> float:
    flip = 180.0 if orientation is Orientation.INVERTED else 0.0
    return normalize(heading + flip + jitter)
