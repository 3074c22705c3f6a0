"""Planar angle utilities for the rotating-figure scenes.

Convention: 0 degrees points to the top of the image, angles grow clockwise,
so 90 is image-right. Headings and symbol position angles share this frame.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

FOV_HALF_ANGLE = 30.0
LATERAL_OFFSET = (10.0, 28.0)
RADIUS_RANGE = (0.35, 0.75)
CORNER_TOLERANCE = 10.0
CORNERS = (45.0, 135.0, 225.0, 315.0)

# slack for float noise on cone edges
_EPS = 1e-9


class Side(str, enum.Enum):
    LEFT = "LEFT"
    RIGHT = "RIGHT"


class Placement(str, enum.Enum):
    FRONT = "FRONT"
    BEHIND = "BEHIND"


class ConeMode(str, enum.Enum):
    FRONT = "FRONT"
    BEHIND = "BEHIND"
    FRONT_LEFT = "FRONT_LEFT"
    FRONT_RIGHT = "FRONT_RIGHT"


class Wall(str, enum.Enum):
    TOP = "TOP"
    RIGHT = "RIGHT"
    BOTTOM = "BOTTOM"
    LEFT = "LEFT"


@dataclass(frozen=True)
class DisparityBin:
    index: int
    lo: float
    hi: float

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2

    @property
    def label(self) -> str:
        return f"{self.lo:g}-{self.hi:g}"


BINS = tuple(DisparityBin(i + 1, 45.0 * i, 45.0 * (i + 1)) for i in range(4))


@dataclass(frozen=True)
class WallSide:
    side: Wall
    corner_flag: bool


def normalize(degrees: float) -> float:
    """Map any finite angle into [0, 360)."""
    if not math.isfinite(degrees):
        raise ValueError(f"angle must be finite, got {degrees!r}")
    out = math.fmod(degrees, 360.0)
    if out < 0:
        out += 360.0
    # fmod of tiny negatives lands on 360.0 after the shift
    if out >= 360.0:
        out = 0.0
    return out


def fold_disparity(orientation: float) -> float:
    """Angular disparity between viewer and figure, folded into [0, 180]."""
    theta = normalize(orientation)
    return theta if theta <= 180.0 else 360.0 - theta


def bin_disparity(disparity: float) -> DisparityBin:
    if not 0.0 <= disparity <= 180.0:
        raise ValueError(f"disparity must lie in [0, 180], got {disparity}")
    return BINS[min(int(disparity // 45.0), 3)]


def signed_offset(target: float, reference: float) -> float:
    """Wrap ``target - reference`` into (-180, 180]; positive is clockwise."""
    delta = normalize(target - reference)
    return delta - 360.0 if delta > 180.0 else delta


def side_of_figure(symbol_angle: float, heading: float) -> Side:
    offset = signed_offset(symbol_angle, heading)
    if offset == 0.0 or offset == 180.0:
        raise ValueError(
            f"symbol at {symbol_angle} is on the line of sight of heading {heading}"
        )
    return Side.RIGHT if offset > 0 else Side.LEFT


def front_or_behind(
    symbol_angle: float, heading: float, fov_half_angle: float = FOV_HALF_ANGLE
) -> Placement:
    if abs(signed_offset(symbol_angle, heading)) <= fov_half_angle + _EPS:
        return Placement.FRONT
    if abs(signed_offset(symbol_angle, heading + 180.0)) <= fov_half_angle + _EPS:
        return Placement.BEHIND
    raise ValueError(
        f"symbol at {symbol_angle} lies outside both cones of heading {heading}"
    )


def in_view_cone(symbol_angle: float, heading: float, fov_half_angle: float = FOV_HALF_ANGLE) -> bool:
    return abs(signed_offset(symbol_angle, heading)) <= fov_half_angle + _EPS


def is_corner(heading: float) -> bool:
    """True when the heading lies in [corner - 10, corner + 10) of an image diagonal."""
    h = normalize(heading)
    for corner in CORNERS:
        if -CORNER_TOLERANCE <= h - corner < CORNER_TOLERANCE:
            return True
    return False


def facing_wall(heading: float) -> WallSide:
    h = normalize(heading)
    if h >= 315.0 or h < 45.0:
        side = Wall.TOP
    elif h < 135.0:
        side = Wall.RIGHT
    elif h < 225.0:
        side = Wall.BOTTOM
    else:
        side = Wall.LEFT
    return WallSide(side, is_corner(h))


def polar_to_xy(angle: float, radius: float) -> tuple[float, float]:
    """Image-frame offset (x right, y down) of a point at ``angle``."""
    rad = math.radians(angle)
    return radius * math.sin(rad), -radius * math.cos(rad)


def sample_cone_position(
    heading: float,
    mode: ConeMode | str,
    rng: np.random.Generator,
    fov_half_angle: float = FOV_HALF_ANGLE,
    lateral_offset: tuple[float, float] = LATERAL_OFFSET,
    radius_range: tuple[float, float] = RADIUS_RANGE,
) -> tuple[float, float]:
    """Draw a (position angle, radius) inside the cone named by ``mode``.

    Offsets are rounded to 0.01 degree and radii to 1e-4 so serialized
    trials stay compact.
    """
    mode = ConeMode(mode)
    if mode is ConeMode.FRONT or mode is ConeMode.BEHIND:
        offset = rng.uniform(-fov_half_angle, fov_half_angle)
    else:
        offset = rng.uniform(*lateral_offset)
        if mode is ConeMode.FRONT_LEFT:
            offset = -offset
    offset = round(float(offset), 2)
    base = heading + 180.0 if mode is ConeMode.BEHIND else heading
    radius = round(float(rng.uniform(*radius_range)), 4)
    return normalize(base + offset), radius
