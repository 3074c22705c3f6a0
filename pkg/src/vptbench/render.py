"""Raster stimuli for both tasks (Pillow, no fonts, no anti-aliasing).

Identical inputs give identical PNG bytes for a given Pillow version.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

from PIL import Image, ImageDraw

from .director import COLUMNS, DirectorTrial, Grid, Pattern
from .geometry import polar_to_xy
from .rft import RftTrial
from .symbols import glyph_outline

MIN_CANVAS = 256
RFT_CANVAS = (1024, 1024)
DIRECTOR_CANVAS = (1200, 900)

WALL_RGB = {
    "RED": (205, 30, 30),
    "GREEN": (30, 150, 50),
    "BLUE": (35, 70, 205),
    "BLACK": (15, 15, 15),
}
ITEM_RGB = {
    "blue": (40, 90, 200),
    "red": (200, 40, 40),
    "green": (40, 160, 60),
    "yellow": (235, 200, 30),
    "black": (30, 30, 30),
    "white": (250, 250, 250),
    "brown": (140, 90, 40),
    "grey": (150, 150, 150),
}
FLOOR = (245, 244, 238)
INK = (0, 0, 0)
FIGURE_BODY = (95, 95, 110)
ARROW = (235, 120, 0)
OCCLUDED_BACKING = (60, 60, 60)
OPEN_BACKING = (232, 232, 232)
SIZE_SCALE = {0: 0.6, 1: 0.8, 2: 1.0}

# fractions of the room half-width
WALL_FRACTION = 0.04
GLYPH_BOX = 0.16
BODY_RADIUS = 0.07
ARROW_LENGTH = 0.22


@dataclass(frozen=True)
class RasterImage:
    width: int
    height: int
    image: Image.Image
    png: bytes


def _encode(img: Image.Image) -> RasterImage:
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False, compress_level=6)
    return RasterImage(img.width, img.height, img, buf.getvalue())


def _check_canvas(canvas):
    w, h = canvas
    if w < MIN_CANVAS or h < MIN_CANVAS:
        raise ValueError(f"canvas must be at least {MIN_CANVAS}px on each side, got {w}x{h}")


def _stroke(draw: ImageDraw.ImageDraw, pts, width: int, fill=INK):
    draw.line(pts, fill=fill, width=width, joint="curve")
    r = width / 2
    for x, y in (pts[0], pts[-1]):
        draw.ellipse((x - r, y - r, x + r, y + r), fill=fill)


def glyph_geometry(trial: RftTrial, canvas=RFT_CANVAS):
    """Pixel centre and box side of every symbol in a scene."""
    w, _ = canvas
    half = w / 2 - round(w * WALL_FRACTION)
    c = w / 2
    out = []
    for sym in trial.symbols:
        dx, dy = polar_to_xy(sym.position_angle, sym.radius * half)
        out.append((round(c + dx), round(c + dy), GLYPH_BOX * half))
    return out


def draw_glyph(draw, glyph: str, cx: float, cy: float, box: float, up: float):
    """Draw ``glyph`` centred on (cx, cy), its up direction turned ``up`` degrees clockwise."""
    t = math.radians(up)
    cos_t, sin_t = math.cos(t), math.sin(t)
    width = max(2, round(box * 0.09))
    for line in glyph_outline(glyph):
        pts = []
        for x, y in line:
            lx, ly = (x - 0.5) * box, (y - 0.5) * box
            pts.append((cx + lx * cos_t - ly * sin_t, cy + lx * sin_t + ly * cos_t))
        _stroke(draw, pts, width)


def render_rft_image(trial: RftTrial, canvas=RFT_CANVAS) -> RasterImage:
    _check_canvas(canvas)
    w, h = canvas
    if w != h:
        raise ValueError("the room is square; use a square canvas")
    img = Image.new("RGB", canvas, FLOOR)
    draw = ImageDraw.Draw(img)
    t = round(w * WALL_FRACTION)
    walls = {
        "TOP": [(0, 0), (w, 0), (w - t, t), (t, t)],
        "RIGHT": [(w, 0), (w, h), (w - t, h - t), (w - t, t)],
        "BOTTOM": [(w, h), (0, h), (t, h - t), (w - t, h - t)],
        "LEFT": [(0, h), (0, 0), (t, t), (t, h - t)],
    }
    for side, poly in walls.items():
        draw.polygon(poly, fill=WALL_RGB[trial.wall_colors[side]])

    c = w / 2
    half = w / 2 - t
    body = BODY_RADIUS * half
    draw.ellipse((c - body, c - body, c + body, c + body), fill=FIGURE_BODY)
    tip = polar_to_xy(trial.figure_orientation, ARROW_LENGTH * half)
    tip = (c + tip[0], c + tip[1])
    shaft_w = max(2, round(half * 0.02))
    draw.line([(c, c), tip], fill=ARROW, width=shaft_w)
    head = 0.07 * half
    left = polar_to_xy(trial.figure_orientation + 150, head)
    right = polar_to_xy(trial.figure_orientation - 150, head)
    draw.polygon(
        [tip, (tip[0] + left[0], tip[1] + left[1]), (tip[0] + right[0], tip[1] + right[1])],
        fill=ARROW,
    )

    for sym, (x, y, box) in zip(trial.symbols, glyph_geometry(trial, canvas)):
        draw_glyph(draw, sym.glyph, x, y, box, sym.rendered_up)
    return _encode(img)


# --- director grid -------------------------------------------------------

def _star(n=5, outer=0.48, inner=0.2):
    pts = []
    for i in range(2 * n):
        r = outer if i % 2 == 0 else inner
        a = math.pi * i / n - math.pi / 2
        pts.append((0.5 + r * math.cos(a), 0.52 + r * math.sin(a)))
    return pts


def _ellipse_poly(cx, cy, rx, ry, steps=24):
    return [
        (cx + rx * math.cos(2 * math.pi * i / steps), cy + ry * math.sin(2 * math.pi * i / steps))
        for i in range(steps)
    ]


SHAPES = {
    "book": [[(0.2, 0.08), (0.8, 0.08), (0.8, 0.92), (0.2, 0.92)]],
    "shirt": [[(0.3, 0.1), (0.7, 0.1), (0.95, 0.3), (0.82, 0.45), (0.72, 0.38),
               (0.72, 0.92), (0.28, 0.92), (0.28, 0.38), (0.18, 0.45), (0.05, 0.3)]],
    "hat": [[(0.05, 0.75), (0.95, 0.75), (0.95, 0.85), (0.05, 0.85)],
            [(0.25, 0.75), (0.3, 0.3), (0.7, 0.3), (0.75, 0.75)]],
    "star": [_star()],
    "pot": [[(0.12, 0.35), (0.88, 0.35), (0.8, 0.85), (0.2, 0.85)],
            [(0.0, 0.38), (0.12, 0.38), (0.12, 0.46), (0.0, 0.46)],
            [(0.88, 0.38), (1.0, 0.38), (1.0, 0.46), (0.88, 0.46)]],
    "mug": [[(0.15, 0.2), (0.7, 0.2), (0.7, 0.9), (0.15, 0.9)],
            [(0.7, 0.35), (0.92, 0.35), (0.92, 0.7), (0.7, 0.7)]],
    "knife": [[(0.1, 0.5), (0.65, 0.38), (0.65, 0.58), (0.1, 0.58)],
              [(0.65, 0.42), (0.95, 0.42), (0.95, 0.56), (0.65, 0.56)]],
    "cookie": [_ellipse_poly(0.5, 0.5, 0.42, 0.42)],
    "apple": [_ellipse_poly(0.5, 0.58, 0.38, 0.36), [(0.47, 0.05), (0.53, 0.05), (0.53, 0.25), (0.47, 0.25)]],
    "radio": [[(0.08, 0.3), (0.92, 0.3), (0.92, 0.85), (0.08, 0.85)],
              [(0.2, 0.1), (0.26, 0.1), (0.3, 0.3), (0.24, 0.3)]],
    "vase": [[(0.38, 0.05), (0.62, 0.05), (0.6, 0.25), (0.85, 0.55), (0.7, 0.95),
              (0.3, 0.95), (0.15, 0.55), (0.4, 0.25)]],
    "bucket": [[(0.1, 0.2), (0.9, 0.2), (0.78, 0.92), (0.22, 0.92)]],
    "box": [[(0.15, 0.15), (0.85, 0.15), (0.85, 0.85), (0.15, 0.85)]],
}

_LABEL_STROKES = {
    "A": [[(0.1, 1.0), (0.5, 0.0), (0.9, 1.0)], [(0.28, 0.6), (0.72, 0.6)]],
    "B": [[(0.15, 0.0), (0.15, 1.0), (0.65, 1.0), (0.85, 0.85), (0.85, 0.62), (0.65, 0.5),
           (0.15, 0.5)], [(0.15, 0.0), (0.6, 0.0), (0.78, 0.12), (0.78, 0.38), (0.6, 0.5)]],
    "C": [[(0.85, 0.1), (0.65, 0.0), (0.35, 0.0), (0.15, 0.2), (0.15, 0.8), (0.35, 1.0),
           (0.65, 1.0), (0.85, 0.9)]],
    "D": [[(0.15, 0.0), (0.15, 1.0), (0.55, 1.0), (0.85, 0.75), (0.85, 0.25), (0.55, 0.0),
           (0.15, 0.0)]],
    "1": [[(0.3, 0.2), (0.55, 0.0), (0.55, 1.0)], [(0.3, 1.0), (0.8, 1.0)]],
    "2": [[(0.15, 0.2), (0.35, 0.0), (0.65, 0.0), (0.85, 0.2), (0.85, 0.4), (0.15, 1.0),
           (0.85, 1.0)]],
    "3": [[(0.15, 0.05), (0.85, 0.05), (0.45, 0.45), (0.7, 0.45), (0.85, 0.6), (0.85, 0.85),
           (0.65, 1.0), (0.3, 1.0), (0.15, 0.9)]],
    "4": [[(0.7, 1.0), (0.7, 0.0), (0.1, 0.7), (0.9, 0.7)]],
}


def _draw_label(draw, text: str, cx: float, cy: float, size: float):
    for line in _LABEL_STROKES[text]:
        pts = [(cx + (x - 0.5) * size * 0.7, cy + (y - 0.5) * size) for x, y in line]
        _stroke(draw, pts, max(2, round(size * 0.1)))


def _draw_item(img: Image.Image, item, x0: float, y0: float, cell: float):
    scale = SIZE_SCALE[item.size_level] * 0.8 * cell
    ox = x0 + (cell - scale) / 2
    oy = y0 + (cell - scale) / 2
    polys = [[(ox + x * scale, oy + y * scale) for x, y in poly] for poly in SHAPES.get(item.shape, SHAPES["box"])]
    color = ITEM_RGB.get(item.color, (180, 120, 200))
    mask = Image.new("L", img.size, 0)
    mdraw = ImageDraw.Draw(mask)
    for poly in polys:
        mdraw.polygon(poly, fill=255)
    layer = Image.new("RGB", img.size, color)
    if item.pattern is Pattern.STRIPED:
        ldraw = ImageDraw.Draw(layer)
        stripe = "white" if sum(color) < 500 else (40, 40, 40)
        step = max(6, round(scale / 7))
        width = max(2, step // 3)
        x_start, y_start = int(ox) - int(scale), int(oy)
        for k in range(0, int(3 * scale), step):
            ldraw.line([(x_start + k, y_start + scale), (x_start + k + scale, y_start)], fill=stripe, width=width)
    img.paste(layer, (0, 0), mask)
    draw = ImageDraw.Draw(img)
    for poly in polys:
        draw.polygon(poly, outline=INK)


def render_director_image(trial: DirectorTrial | Grid, canvas=DIRECTOR_CANVAS) -> RasterImage:
    """Participant-side view: labels on the top and left edges, occluded cells
    shown with a dark backing and their items still visible."""
    _check_canvas(canvas)
    grid = trial.grid if isinstance(trial, DirectorTrial) else trial
    w, h = canvas
    margin = round(min(w, h) * 0.1)
    cell = min((w - 1.5 * margin) / 4, (h - 1.5 * margin) / 4)
    x0 = (w - 4 * cell + margin) / 2
    y0 = margin
    img = Image.new("RGB", canvas, (255, 255, 255))
    draw = ImageDraw.Draw(img)
    label = margin * 0.5
    for col in range(4):
        _draw_label(draw, COLUMNS[col], x0 + (col + 0.5) * cell, margin / 2, label)
    for row in range(4):
        _draw_label(draw, str(row + 1), x0 - margin / 2, y0 + (row + 0.5) * cell, label)
    for col, row, c in grid.positions():
        cx, cy = x0 + col * cell, y0 + row * cell
        draw.rectangle((cx, cy, cx + cell, cy + cell), fill=OCCLUDED_BACKING if c.occluded else OPEN_BACKING,
                       outline=INK, width=3)
        if c.item is not None:
            _draw_item(img, c.item, cx, cy, cell)
            draw = ImageDraw.Draw(img)
    return _encode(img)


def render_trial_image(trial, canvas=None) -> RasterImage:
    if isinstance(trial, RftTrial):
        return render_rft_image(trial, canvas or RFT_CANVAS)
    return render_director_image(trial, canvas or DIRECTOR_CANVAS)
