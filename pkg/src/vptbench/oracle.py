"""Ground-truth answers for both tasks, plus the egocentric failure model.

The oracle recomputes every answer from scene geometry or grid contents; it
never reads a trial's stored ground truth.
"""

from __future__ import annotations

import math

from . import geometry as geo
from .director import Adjective, Grid, Instruction, Pov, cell_ref
from .rft import QuestionType, RftSet, RftTrial


class ResolutionError(ValueError):
    """The instruction does not pick out exactly one cell."""


def _image_x(symbol) -> float:
    return symbol.radius * math.sin(math.radians(symbol.position_angle))


def answer_rft(trial: RftTrial, fov_half_angle: float = geo.FOV_HALF_ANGLE) -> str:
    s, q = trial.set, trial.question_type
    heading = trial.figure_orientation
    expected = (QuestionType.VISUOSPATIAL,) if s is RftSet.TEST_3 else (
        QuestionType.VISUAL,
        QuestionType.SPATIAL,
    )
    if q not in expected:
        raise ValueError(f"{s.value} has no {q.value} question")

    if s is RftSet.CONTROL_2:
        side = geo.facing_wall(heading).side.value
        return trial.wall_colors[side] if q is QuestionType.VISUAL else side

    if s is RftSet.TEST_3:
        for sym in trial.symbols:
            if geo.side_of_figure(sym.position_angle, heading).value == trial.queried_side:
                return sym.figure_reading
        raise ValueError(f"{trial.trial_id}: no symbol on the figure's {trial.queried_side}")

    (sym,) = trial.symbols
    if s is RftSet.CONTROL_1:
        if q is QuestionType.VISUAL:
            return sym.glyph
        x = _image_x(sym)
        if x == 0:
            raise ValueError(f"{trial.trial_id}: symbol on the image midline")
        return "RIGHT" if x > 0 else "LEFT"
    if s is RftSet.TEST_1:
        placement = geo.front_or_behind(sym.position_angle, heading, fov_half_angle)
        if q is QuestionType.VISUAL:
            return "CAN SEE" if placement is geo.Placement.FRONT else "CANNOT SEE"
        return placement.value
    # TEST_2
    if q is QuestionType.VISUAL:
        return sym.figure_reading
    return geo.side_of_figure(sym.position_angle, heading).value


def _matches(grid: Grid, instruction: Instruction, include_occluded: bool):
    desc = instruction.description
    return [
        (col, row, cell)
        for col, row, cell in grid.positions()
        if desc.matches(cell.item) and (include_occluded or not cell.occluded)
    ]


def extremity(adjective: Adjective, col: int, row: int, size: int, director_frame: bool) -> int:
    """Score where larger means further in the adjective's direction.

    ``director_frame`` mirrors columns, since the director's right is the
    participant's left.
    """
    if adjective is Adjective.SIZE_LARGEST:
        return size
    if adjective is Adjective.SIZE_SMALLEST:
        return -size
    if adjective is Adjective.V_TOPMOST:
        return -row
    if adjective is Adjective.V_BOTTOMMOST:
        return row
    c = 3 - col if director_frame else col
    if adjective is Adjective.H_RIGHTMOST:
        return c
    if adjective is Adjective.H_LEFTMOST:
        return -c
    raise ValueError(f"{adjective} has no ordering")


def answer_director(grid: Grid, instruction: Instruction) -> str:
    candidates = _matches(grid, instruction, include_occluded=False)
    adj = instruction.adjective
    if adj is Adjective.NONE:
        if len(candidates) != 1:
            raise ResolutionError(f"{len(candidates)} visible items match the description")
        col, row, _ = candidates[0]
        return cell_ref(col, row)
    if not candidates:
        raise ResolutionError("no visible item matches the description")
    director_frame = instruction.pov is Pov.MINE
    scored = [
        (extremity(adj, c, r, cell.item.size_level, director_frame), c, r)
        for c, r, cell in candidates
    ]
    best = max(s for s, _, _ in scored)
    winners = [(c, r) for s, c, r in scored if s == best]
    if len(winners) != 1:
        refs = ", ".join(cell_ref(c, r) for c, r in winners)
        raise ResolutionError(f"{adj.word} is tied between {refs}")
    return cell_ref(*winners[0])


def answer_director_egocentric(grid: Grid, instruction: Instruction) -> str:
    """Resolve as a listener who ignores occlusion and reads left/right in
    their own frame. Ties go to the topmost, then leftmost cell."""
    candidates = _matches(grid, instruction, include_occluded=True)
    if not candidates:
        raise ResolutionError("no item matches the description")
    adj = instruction.adjective
    if adj is not Adjective.NONE:
        scored = [
            (extremity(adj, c, r, cell.item.size_level, False), c, r, cell)
            for c, r, cell in candidates
        ]
        best = max(s[0] for s in scored)
        candidates = [(c, r, cell) for s, c, r, cell in scored if s == best]
    col, row, _ = min(candidates, key=lambda t: (t[1], t[0]))
    return cell_ref(col, row)


def answer(trial) -> str:
    """Oracle answer for either task."""
    if isinstance(trial, RftTrial):
        return answer_rft(trial)
    return answer_director(trial.grid, trial.instruction)
