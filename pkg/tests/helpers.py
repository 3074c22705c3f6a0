"""Hand-built fixtures shared by several test modules."""

from dataclasses import replace

from vptbench import geometry as geo
from vptbench.director import (
    Adjective,
    Cell,
    Description,
    DirectorCondition,
    DirectorTrial,
    Grid,
    Pattern,
    Pov,
    parse_ref,
    synthesize_instruction,
)
from vptbench.rft import QuestionType, RftSet, RftTrial, build_prompts
from vptbench.symbols import Orientation, PlacedSymbol, rendered_up_for

WALLS = {"TOP": "RED", "RIGHT": "GREEN", "BOTTOM": "BLUE", "LEFT": "BLACK"}


def placed(glyph, heading, offset, radius=0.5, orientation=Orientation.UPRIGHT, jitter=0.0,
           behind=False, cone="FRONT"):
    base = heading + 180 if behind else heading
    return PlacedSymbol(
        glyph=glyph,
        orientation=orientation,
        jitter=jitter,
        position_angle=geo.normalize(base + offset),
        radius=radius,
        rendered_up=rendered_up_for(heading, orientation, jitter),
        cone=cone,
    )


def rft_trial(rft_set, qtype, heading, symbols=(), queried_side=None, ground_truth="", walls=None,
              trial_id="rft-fixture-0-00000"):
    rft_set, qtype = RftSet(rft_set), QuestionType(qtype)
    d = geo.fold_disparity(heading)
    t = RftTrial(
        trial_id=trial_id,
        scene_id="rft-fixture-0-s00000",
        set=rft_set,
        question_type=qtype,
        figure_orientation=heading,
        symbols=tuple(symbols),
        wall_colors=dict(walls or WALLS),
        queried_side=queried_side,
        context="",
        question="",
        ground_truth=ground_truth,
        disparity=d,
        bin=geo.bin_disparity(d).index,
        corner_flag=geo.is_corner(heading),
    )
    _, context, question = build_prompts(t)
    return replace(t, context=context, question=question)


def grid_from(library, cells: dict, occluded=()):
    """``cells`` maps refs to item ids; ``occluded`` lists blocked refs."""
    out = [Cell() for _ in range(16)]
    for ref in set(cells) | set(occluded):
        c, r = parse_ref(ref)
        item = library[cells[ref]] if ref in cells else None
        out[r * 4 + c] = Cell(ref in occluded, item)
    return Grid(tuple(out))


def clothing_trial(library):
    """Rightmost blue non-striped clothing from the director's view: matches
    at A1 (occluded), C3, D1 and D4; the answer is C3."""
    grid = grid_from(
        library,
        {
            "A1": "blue_shirt",
            "C3": "blue_shirt_small",
            "D1": "blue_shirt_large",
            "D4": "blue_shirt",
            "B1": "red_shirt",
            "B2": "blue_striped_shirt",
            "A3": "yellow_star",
            "C2": "blue_book",
            "B4": "black_pot",
            "A4": "cookie",
        },
        occluded=("A1", "B2", "A2", "C4"),
    )
    desc = Description("clothing", color="blue", pattern=Pattern.PLAIN)
    ins = synthesize_instruction(desc, Adjective.H_RIGHTMOST, Pov.MINE, library)
    cond = DirectorCondition("DIFFERENT", Adjective.H_RIGHTMOST, Pov.MINE)
    # 10 items over 16 cells, 3 of 9 distractors match
    return DirectorTrial("director-clothing-0-00000", grid, ins, cond, 10 / 16, 3 / 9, "C3")
