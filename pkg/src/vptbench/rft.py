"""Rotating Figure Task trial generation.

One scene is a room with four coloured walls, a figure at the centre facing
``figure_orientation`` and zero, one or two glyphs on the floor. Controls 1-2
and Tests 1-2 yield a VISUAL and a SPATIAL trial per scene; Test 3 yields a
single VISUOSPATIAL trial.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import geometry as geo
from .prompts import RFT_CONTEXT, RFT_QUESTION, RFT_SYSTEM_PROMPT
from .symbols import ALPHABET, Orientation, PlacedSymbol, pair_class, rendered_up_for


class RftSet(str, enum.Enum):
    CONTROL_1 = "CONTROL_1"
    CONTROL_2 = "CONTROL_2"
    TEST_1 = "TEST_1"
    TEST_2 = "TEST_2"
    TEST_3 = "TEST_3"


class QuestionType(str, enum.Enum):
    VISUAL = "VISUAL"
    SPATIAL = "SPATIAL"
    VISUOSPATIAL = "VISUOSPATIAL"


COLORS = ("RED", "GREEN", "BLUE", "BLACK")
SET_ORDER = tuple(RftSet)


def questions_for(rft_set: RftSet) -> tuple[QuestionType, ...]:
    if rft_set is RftSet.TEST_3:
        return (QuestionType.VISUOSPATIAL,)
    return (QuestionType.VISUAL, QuestionType.SPATIAL)


@dataclass(frozen=True)
class RftConfig:
    fov_half_angle: float = geo.FOV_HALF_ANGLE
    lateral_offset: tuple[float, float] = geo.LATERAL_OFFSET
    radius_range: tuple[float, float] = geo.RADIUS_RANGE
    jitter: float = 10.0
    control_1_range: tuple[int, int] = (70, 110)
    # Test 3 glyph centres, in units of the room half-width
    min_symbol_separation: float = 0.3

    def validate(self) -> None:
        if not 0 < self.fov_half_angle < 90:
            raise ValueError("fov_half_angle must be in (0, 90)")
        lo, hi = self.lateral_offset
        if not 0 < lo <= hi <= self.fov_half_angle:
            raise ValueError("lateral_offset must satisfy 0 < lo <= hi <= fov_half_angle")
        rlo, rhi = self.radius_range
        if not 0 < rlo <= rhi < 1:
            raise ValueError("radius_range must satisfy 0 < lo <= hi < 1")
        if not 0 <= self.jitter < 90:
            raise ValueError("jitter must be in [0, 90)")
        clo, chi = self.control_1_range
        if not (clo <= chi and clo - self.fov_half_angle > 0 and chi + self.fov_half_angle < 180):
            raise ValueError("control_1_range would put symbols across the image midline")
        if self.min_symbol_separation < 0:
            raise ValueError("min_symbol_separation must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "RftConfig":
        d = dict(d)
        for key in ("lateral_offset", "radius_range", "control_1_range"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass(frozen=True)
class RftTrial:
    trial_id: str
    scene_id: str
    set: RftSet
    question_type: QuestionType
    figure_orientation: int
    symbols: tuple[PlacedSymbol, ...]
    wall_colors: dict
    queried_side: str | None
    context: str
    question: str
    ground_truth: str
    disparity: float
    bin: int
    corner_flag: bool
    seed_record: dict = field(default_factory=dict)

    @property
    def task(self) -> str:
        return "rft"


def build_prompts(trial: RftTrial) -> tuple[str, str, str]:
    """(system prompt, context, question) for a trial."""
    context = RFT_CONTEXT[trial.set.value]
    question = RFT_QUESTION[(trial.set.value, trial.question_type.value)]
    if trial.set is RftSet.TEST_3:
        question = question.format(side=trial.queried_side.lower())
    return RFT_SYSTEM_PROMPT, context, question


def _wall_side_by_sector(heading: int) -> str:
    # sector index of the half-open 90-degree sectors centred on the walls
    return ("TOP", "RIGHT", "BOTTOM", "LEFT")[int(math.floor((heading + 45) / 90)) % 4]


def _scene_rng(seed: int, rft_set: RftSet, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), SET_ORDER.index(rft_set), int(index)])
    return np.random.default_rng(ss)


def _orientation(rft_set: RftSet, rng, config: RftConfig) -> int:
    if rft_set is RftSet.CONTROL_1:
        lo, hi = config.control_1_range
        return int(rng.integers(lo, hi + 1))
    return int(rng.integers(0, 360))


def _jitter(rng, config: RftConfig) -> float:
    return round(float(rng.uniform(-config.jitter, config.jitter)), 2)


def _symbol(glyph, orientation, jitter, heading, cone, rng, config):
    angle, radius = geo.sample_cone_position(
        heading, cone, rng, config.fov_half_angle, config.lateral_offset, config.radius_range
    )
    return PlacedSymbol(
        glyph=glyph,
        orientation=orientation,
        jitter=jitter,
        position_angle=angle,
        radius=radius,
        rendered_up=rendered_up_for(heading, orientation, jitter),
        cone=geo.ConeMode(cone).value,
    )


def _separation(a: PlacedSymbol, b: PlacedSymbol) -> float:
    ax, ay = geo.polar_to_xy(a.position_angle, a.radius)
    bx, by = geo.polar_to_xy(b.position_angle, b.radius)
    return math.hypot(ax - bx, ay - by)


def _make_scene(rft_set: RftSet, index: int, seed: int, config: RftConfig) -> dict:
    """Sample one scene plus per-question answers derived from its construction."""
    rng = _scene_rng(seed, rft_set, index)
    heading = _orientation(rft_set, rng, config)
    colors = [COLORS[i] for i in rng.permutation(4)]
    walls = dict(zip(("TOP", "RIGHT", "BOTTOM", "LEFT"), colors))
    symbols: tuple[PlacedSymbol, ...] = ()
    answers: dict[QuestionType, str] = {}
    queried_side = None

    if rft_set is RftSet.CONTROL_1:
        cone = ("FRONT", "BEHIND")[index % 2]
        glyph = ALPHABET[int(rng.integers(len(ALPHABET)))]
        angle, radius = geo.sample_cone_position(
            heading, cone, rng, config.fov_half_angle, config.lateral_offset, config.radius_range
        )
        symbols = (PlacedSymbol(glyph, Orientation.UPRIGHT, 0.0, angle, radius, 0.0, cone),)
        # heading in [70, 110] faces image-right, so the front cone is on the right
        answers[QuestionType.VISUAL] = glyph
        answers[QuestionType.SPATIAL] = "RIGHT" if cone == "FRONT" else "LEFT"
    elif rft_set is RftSet.CONTROL_2:
        side = _wall_side_by_sector(heading)
        answers[QuestionType.VISUAL] = walls[side]
        answers[QuestionType.SPATIAL] = side
    elif rft_set is RftSet.TEST_1:
        cone = ("FRONT", "BEHIND")[index % 2]
        glyph = ALPHABET[int(rng.integers(len(ALPHABET)))]
        orientation = (Orientation.UPRIGHT, Orientation.INVERTED)[int(rng.integers(2))]
        symbols = (_symbol(glyph, orientation, _jitter(rng, config), heading, cone, rng, config),)
        answers[QuestionType.VISUAL] = "CAN SEE" if cone == "FRONT" else "CANNOT SEE"
        answers[QuestionType.SPATIAL] = cone
    elif rft_set is RftSet.TEST_2:
        cone = ("FRONT_LEFT", "FRONT_RIGHT")[index % 2]
        glyph = ALPHABET[int(rng.integers(len(ALPHABET)))]
        symbols = (
            _symbol(glyph, Orientation.UPRIGHT, _jitter(rng, config), heading, cone, rng, config),
        )
        answers[QuestionType.VISUAL] = glyph
        answers[QuestionType.SPATIAL] = "LEFT" if cone == "FRONT_LEFT" else "RIGHT"
    else:
        # two glyphs from different rotation pairs, so neither answer is the
        # other one seen upside down
        first = ALPHABET[int(rng.integers(len(ALPHABET)))]
        others = [g for g in ALPHABET if g not in pair_class(first)]
        second = others[int(rng.integers(len(others)))]
        for _ in range(1000):
            left = _symbol(first, Orientation.UPRIGHT, _jitter(rng, config), heading, "FRONT_LEFT", rng, config)
            right = _symbol(second, Orientation.UPRIGHT, _jitter(rng, config), heading, "FRONT_RIGHT", rng, config)
            if _separation(left, right) >= config.min_symbol_separation:
                break
        else:
            raise ValueError("could not separate Test 3 symbols; lower min_symbol_separation")
        symbols = (left, right)
        queried_side = ("LEFT", "RIGHT")[int(rng.integers(2))]
        answers[QuestionType.VISUOSPATIAL] = first if queried_side == "LEFT" else second

    return {
        "heading": heading,
        "walls": walls,
        "symbols": symbols,
        "answers": answers,
        "queried_side": queried_side,
    }


def scene_id(rft_set: RftSet, seed: int, index: int) -> str:
    return f"rft-{rft_set.value.lower()}-{seed}-s{index:05}"


def generate_set(
    rft_set: RftSet | str,
    n: int,
    seed: int,
    config: RftConfig | None = None,
    questions: tuple[QuestionType | str, ...] | None = None,
) -> list[RftTrial]:
    """Generate ``n`` scenes of one stimulus set.

    Each scene yields one trial per question type (two for the dual sets),
    in scene-major order. Scene ``i`` depends only on (set, seed, i), so a
    longer battery extends a shorter one.
    """
    rft_set = RftSet(rft_set)
    config = config or RftConfig()
    config.validate()
    if n < 1:
        raise ValueError("n must be >= 1")
    wanted = questions_for(rft_set)
    if questions is not None:
        requested = tuple(QuestionType(q) for q in questions)
        bad = [q for q in requested if q not in wanted]
        if bad:
            raise ValueError(f"{rft_set.value} has no {bad[0].value} question")
        wanted = tuple(q for q in wanted if q in requested)

    trials = []
    for index in range(n):
        scene = _make_scene(rft_set, index, seed, config)
        heading = scene["heading"]
        disparity = geo.fold_disparity(heading)
        for qtype in wanted:
            k = len(trials)
            partial = RftTrial(
                trial_id=f"rft-{rft_set.value.lower()}-{seed}-{k:05}",
                scene_id=scene_id(rft_set, seed, index),
                set=rft_set,
                question_type=qtype,
                figure_orientation=heading,
                symbols=scene["symbols"],
                wall_colors=scene["walls"],
                queried_side=scene["queried_side"],
                context="",
                question="",
                ground_truth=scene["answers"][qtype],
                disparity=disparity,
                bin=geo.bin_disparity(disparity).index,
                corner_flag=geo.is_corner(heading),
                seed_record={"seed": int(seed), "set": rft_set.value, "scene": index},
            )
            _, context, question = build_prompts(partial)
            trials.append(replace(partial, context=context, question=question))
    return trials


def trial_to_dict(trial: RftTrial) -> dict:
    d = asdict(trial)
    d["set"] = trial.set.value
    d["question_type"] = trial.question_type.value
    d["symbols"] = [
        {**asdict(s), "orientation": s.orientation.value} for s in trial.symbols
    ]
    d["task"] = "rft"
    return d


def trial_from_dict(d: dict) -> RftTrial:
    d = dict(d)
    d.pop("task", None)
    d["set"] = RftSet(d["set"])
    d["question_type"] = QuestionType(d["question_type"])
    d["symbols"] = tuple(
        PlacedSymbol(**{**s, "orientation": Orientation(s["orientation"])}) for s in d["symbols"]
    )
    return RftTrial(**d)
