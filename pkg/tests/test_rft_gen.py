from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vptbench import geometry as geo
from vptbench.oracle import answer_rft
from vptbench.rft import (
    COLORS,
    QuestionType,
    RftConfig,
    RftSet,
    build_prompts,
    generate_set,
    trial_from_dict,
    trial_to_dict,
)
from vptbench.symbols import Orientation, pair_class

from helpers import rft_trial


@pytest.fixture(scope="module")
def battery():
    return {s: generate_set(s, 600, 11) for s in RftSet}


def test_control_1_orientation_range():
    trials = generate_set(RftSet.CONTROL_1, 3000, 3)
    assert all(70 <= t.figure_orientation <= 110 for t in trials)
    assert {t.figure_orientation for t in trials} == set(range(70, 111))


def test_test_3_two_distinct_symbols():
    trials = generate_set(RftSet.TEST_3, 100, 4)
    assert len(trials) == 100
    for t in trials:
        a, b = t.symbols
        assert a.glyph != b.glyph
        assert pair_class(a.glyph) != pair_class(b.glyph)
        assert t.queried_side in ("LEFT", "RIGHT")
        assert t.question_type is QuestionType.VISUOSPATIAL


def test_deterministic():
    assert generate_set(RftSet.TEST_1, 100, 9) == generate_set(RftSet.TEST_1, 100, 9)
    assert generate_set(RftSet.TEST_1, 100, 9) != generate_set(RftSet.TEST_1, 100, 10)


def test_prefix_stability():
    long = generate_set(RftSet.TEST_2, 50, 2)
    short = generate_set(RftSet.TEST_2, 20, 2)
    assert long[:40] == short


@pytest.mark.parametrize("s", list(RftSet))
def test_oracle_agrees_with_generator(battery, s):
    for t in battery[s]:
        assert answer_rft(t) == t.ground_truth, t.trial_id


@pytest.mark.parametrize("s", list(RftSet))
def test_structural_invariants(battery, s):
    trials = battery[s]
    per_scene = 1 if s is RftSet.TEST_3 else 2
    assert len(trials) == 600 * per_scene
    for t in trials:
        assert t.disparity == geo.fold_disparity(t.figure_orientation)
        assert t.bin == geo.bin_disparity(t.disparity).index
        assert t.corner_flag == geo.is_corner(t.figure_orientation)
        assert sorted(t.wall_colors.values()) == sorted(COLORS)
        assert set(t.wall_colors) == {"TOP", "RIGHT", "BOTTOM", "LEFT"}
        assert float(t.figure_orientation).is_integer()
        n_sym = {RftSet.CONTROL_2: 0, RftSet.TEST_3: 2}.get(s, 1)
        assert len(t.symbols) == n_sym
        for sym in t.symbols:
            assert abs(sym.jitter) <= 10
            assert 0.35 <= sym.radius <= 0.75


def test_dual_questions_share_scene(battery):
    trials = battery[RftSet.TEST_2]
    for a, b in zip(trials[::2], trials[1::2]):
        assert a.scene_id == b.scene_id
        assert (a.question_type, b.question_type) == (QuestionType.VISUAL, QuestionType.SPATIAL)
        assert a.symbols == b.symbols and a.figure_orientation == b.figure_orientation


def test_trial_id_format(battery):
    t = battery[RftSet.TEST_2]
    assert t[0].trial_id == "rft-test_2-11-00000"
    assert t[1].trial_id == "rft-test_2-11-00001"
    assert len({x.trial_id for x in t}) == len(t)


def test_upright_only_in_tests_2_and_3(battery):
    for s in (RftSet.TEST_2, RftSet.TEST_3):
        for t in battery[s]:
            for sym in t.symbols:
                assert sym.orientation is Orientation.UPRIGHT


def test_test_1_crosses_orientation_with_placement(battery):
    cells = Counter((t.symbols[0].orientation, t.ground_truth) for t in battery[RftSet.TEST_1]
                    if t.question_type is QuestionType.SPATIAL)
    assert len(cells) == 4
    assert min(cells.values()) > 100


def test_ground_truth_is_glyph_for_upright_tests(battery):
    for t in battery[RftSet.TEST_2]:
        if t.question_type is QuestionType.VISUAL:
            assert t.ground_truth == t.symbols[0].glyph


@pytest.mark.parametrize("s,answers", [(RftSet.TEST_1, ("FRONT", "BEHIND")), (RftSet.TEST_2, ("LEFT", "RIGHT"))])
def test_balance_at_3000(s, answers):
    trials = generate_set(s, 3000, 5, questions=("SPATIAL",))
    counts = Counter(t.ground_truth for t in trials)
    for a in answers:
        assert abs(counts[a] / 3000 - 0.5) <= 0.03


def test_test_2_lateral_offsets(battery):
    for t in battery[RftSet.TEST_2]:
        off = abs(geo.signed_offset(t.symbols[0].position_angle, t.figure_orientation))
        assert 10 <= off <= 28


def test_test_3_symbols_on_both_sides(battery):
    for t in battery[RftSet.TEST_3]:
        sides = {geo.side_of_figure(s.position_angle, t.figure_orientation) for s in t.symbols}
        assert sides == {geo.Side.LEFT, geo.Side.RIGHT}


def test_orientation_roughly_uniform(battery):
    hs = [t.figure_orientation for t in battery[RftSet.CONTROL_2][::2]]
    bins = Counter(geo.bin_disparity(geo.fold_disparity(h)).index for h in hs)
    for b in range(1, 5):
        assert 0.18 < bins[b] / len(hs) < 0.32


def test_questions_filter():
    only = generate_set(RftSet.TEST_1, 10, 0, questions=("VISUAL",))
    assert len(only) == 10
    assert all(t.question_type is QuestionType.VISUAL for t in only)
    with pytest.raises(ValueError):
        generate_set(RftSet.TEST_3, 10, 0, questions=("VISUAL",))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"fov_half_angle": 0},
        {"fov_half_angle": 95},
        {"lateral_offset": (20, 10)},
        {"lateral_offset": (10, 40)},
        {"radius_range": (0.5, 1.2)},
        {"jitter": -1},
        {"control_1_range": (20, 110)},
        {"min_symbol_separation": -0.1},
    ],
)
def test_invalid_config(kwargs):
    with pytest.raises(ValueError):
        generate_set(RftSet.TEST_2, 5, 0, RftConfig(**kwargs))


def test_n_must_be_positive():
    with pytest.raises(ValueError):
        generate_set(RftSet.TEST_2, 0, 0)


def test_serialization_round_trip(battery):
    for s in RftSet:
        for t in battery[s][:20]:
            assert trial_from_dict(trial_to_dict(t)) == t


def test_prompt_test_1_visual():
    t = generate_set(RftSet.TEST_1, 1, 0)[0]
    _, _, q = build_prompts(t)
    assert q == "Can the person see the number or letter? Respond with either: CAN SEE or CANNOT SEE"


def test_prompt_control_2_spatial():
    t = generate_set(RftSet.CONTROL_2, 1, 0)[1]
    assert t.question.endswith("Respond with a single word: LEFT, RIGHT, TOP or BOTTOM")


def test_prompt_test_3_side():
    t = rft_trial("TEST_3", "VISUOSPATIAL", 0, queried_side="RIGHT")
    system, context, q = build_prompts(t)
    assert "on their right side" in q
    assert system.startswith("You are participating in a visual perspective-taking experiment")
    assert context == (
        "There is a person standing in the centre of the image, and 2 numbers or letters on the floor nearby."
    )


@settings(max_examples=30)
@given(st.sampled_from(list(RftSet)), st.integers(0, 2**31 - 1))
def test_oracle_consistency_any_seed(s, seed):
    for t in generate_set(s, 8, seed):
        assert answer_rft(t) == t.ground_truth
