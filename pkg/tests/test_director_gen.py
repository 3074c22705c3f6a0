from collections import Counter
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vptbench.director import (
    Adjective,
    Description,
    DirectorCondition,
    Item,
    Library,
    Pattern,
    Pov,
    condition_grid,
    synthesize_instruction,
    trial_from_dict,
    trial_to_dict,
)
from vptbench.director_gen import GenerationError, generate_dataset, generate_trial, validate_trial
from vptbench.oracle import answer_director, answer_director_egocentric

from helpers import clothing_trial, grid_from

RELATED = (0.3, 0.5, 0.7, 0.9)


@pytest.fixture(scope="module")
def datasets(library):
    return {r: generate_dataset(280, 21, r, library=library) for r in RELATED}


def test_instruction_transcript_example(library):
    ins = synthesize_instruction(Description("star"), "SIZE_LARGEST", "YOURS", library)
    assert ins.surface_text == "Please select the largest star from your point of view"


def test_instruction_compound_description(library):
    ins = synthesize_instruction(
        Description("clothing", color="blue", pattern=Pattern.PLAIN), Adjective.H_RIGHTMOST, Pov.MINE, library
    )
    assert ins.surface_text == "Please select the rightmost blue, non-striped item of clothing from my point of view"


def test_instruction_no_adjective(library):
    ins = synthesize_instruction(Description("book", color="red"), Adjective.NONE, Pov.MINE, library)
    assert ins.surface_text == "Please select the red book from my point of view"


def test_instruction_affordance_noun(library):
    ins = synthesize_instruction(Description("holds-water", noun_kind="affordance"), "V_TOPMOST", "YOURS", library)
    assert ins.surface_text == "Please select the topmost item that holds water from your point of view"


def test_clothing_trial_validates(library):
    t = clothing_trial(library)
    rep = validate_trial(t, library)
    assert rep.ok, str(rep)
    assert answer_director(t.grid, t.instruction) == "C3"


def test_occluded_ground_truth_fails_a(library):
    t = clothing_trial(library)
    bad = replace(t, ground_truth="A1")
    rep = validate_trial(bad, library)
    assert "a_unique_resolution" in rep.failures


def test_none_with_two_visible_matches_fails_c(library):
    grid = grid_from(library, {"A1": "red_book", "C2": "red_book_small", "D4": "cookie"})
    desc = Description("book", color="red")
    ins = synthesize_instruction(desc, Adjective.NONE, Pov.YOURS, library)
    from vptbench.director import DirectorTrial

    t = DirectorTrial("director-x-0-00000", grid, ins, DirectorCondition("SHARED", "NONE", "YOURS"), 3 / 16, 0.5, "A1")
    rep = validate_trial(t, library)
    assert "c_single_match" in rep.failures
    assert "a_unique_resolution" in rep.failures


def test_condition_grid_is_fully_crossed():
    conds = condition_grid()
    assert len(conds) == 28
    assert len(set(conds)) == 28
    spatial = Counter(c.spatial for c in conds)
    assert spatial == {"DIFFERENT": 8, "SHARED": 8, "N/A": 12}


@pytest.mark.parametrize("related", RELATED)
def test_generated_datasets_validate(datasets, library, related):
    for t in datasets[related]:
        rep = validate_trial(t, library)
        assert rep.ok, str(rep)
        assert not t.grid[t.ground_truth].occluded
        assert answer_director(t.grid, t.instruction) == t.ground_truth


@pytest.mark.parametrize("related", RELATED)
def test_related_proportion_tracks_target(datasets, related):
    fracs = []
    for t in datasets[related]:
        desc = t.instruction.description
        matches = sum(desc.matches(c.item) for c in t.grid.cells)
        fracs.append((matches - 1) / max(t.grid.occupied - 1, 1))
    mean = sum(fracs) / len(fracs)
    # capacity limits pull high targets down, minimum matches push low ones up
    assert abs(mean - related) < 0.2, mean


def test_high_related_mostly_matching(datasets):
    ts = datasets[0.9]
    fracs = []
    for t in ts:
        desc = t.instruction.description
        matches = sum(desc.matches(c.item) for c in t.grid.cells)
        fracs.append((matches - 1) / (t.grid.occupied - 1))
    assert sum(fracs) / len(fracs) > sum(
        (sum(t.instruction.description.matches(c.item) for c in t.grid.cells) - 1) / (t.grid.occupied - 1)
        for t in ts_low(datasets)
    ) / len(ts_low(datasets))


def ts_low(datasets):
    return datasets[0.3]


def test_fill_proportion(datasets):
    for t in datasets[0.5]:
        assert abs(t.grid.occupied - 0.6 * 16) <= 1


def test_occluded_counts_in_range(datasets):
    counts = Counter(t.grid.occluded_count for t in datasets[0.5])
    assert set(counts) <= {3, 4, 5, 6}
    assert len(counts) == 4


def test_conditions_cycle(datasets):
    ts = datasets[0.7]
    conds = condition_grid()
    for i, t in enumerate(ts):
        assert t.condition == conds[i % 28]
        assert t.instruction.adjective is t.condition.adjective
        assert t.instruction.pov is t.condition.pov


def test_visual_different_has_occluded_match(datasets):
    for t in datasets[0.3]:
        occ = [c for c in t.grid.cells if c.occluded and t.instruction.description.matches(c.item)]
        if t.condition.visual == "DIFFERENT":
            assert occ
        else:
            assert not occ


def test_egocentric_diverges_on_visual_different(datasets):
    for r in RELATED:
        for t in datasets[r]:
            if t.condition.visual == "DIFFERENT" and t.condition.adjective is not Adjective.NONE:
                assert answer_director_egocentric(t.grid, t.instruction) != t.ground_truth


def test_vertical_pov_flip_invariance(datasets):
    n = 0
    for r in RELATED:
        for t in datasets[r]:
            if t.condition.adjective.kind != "VERTICAL":
                continue
            flipped = replace(t.instruction, pov=Pov.YOURS if t.instruction.pov is Pov.MINE else Pov.MINE)
            assert answer_director(t.grid, flipped) == answer_director(t.grid, t.instruction)
            n += 1
    assert n > 0


def test_horizontal_mine_equals_mirrored_yours(datasets):
    for t in datasets[0.9]:
        ins = t.instruction
        if ins.adjective.kind != "HORIZONTAL" or ins.pov is not Pov.MINE:
            continue
        mirrored = replace(ins, adjective=ins.adjective.mirrored, pov=Pov.YOURS)
        assert answer_director(t.grid, mirrored) == answer_director(t.grid, ins)


def test_descriptions_match_something(datasets):
    for t in datasets[0.3]:
        assert any(t.instruction.description.matches(c.item) for c in t.grid.cells)


def test_deterministic(library):
    a = generate_dataset(30, 5, 0.5, library=library)
    b = generate_dataset(30, 5, 0.5, library=library)
    assert a == b
    assert a != generate_dataset(30, 6, 0.5, library=library)


def test_trial_ids(datasets):
    assert datasets[0.9][0].trial_id == "director-rel90-21-00000"
    assert datasets[0.3][279].trial_id == "director-rel30-21-00279"


def test_serialization_round_trip(datasets, library):
    for t in datasets[0.5][:56]:
        assert trial_from_dict(trial_to_dict(t), library) == t


def test_unsatisfiable_raises_named_constraint():
    # one item type, one size: SIZE and multi-match constraints cannot hold
    lib = Library(
        [Item("lone_book", "lone book", ("book",), "red", Pattern.PLAIN, (), 1, "book", "lone_book")],
        {"book": "book"},
        {},
    )
    cond = DirectorCondition("DIFFERENT", "SIZE_LARGEST", "MINE")
    with pytest.raises(GenerationError) as exc:
        generate_trial(cond, 0.6, 0.5, lib, seed=0, max_attempts=5)
    assert exc.value.constraint


@pytest.mark.parametrize("fill,related", [(0, 0.5), (0.5, 0), (1.2, 0.5)])
def test_bad_proportions(library, fill, related):
    with pytest.raises(ValueError):
        generate_trial(condition_grid()[0], fill, related, library, seed=0)


@settings(max_examples=60)
@given(
    st.sampled_from(condition_grid()),
    st.sampled_from((0.4, 0.5, 0.6, 0.7, 0.8)),
    st.sampled_from(RELATED),
    st.integers(0, 2**31 - 1),
)
def test_any_seed_yields_valid_trial(library, cond, fill, related, seed):
    t = generate_trial(cond, fill, related, library, seed)
    assert validate_trial(t, library).ok
