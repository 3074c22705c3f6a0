"""Procedural Director Task grids with constraint validation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .director import (
    Adjective,
    Cell,
    Description,
    DirectorCondition,
    DirectorTrial,
    Grid,
    Library,
    Pov,
    cell_ref,
    condition_grid,
    parse_ref,
    synthesize_instruction,
)
from .oracle import ResolutionError, answer_director, answer_director_egocentric, extremity

MAX_ATTEMPTS = 50
OCCLUDED_RANGE = (3, 6)


class GenerationError(RuntimeError):
    def __init__(self, constraint: str, detail: str = ""):
        self.constraint = constraint
        super().__init__(f"constraint {constraint} unsatisfiable" + (f": {detail}" if detail else ""))


class _Retry(Exception):
    def __init__(self, constraint: str, detail: str = ""):
        self.constraint, self.detail = constraint, detail


@dataclass
class ValidationReport:
    trial_id: str
    checks: dict[str, tuple[bool, str]] = field(default_factory=dict)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks[name] = (bool(passed), detail)

    @property
    def ok(self) -> bool:
        return all(p for p, _ in self.checks.values())

    @property
    def failures(self) -> list[str]:
        return [name for name, (p, _) in self.checks.items() if not p]

    def __str__(self) -> str:
        lines = [f"{self.trial_id}: {'PASS' if self.ok else 'FAIL'}"]
        for name, (p, detail) in self.checks.items():
            lines.append(f"  [{'ok' if p else 'FAIL'}] {name}" + (f" ({detail})" if detail else ""))
        return "\n".join(lines)


def _min_related(cond: DirectorCondition) -> int:
    none = cond.adjective is Adjective.NONE
    different = cond.visual == "DIFFERENT"
    return (0 if none else 1) + (1 if different else 0)


def _related_capacity(grid: Grid, cond: DirectorCondition, target: tuple[int, int]) -> int:
    """Most matching distractors the grid could hold without breaking the condition."""
    different = cond.visual == "DIFFERENT"
    occluded = grid.occluded_count
    tc, tr = target
    visible_others = [(c, r) for c, r, cell in grid.positions() if not cell.occluded and (c, r) != target]
    adj = cond.adjective
    if adj is Adjective.NONE:
        room = 0
    elif adj.kind == "SIZE":
        room = len(visible_others)
    else:
        key_t = extremity(adj, tc, tr, 0, cond.pov is Pov.MINE)
        room = sum(extremity(adj, c, r, 0, cond.pov is Pov.MINE) < key_t for c, r in visible_others)
    if different:
        room += occluded
    return min(room, max(grid.occupied - 1, 0))


def expected_related(grid: Grid, trial_cond: DirectorCondition, related: float, target) -> int:
    k = grid.occupied
    want = int(round(related * max(k - 1, 0)))
    cap = _related_capacity(grid, trial_cond, target)
    return max(_min_related(trial_cond), min(want, cap))


def validate_trial(trial: DirectorTrial, library: Library | None = None) -> ValidationReport:
    """Re-derive every generation constraint from the grid alone."""
    rep = ValidationReport(trial.trial_id)
    grid, ins, cond = trial.grid, trial.instruction, trial.condition
    desc = ins.description
    mine = ins.pov is Pov.MINE

    rep.add(
        "condition_labels",
        ins.adjective is cond.adjective and ins.pov is cond.pov,
        "instruction adjective/pov must equal the condition's",
    )
    if library is not None:
        expected_text = synthesize_instruction(desc, ins.adjective, ins.pov, library).surface_text
        rep.add("instruction_text", ins.surface_text == expected_text, ins.surface_text)
        unknown = [c.item.item_id for c in grid.cells if c.item and c.item.item_id not in library]
        rep.add("library_items", not unknown, ",".join(unknown))

    try:
        tc, tr = parse_ref(trial.ground_truth)
    except ValueError:
        rep.add("a_unique_resolution", False, f"bad ground truth {trial.ground_truth!r}")
        return rep
    target_cell = grid.at(tc, tr)
    visible_target = not target_cell.occluded and desc.matches(target_cell.item)
    try:
        resolved = answer_director(grid, ins)
        detail = f"resolves to {resolved}"
    except ResolutionError as exc:
        resolved, detail = None, str(exc)
    rep.add(
        "a_unique_resolution",
        visible_target and resolved == trial.ground_truth,
        detail if visible_target else f"{trial.ground_truth} is occluded or does not match",
    )

    visible = [(c, r, cell) for c, r, cell in grid.positions() if not cell.occluded and desc.matches(cell.item)]
    occluded = [(c, r, cell) for c, r, cell in grid.positions() if cell.occluded and desc.matches(cell.item)]
    if ins.adjective is Adjective.NONE:
        rep.add("c_single_match", len(visible) == 1, f"{len(visible)} visible matches")
    else:
        rep.add("b_multiple_matches", len(visible) >= 2, f"{len(visible)} visible matches")

    if cond.visual == "DIFFERENT":
        if ins.adjective is Adjective.NONE:
            ok = bool(occluded)
        else:
            key_t = extremity(ins.adjective, tc, tr, target_cell.item.size_level if target_cell.item else 0, mine)
            ok = any(
                extremity(ins.adjective, c, r, cell.item.size_level, mine) > key_t
                for c, r, cell in occluded
            )
        rep.add("d_occluded_competitor", ok, f"{len(occluded)} occluded matches")
        if ins.adjective is not Adjective.NONE:
            try:
                ego = answer_director_egocentric(grid, ins)
            except ResolutionError:
                ego = None
            rep.add("d_egocentric_diverges", ego != trial.ground_truth, f"egocentric {ego}")
    else:
        rep.add("d_no_occluded_alternative", not occluded, f"{len(occluded)} occluded matches")

    k = grid.occupied
    rep.add(
        "e_fill",
        abs(k - trial.fill_proportion * 16) <= 1,
        f"{k} occupied vs {trial.fill_proportion * 16:g}",
    )
    related = len(visible) + len(occluded) - 1
    want = expected_related(grid, cond, trial.related_proportion, (tc, tr))
    rep.add("f_related", abs(related - want) <= 1, f"{related} matching distractors vs {want}")
    return rep


def _pick(rng, seq):
    return seq[int(rng.integers(len(seq)))]


def _choose_description(rng, library: Library, cond: DirectorCondition):
    """Sample a target base item and a description it satisfies."""
    items = list(library.items.values())
    anchor = _pick(rng, items)
    if anchor.affordances and rng.random() < 0.2:
        desc = Description(_pick(rng, list(anchor.affordances)), "affordance")
    else:
        desc = Description(_pick(rng, list(anchor.categories)), "category")
    color = anchor.color if rng.random() < 0.6 else None
    pattern = anchor.pattern if rng.random() < 0.3 else None
    desc = Description(desc.noun, desc.noun_kind, color, pattern)
    pool = [i for i in items if desc.matches(i)]
    others = [i for i in items if not desc.matches(i)]
    if not others:
        raise _Retry("library", "description matches every item")
    return desc, pool, others


def _target_sizes(rng, cond: DirectorCondition, pool, n_visible_others: int):
    """Size level for the target, the visible matches and the occluded competitor."""
    levels = sorted({i.size_level for i in pool})
    adj = cond.adjective
    if adj.kind != "SIZE":
        return None
    larger_wins = adj is Adjective.SIZE_LARGEST
    need_beyond = cond.visual == "DIFFERENT"
    options = []
    for s in levels:
        below = [x for x in levels if (x < s if larger_wins else x > s)]
        beyond = [x for x in levels if (x > s if larger_wins else x < s)]
        if n_visible_others and not below:
            continue
        if need_beyond and not beyond:
            continue
        options.append((s, below, beyond))
    if not options:
        raise _Retry("b_multiple_matches", "pool lacks the size levels this adjective needs")
    return _pick(rng, options)


def _attempt(cond: DirectorCondition, fill: float, related: float, library: Library, rng):
    k = int(round(fill * 16))
    different = cond.visual == "DIFFERENT"
    is_none = cond.adjective is Adjective.NONE
    needed = (1 if is_none else 2) + (1 if different else 0)
    if k < needed:
        raise GenerationError("e_fill", f"{k} occupied cells cannot hold {needed} required items")

    desc, pool, others = _choose_description(rng, library, cond)
    n_occ = int(rng.integers(OCCLUDED_RANGE[0], OCCLUDED_RANGE[1] + 1))
    occluded = set(int(i) for i in rng.choice(16, n_occ, replace=False))
    positions = [(i % 4, i // 4) for i in range(16)]
    visible_pos = [p for i, p in enumerate(positions) if i not in occluded]
    occluded_pos = [p for i, p in enumerate(positions) if i in occluded]
    mine = cond.pov is Pov.MINE
    want = min(max(int(round(related * (k - 1))), _min_related(cond)), k - 1)

    # target cell and the cells its visible / occluded companions may use
    if cond.adjective.kind in ("VERTICAL", "HORIZONTAL"):
        def key(p):
            return extremity(cond.adjective, p[0], p[1], 0, mine)

        options = []
        for t in visible_pos:
            lower = [p for p in visible_pos if key(p) < key(t)]
            beyond = [p for p in occluded_pos if key(p) > key(t)]
            if not lower or (different and not beyond):
                continue
            cap = len(lower) + (n_occ if different else 0)
            options.append((t, lower, beyond, cap))
        if not options:
            raise _Retry("d_occluded_competitor", "no target cell satisfies the spatial ordering")
        roomy = [o for o in options if o[3] >= want]
        target, vis_slots, beyond_slots, cap = _pick(rng, roomy or [max(options, key=lambda o: o[3])])
    else:
        target = _pick(rng, visible_pos)
        vis_slots = [p for p in visible_pos if p != target]
        beyond_slots = list(occluded_pos)
        cap = (0 if is_none else len(vis_slots)) + (n_occ if different else 0)

    m = max(_min_related(cond), min(want, cap, k - 1))
    if is_none:
        n_vis, n_hidden = 0, (m if different else 0)
    elif not different:
        n_vis, n_hidden = m, 0
    else:
        lo = max(1, m - len(vis_slots))
        hi = min(n_occ, m - 1)
        if lo > hi:
            raise _Retry("f_related", "cannot split matches between visible and occluded cells")
        n_hidden = int(rng.integers(lo, hi + 1))
        n_vis = m - n_hidden
    if n_vis > len(vis_slots) or n_hidden > n_occ:
        raise _Retry("f_related", "not enough cells for matching distractors")

    order = rng.permutation(len(vis_slots))
    vis_cells = [vis_slots[int(i)] for i in order[:n_vis]]
    hidden_cells = []
    if n_hidden:
        if different and not is_none and cond.adjective.kind != "SIZE":
            first = _pick(rng, beyond_slots)
        else:
            first = _pick(rng, occluded_pos)
        rest = [p for p in occluded_pos if p != first]
        perm = rng.permutation(len(rest))
        hidden_cells = [first] + [rest[int(i)] for i in perm[: n_hidden - 1]]

    placed: dict[tuple[int, int], object] = {}
    sizes = _target_sizes(rng, cond, pool, n_vis)

    def from_pool(level=None, levels=None):
        cands = pool
        if level is not None:
            cands = [i for i in pool if i.size_level == level]
        elif levels is not None:
            cands = [i for i in pool if i.size_level in levels]
        if not cands:
            raise _Retry("b_multiple_matches", "pool has no item at the required size")
        return _pick(rng, cands)

    if sizes is None:
        placed[target] = from_pool()
        for p in vis_cells + hidden_cells:
            placed[p] = from_pool()
    else:
        s_t, below, beyond = sizes
        placed[target] = from_pool(level=s_t)
        for p in vis_cells:
            placed[p] = from_pool(levels=below)
        if hidden_cells:
            placed[hidden_cells[0]] = from_pool(levels=beyond) if different else from_pool()
            for p in hidden_cells[1:]:
                placed[p] = from_pool()

    free = [p for p in positions if p not in placed]
    n_plain = k - len(placed)
    if n_plain > len(free) or n_plain < 0:
        raise _Retry("e_fill", "too many matching items for the requested fill")
    perm = rng.permutation(len(free))
    for i in perm[:n_plain]:
        placed[free[int(i)]] = _pick(rng, others)

    cells = tuple(
        Cell(i in occluded, placed.get(positions[i])) for i in range(16)
    )
    instruction = synthesize_instruction(desc, cond.adjective, cond.pov, library)
    return Grid(cells), instruction, cell_ref(*target)


def generate_trial(
    condition: DirectorCondition,
    fill_proportion: float,
    related_proportion: float,
    library: Library,
    seed: int,
    index: int = 0,
    trial_id: str | None = None,
    max_attempts: int = MAX_ATTEMPTS,
) -> DirectorTrial:
    """Sample a grid for ``condition``; resample up to ``max_attempts`` times."""
    if not 0 < fill_proportion <= 1 or not 0 < related_proportion <= 1:
        raise ValueError("fill and related proportions must lie in (0, 1]")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))
    trial_id = trial_id or f"director-custom-{seed}-{index:05}"
    last = ("unknown", "")
    for attempt in range(max_attempts):
        try:
            grid, instruction, target = _attempt(condition, fill_proportion, related_proportion, library, rng)
        except _Retry as exc:
            last = (exc.constraint, exc.detail)
            continue
        trial = DirectorTrial(
            trial_id=trial_id,
            grid=grid,
            instruction=instruction,
            condition=condition,
            fill_proportion=fill_proportion,
            related_proportion=related_proportion,
            ground_truth=target,
            seed_record={"seed": int(seed), "index": int(index), "attempt": attempt,
                         "occluded": grid.occluded_count},
        )
        report = validate_trial(trial, library)
        if report.ok:
            return trial
        name = report.failures[0]
        last = (name, report.checks[name][1])
    raise GenerationError(*last)


def set_name(related_proportion: float) -> str:
    return f"rel{int(round(related_proportion * 100)):02d}"


def generate_dataset(
    n: int,
    seed: int,
    related_proportion: float,
    fill_proportion: float = 0.6,
    library: Library | None = None,
    conditions: list[DirectorCondition] | None = None,
) -> list[DirectorTrial]:
    """``n`` trials cycling through ``conditions`` (the full crossed design by default)."""
    from .director import load_library

    library = library or load_library()
    conditions = conditions or condition_grid()
    name = set_name(related_proportion)
    return [
        generate_trial(
            conditions[i % len(conditions)],
            fill_proportion,
            related_proportion,
            library,
            seed,
            index=i,
            trial_id=f"director-{name}-{seed}-{i:05}",
        )
        for i in range(n)
    ]
