"""Director Task data model: item library, shelf grid, descriptions and instructions.

Grid coordinates are given from the participant's side: columns A-D run
left to right, rows 1-4 top to bottom. The director faces the grid from
the other side, so the participant's column A is the director's rightmost.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

COLUMNS = "ABCD"
ROWS = "1234"
N_CELLS = 16
_REF = re.compile(r"^([A-D])([1-4])$")


class Pattern(str, enum.Enum):
    PLAIN = "plain"
    STRIPED = "striped"


class Adjective(str, enum.Enum):
    NONE = "NONE"
    SIZE_LARGEST = "SIZE_LARGEST"
    SIZE_SMALLEST = "SIZE_SMALLEST"
    V_TOPMOST = "V_TOPMOST"
    V_BOTTOMMOST = "V_BOTTOMMOST"
    H_LEFTMOST = "H_LEFTMOST"
    H_RIGHTMOST = "H_RIGHTMOST"

    @property
    def word(self) -> str:
        return _ADJ_WORDS[self]

    @property
    def kind(self) -> str:
        """NONE, SIZE, VERTICAL or HORIZONTAL."""
        if self is Adjective.NONE:
            return "NONE"
        return {"SIZE": "SIZE", "V": "VERTICAL", "H": "HORIZONTAL"}[self.value.split("_")[0]]

    @property
    def mirrored(self) -> "Adjective":
        return {
            Adjective.H_LEFTMOST: Adjective.H_RIGHTMOST,
            Adjective.H_RIGHTMOST: Adjective.H_LEFTMOST,
        }.get(self, self)


_ADJ_WORDS = {
    Adjective.NONE: "",
    Adjective.SIZE_LARGEST: "largest",
    Adjective.SIZE_SMALLEST: "smallest",
    Adjective.V_TOPMOST: "topmost",
    Adjective.V_BOTTOMMOST: "bottommost",
    Adjective.H_LEFTMOST: "leftmost",
    Adjective.H_RIGHTMOST: "rightmost",
}


class Pov(str, enum.Enum):
    MINE = "MINE"
    YOURS = "YOURS"


@dataclass(frozen=True)
class Item:
    item_id: str
    display_name: str
    categories: tuple[str, ...]
    color: str
    pattern: Pattern
    affordances: tuple[str, ...]
    size_level: int
    shape: str = "box"
    base: str = ""

    def attribute_terms(self) -> list[str]:
        terms = [self.color]
        if self.pattern is Pattern.STRIPED:
            terms.append("striped")
        return terms + list(self.affordances) + list(self.categories)


class Library:
    """Closed item inventory plus the vocabularies used to describe items."""

    def __init__(self, items, categories: dict, affordances: dict, version: int = 1):
        self.items: dict[str, Item] = {}
        for item in items:
            if item.size_level not in (0, 1, 2):
                raise ValueError(f"{item.item_id}: size_level must be 0, 1 or 2")
            if item.item_id in self.items:
                raise ValueError(f"duplicate item id {item.item_id}")
            self.items[item.item_id] = item
        self.categories = dict(categories)
        self.affordances = dict(affordances)
        self.version = version
        for item in self.items.values():
            unknown = set(item.categories) - set(self.categories)
            unknown |= set(item.affordances) - set(self.affordances)
            if unknown:
                raise ValueError(f"{item.item_id}: unknown vocabulary {sorted(unknown)}")

    def __getitem__(self, item_id: str) -> Item:
        return self.items[item_id]

    def __contains__(self, item_id) -> bool:
        return item_id in self.items

    def __len__(self):
        return len(self.items)

    @property
    def colors(self) -> list[str]:
        return sorted({i.color for i in self.items.values()})

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "categories": self.categories,
            "affordances": self.affordances,
            "items": [
                {
                    "id": i.item_id,
                    "name": i.display_name,
                    "base": i.base,
                    "categories": list(i.categories),
                    "color": i.color,
                    "pattern": i.pattern.value,
                    "affordances": list(i.affordances),
                    "size": i.size_level,
                    "shape": i.shape,
                }
                for i in self.items.values()
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Library":
        items = [
            Item(
                item_id=d["id"],
                display_name=d.get("name", d["id"].replace("_", " ")),
                categories=tuple(d["categories"]),
                color=d["color"],
                pattern=Pattern(d.get("pattern", "plain")),
                affordances=tuple(d.get("affordances", ())),
                size_level=int(d["size"]),
                shape=d.get("shape", "box"),
                base=d.get("base", d["id"]),
            )
            for d in doc["items"]
        ]
        return cls(items, doc["categories"], doc["affordances"], doc.get("version", 1))


def load_library(path: str | Path | None = None) -> Library:
    """Load an item library JSON document; the bundled one by default."""
    if path is None:
        text = resources.files("vptbench").joinpath("data/items.json").read_text()
    else:
        text = Path(path).read_text()
    return Library.from_dict(json.loads(text))


@dataclass(frozen=True)
class Cell:
    occluded: bool = False
    item: Item | None = None


@dataclass(frozen=True)
class Grid:
    cells: tuple[Cell, ...]  # row-major, 16 entries

    def __post_init__(self):
        if len(self.cells) != N_CELLS:
            raise ValueError(f"grid needs {N_CELLS} cells, got {len(self.cells)}")

    def at(self, col: int, row: int) -> Cell:
        return self.cells[row * 4 + col]

    def __getitem__(self, ref: str) -> Cell:
        col, row = parse_ref(ref)
        return self.at(col, row)

    def positions(self):
        """Yield (col, row, cell) in row-major order."""
        for idx, cell in enumerate(self.cells):
            yield idx % 4, idx // 4, cell

    @property
    def occupied(self) -> int:
        return sum(c.item is not None for c in self.cells)

    @property
    def occluded_count(self) -> int:
        return sum(c.occluded for c in self.cells)


def cell_ref(col: int, row: int) -> str:
    return f"{COLUMNS[col]}{ROWS[row]}"


def parse_ref(ref: str) -> tuple[int, int]:
    m = _REF.match(ref)
    if not m:
        raise ValueError(f"bad cell reference {ref!r}")
    return COLUMNS.index(m.group(1)), ROWS.index(m.group(2))


ALL_REFS = tuple(cell_ref(c, r) for r in range(4) for c in range(4))


@dataclass(frozen=True)
class Description:
    """Conjunction of item attributes; ``noun`` is a category or an affordance tag."""

    noun: str
    noun_kind: str = "category"  # or "affordance"
    color: str | None = None
    pattern: Pattern | None = None

    def matches(self, item: Item | None) -> bool:
        if item is None:
            return False
        if self.noun_kind == "category":
            if self.noun not in item.categories:
                return False
        elif self.noun not in item.affordances:
            return False
        if self.color is not None and item.color != self.color:
            return False
        if self.pattern is not None and item.pattern is not self.pattern:
            return False
        return True

    def phrase(self, library: Library) -> str:
        modifiers = []
        if self.color:
            modifiers.append(self.color)
        if self.pattern is Pattern.STRIPED:
            modifiers.append("striped")
        elif self.pattern is Pattern.PLAIN:
            modifiers.append("non-striped")
        if self.noun_kind == "category":
            noun = library.categories[self.noun]
        else:
            noun = f"item that {library.affordances[self.noun]}"
        if modifiers:
            return f"{', '.join(modifiers)} {noun}"
        return noun

    def to_dict(self) -> dict:
        return {
            "noun": self.noun,
            "noun_kind": self.noun_kind,
            "color": self.color,
            "pattern": self.pattern.value if self.pattern else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Description":
        return cls(
            noun=d["noun"],
            noun_kind=d.get("noun_kind", "category"),
            color=d.get("color"),
            pattern=Pattern(d["pattern"]) if d.get("pattern") else None,
        )


@dataclass(frozen=True)
class Instruction:
    description: Description
    adjective: Adjective
    pov: Pov
    surface_text: str


def synthesize_instruction(
    description: Description, adjective: Adjective | str, pov: Pov | str, library: Library
) -> Instruction:
    adjective, pov = Adjective(adjective), Pov(pov)
    phrase = description.phrase(library)
    if adjective is not Adjective.NONE:
        phrase = f"{adjective.word} {phrase}"
    whose = "my" if pov is Pov.MINE else "your"
    text = f"Please select the {phrase} from {whose} point of view"
    return Instruction(description, adjective, pov, text)


@dataclass(frozen=True)
class DirectorCondition:
    visual: str  # SHARED | DIFFERENT
    adjective: Adjective
    pov: Pov

    def __post_init__(self):
        if self.visual not in ("SHARED", "DIFFERENT"):
            raise ValueError(f"visual must be SHARED or DIFFERENT, got {self.visual!r}")
        object.__setattr__(self, "adjective", Adjective(self.adjective))
        object.__setattr__(self, "pov", Pov(self.pov))

    @property
    def spatial(self) -> str:
        kind = self.adjective.kind
        if kind == "HORIZONTAL":
            return "DIFFERENT"
        if kind == "VERTICAL":
            return "SHARED"
        return "N/A"

    @property
    def adjective_class(self) -> str:
        kind = self.adjective.kind
        return "SPATIAL" if kind in ("HORIZONTAL", "VERTICAL") else kind

    def to_dict(self) -> dict:
        return {
            "visual": self.visual,
            "spatial": self.spatial,
            "adjective_class": self.adjective_class,
            "adjective": self.adjective.value,
            "pov": self.pov.value,
        }


def condition_grid() -> list[DirectorCondition]:
    """Fully crossed design: visual x adjective x point of view (28 cells)."""
    return [
        DirectorCondition(v, a, p)
        for v in ("SHARED", "DIFFERENT")
        for a in Adjective
        for p in Pov
    ]


@dataclass(frozen=True)
class DirectorTrial:
    trial_id: str
    grid: Grid
    instruction: Instruction
    condition: DirectorCondition
    fill_proportion: float
    related_proportion: float
    ground_truth: str
    seed_record: dict = field(default_factory=dict)

    @property
    def task(self) -> str:
        return "director"


def grid_to_list(grid: Grid) -> list[dict]:
    return [
        {"occluded": c.occluded, "item": c.item.item_id if c.item else None}
        for c in grid.cells
    ]


def grid_from_list(cells: list[dict], library: Library) -> Grid:
    return Grid(
        tuple(
            Cell(bool(c["occluded"]), library[c["item"]] if c["item"] else None)
            for c in cells
        )
    )


def trial_to_dict(trial: DirectorTrial) -> dict:
    return {
        "task": "director",
        "trial_id": trial.trial_id,
        "grid": grid_to_list(trial.grid),
        "instruction": {
            "description": trial.instruction.description.to_dict(),
            "adjective": trial.instruction.adjective.value,
            "pov": trial.instruction.pov.value,
            "surface_text": trial.instruction.surface_text,
        },
        "condition": trial.condition.to_dict(),
        "fill_proportion": trial.fill_proportion,
        "related_proportion": trial.related_proportion,
        "ground_truth": trial.ground_truth,
        "seed_record": trial.seed_record,
    }


def trial_from_dict(d: dict, library: Library) -> DirectorTrial:
    ins = d["instruction"]
    cond = d["condition"]
    return DirectorTrial(
        trial_id=d["trial_id"],
        grid=grid_from_list(d["grid"], library),
        instruction=Instruction(
            Description.from_dict(ins["description"]),
            Adjective(ins["adjective"]),
            Pov(ins["pov"]),
            ins["surface_text"],
        ),
        condition=DirectorCondition(cond["visual"], cond["adjective"], cond["pov"]),
        fill_proportion=d["fill_proportion"],
        related_proportion=d["related_proportion"],
        ground_truth=d["ground_truth"],
        seed_record=d.get("seed_record", {}),
    )
