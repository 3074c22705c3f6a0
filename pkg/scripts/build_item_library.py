"""Write the bundled Director Task item library (src/vptbench/data/items.json).

Each base item comes in three sizes: ``<stem>_small`` (0), ``<stem>`` (1) and
``<stem>_large`` (2).
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "vptbench" / "data" / "items.json"

CATEGORIES = {
    "book": "book",
    "clothing": "item of clothing",
    "star": "star",
    "kitchenware": "piece of kitchenware",
    "food": "food item",
    "electronics": "electronic device",
    "container": "container",
}

AFFORDANCES = {
    "holds-water": "holds water",
    "stackable": "can be stacked",
    "edible": "can be eaten",
    "wearable": "can be worn",
}

# stem, category tags, color, pattern, affordances, icon shape
BASES = [
    ("blue_book", ["book"], "blue", "plain", ["stackable"], "book"),
    ("red_book", ["book"], "red", "plain", ["stackable"], "book"),
    ("green_book", ["book"], "green", "plain", ["stackable"], "book"),
    ("blue_striped_book", ["book"], "blue", "striped", ["stackable"], "book"),
    ("blue_shirt", ["clothing"], "blue", "plain", ["wearable"], "shirt"),
    ("blue_striped_shirt", ["clothing"], "blue", "striped", ["wearable"], "shirt"),
    ("red_shirt", ["clothing"], "red", "plain", ["wearable"], "shirt"),
    ("red_striped_shirt", ["clothing"], "red", "striped", ["wearable"], "shirt"),
    ("yellow_hat", ["clothing"], "yellow", "plain", ["wearable"], "hat"),
    ("green_striped_hat", ["clothing"], "green", "striped", ["wearable"], "hat"),
    ("yellow_star", ["star"], "yellow", "plain", [], "star"),
    ("red_star", ["star"], "red", "plain", [], "star"),
    ("blue_star", ["star"], "blue", "plain", [], "star"),
    ("green_striped_star", ["star"], "green", "striped", [], "star"),
    ("black_pot", ["kitchenware", "container"], "black", "plain", ["holds-water"], "pot"),
    ("white_mug", ["kitchenware", "container"], "white", "plain", ["holds-water"], "mug"),
    ("blue_striped_mug", ["kitchenware", "container"], "blue", "striped", ["holds-water"], "mug"),
    ("kitchen_knife", ["kitchenware"], "grey", "plain", [], "knife"),
    ("cookie", ["food"], "brown", "plain", ["edible", "stackable"], "cookie"),
    ("red_apple", ["food"], "red", "plain", ["edible"], "apple"),
    ("green_apple", ["food"], "green", "plain", ["edible"], "apple"),
    ("beatbox", ["electronics"], "black", "plain", [], "radio"),
    ("red_radio", ["electronics"], "red", "striped", [], "radio"),
    ("blue_vase", ["container"], "blue", "plain", ["holds-water"], "vase"),
    ("green_bucket", ["container"], "green", "plain", ["holds-water", "stackable"], "bucket"),
]

SIZES = ((0, "_small", "small "), (1, "", ""), (2, "_large", "large "))


def build() -> dict:
    items = []
    for stem, cats, color, pattern, affs, shape in BASES:
        label = stem.replace("_", " ")
        for size, suffix, prefix in SIZES:
            items.append(
                {
                    "id": stem + suffix,
                    "name": prefix + label,
                    "base": stem,
                    "categories": cats,
                    "color": color,
                    "pattern": pattern,
                    "affordances": affs,
                    "size": size,
                    "shape": shape,
                }
            )
    return {
        "version": 1,
        "categories": CATEGORIES,
        "affordances": AFFORDANCES,
        "items": items,
    }


if __name__ == "__main__":
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(build(), indent=2) + "\n")
    print(f"wrote {OUT}")
