"""On-disk datasets and result stores.

Dataset layout::

    dir/manifest.json    generator config, seed, sizes, chance levels, sha256
    dir/trials.jsonl     one trial per line, generation order
    dir/images/*.png     one image per RFT scene or Director trial
    dir/library.json     item library (Director datasets only)

Results live in ``results.jsonl`` beside a small ``store.json`` naming the
dataset hash they belong to.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
import shutil
import tempfile
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .analysis import chance_levels
from .ascii_grid import render_director_ascii
from .director import DirectorCondition, DirectorTrial, Library, load_library
from .director import trial_from_dict as director_from_dict
from .director import trial_to_dict as director_to_dict
from .director_gen import generate_dataset
from .render import render_trial_image
from .rft import RftConfig, RftTrial, generate_set
from .rft import trial_from_dict as rft_from_dict
from .rft import trial_to_dict as rft_to_dict
from .scoring import NORMALIZATION_VERSION


class IntegrityError(RuntimeError):
    pass


class DatasetLoadError(RuntimeError):
    pass


class DuplicateResultError(ValueError):
    pass


def dumps_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class DatasetManifest:
    toolkit_version: str
    task: str
    generator: dict
    seed: int
    n: int
    n_trials: int
    chance_levels: dict
    created: str
    trials_sha256: str
    scoring_normalization: str = NORMALIZATION_VERSION
    images: bool = True
    ascii: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        return cls(**d)


# generation config round trip


def rft_generator(rft_set, n, seed, config: RftConfig | None = None, questions=None) -> dict:
    config = config or RftConfig()
    return {
        "task": "rft",
        "set": str(getattr(rft_set, "value", rft_set)),
        "n": int(n),
        "seed": int(seed),
        "questions": [str(getattr(q, "value", q)) for q in questions] if questions else None,
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(config).items()},
    }


def director_generator(n, seed, related, fill=0.6, conditions=None, library: Library | None = None) -> dict:
    library = library or load_library()
    return {
        "task": "director",
        "n": int(n),
        "seed": int(seed),
        "related": float(related),
        "fill": float(fill),
        "conditions": [
            {"visual": c.visual, "adjective": c.adjective.value, "pov": c.pov.value} for c in conditions
        ] if conditions else None,
        "library_sha256": sha256_bytes(dumps_line(library.to_dict()).encode()),
    }


def generate_from_config(gen: dict, library: Library | None = None) -> list:
    """Rebuild the trial list described by a manifest's ``generator`` block."""
    if gen["task"] == "rft":
        return generate_set(gen["set"], gen["n"], gen["seed"], RftConfig.from_dict(gen["config"]),
                            questions=gen.get("questions"))
    if gen["task"] == "director":
        library = library or load_library()
        if sha256_bytes(dumps_line(library.to_dict()).encode()) != gen["library_sha256"]:
            raise IntegrityError("item library differs from the one the dataset was generated with")
        conds = gen.get("conditions")
        conditions = [DirectorCondition(c["visual"], c["adjective"], c["pov"]) for c in conds] if conds else None
        return generate_dataset(gen["n"], gen["seed"], gen["related"], gen["fill"], library, conditions)
    raise ValueError(f"unknown task {gen['task']!r}")


# dataset IO


def image_name(trial) -> str:
    key = trial.scene_id if isinstance(trial, RftTrial) else trial.trial_id
    return f"images/{key}.png"


def trial_record(trial, ascii_text: str | None = None) -> dict:
    if isinstance(trial, RftTrial):
        d = rft_to_dict(trial)
    else:
        d = director_to_dict(trial)
        if ascii_text is not None:
            d["ascii"] = ascii_text
    d["image"] = image_name(trial)
    return d


def serialize_trials(trials, ascii: bool = False) -> bytes:
    lines = []
    for t in trials:
        text = render_director_ascii(t.grid) if ascii and isinstance(t, DirectorTrial) else None
        lines.append(dumps_line(trial_record(t, text)) + "\n")
    return "".join(lines).encode("utf-8")


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()


def write_dataset(
    trials,
    out_dir,
    generator: dict,
    images: bool = True,
    ascii: bool = False,
    library: Library | None = None,
    clock=_now,
) -> DatasetManifest:
    """Write a dataset atomically: everything goes to a sibling temp dir that
    is renamed into place only when complete. On failure the temp dir is
    kept (as ``.<name>.partial-*``) for inspection and ``out_dir`` is untouched."""
    trials = list(trials)
    if not trials:
        raise ValueError("no trials to write")
    ids = [t.trial_id for t in trials]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate trial ids")
    out = Path(out_dir)
    if out.exists() and (not out.is_dir() or any(out.iterdir())):
        raise FileExistsError(f"{out} exists and is not an empty directory")
    parent = out.parent if str(out.parent) else Path(".")
    if not parent.is_dir():
        raise FileNotFoundError(f"parent directory {parent} does not exist")
    if not os.access(parent, os.W_OK):
        raise PermissionError(f"{parent} is not writable")
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.partial-", dir=parent))
    # on any failure below, tmp stays behind as quarantine
    data = serialize_trials(trials, ascii)
    (tmp / "trials.jsonl").write_bytes(data)
    task = "rft" if isinstance(trials[0], RftTrial) else "director"
    if images:
        (tmp / "images").mkdir()
        seen = set()
        for t in trials:
            name = image_name(t)
            if name in seen:
                continue
            seen.add(name)
            (tmp / name).write_bytes(render_trial_image(t).png)
    if task == "director":
        lib = library or load_library()
        (tmp / "library.json").write_text(json.dumps(lib.to_dict(), indent=1, sort_keys=True) + "\n")
    manifest = DatasetManifest(
        toolkit_version=__version__,
        task=task,
        generator=generator,
        seed=int(generator.get("seed", 0)),
        n=int(generator.get("n", len(trials))),
        n_trials=len(trials),
        chance_levels=chance_levels(),
        created=clock(),
        trials_sha256=sha256_bytes(data),
        images=images,
        ascii=ascii,
    )
    (tmp / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    if out.exists():
        out.rmdir()
    os.replace(tmp, out)
    return manifest


def read_manifest(path) -> DatasetManifest:
    p = Path(path) / "manifest.json"
    if not p.is_file():
        raise DatasetLoadError(f"missing {p}")
    return DatasetManifest.from_dict(json.loads(p.read_text()))


def read_dataset(path, check_images: bool = True):
    """Return ``(trials, manifest)`` after verifying the trials hash."""
    d = Path(path)
    manifest = read_manifest(d)
    tp = d / "trials.jsonl"
    if not tp.is_file():
        raise DatasetLoadError(f"missing {tp}")
    data = tp.read_bytes()
    digest = sha256_bytes(data)
    if digest != manifest.trials_sha256:
        raise IntegrityError(f"trials.jsonl hash {digest[:12]} does not match manifest {manifest.trials_sha256[:12]}")
    library = None
    if manifest.task == "director":
        lp = d / "library.json"
        if not lp.is_file():
            raise DatasetLoadError(f"missing {lp}")
        library = Library.from_dict(json.loads(lp.read_text()))
    trials = []
    for lineno, line in enumerate(data.decode("utf-8").splitlines(), 1):
        rec = json.loads(line)
        img = rec.pop("image", None)
        rec.pop("ascii", None)
        if check_images and manifest.images and img and not (d / img).is_file():
            raise DatasetLoadError(f"trial {rec.get('trial_id')}: image {img} is missing")
        if rec.get("task") == "rft":
            trials.append(rft_from_dict(rec))
        elif rec.get("task") == "director":
            trials.append(director_from_dict(rec, library))
        else:
            raise DatasetLoadError(f"line {lineno}: unknown task {rec.get('task')!r}")
    return trials, manifest


def read_ascii(path) -> dict:
    """trial_id -> embedded ASCII grid, for datasets written with ``ascii``."""
    out = {}
    for line in (Path(path) / "trials.jsonl").read_text().splitlines():
        rec = json.loads(line)
        if "ascii" in rec:
            out[rec["trial_id"]] = rec["ascii"]
    return out


def regenerate(path, library: Library | None = None) -> bytes:
    """Regenerate trials.jsonl bytes from a dataset's manifest."""
    manifest = read_manifest(path)
    if manifest.task == "director" and library is None:
        library = Library.from_dict(json.loads((Path(path) / "library.json").read_text()))
    trials = generate_from_config(manifest.generator, library)
    return serialize_trials(trials, manifest.ascii)


# results


class ResultStore:
    """Append-only JSONL of result records, one per (trial_id, subject)."""

    def __init__(self, path, dataset_sha256: str | None = None, dataset_dir: str | None = None):
        self.dir = Path(path)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.file = self.dir / "results.jsonl"
        meta_path = self.dir / "store.json"
        if meta_path.is_file():
            meta = json.loads(meta_path.read_text())
            if dataset_sha256 and meta.get("dataset_sha256") != dataset_sha256:
                raise IntegrityError(
                    f"result store {self.dir} belongs to dataset {meta.get('dataset_sha256', '')[:12]}, "
                    f"not {dataset_sha256[:12]}"
                )
            self.meta = meta
        else:
            self.meta = {"dataset_sha256": dataset_sha256, "dataset_dir": dataset_dir}
            meta_path.write_text(json.dumps(self.meta, indent=2, sort_keys=True) + "\n")
        self._lock = threading.Lock()
        self._pairs = {(r["trial_id"], r["subject"]) for r in self.records()}

    def records(self) -> list[dict]:
        if not self.file.is_file():
            return []
        out = []
        for line in self.file.read_text().splitlines():
            if line.strip():
                out.append(json.loads(line))
        return out

    def completed_pairs(self) -> set[tuple[str, str]]:
        with self._lock:
            return set(self._pairs)

    def append_result(self, record) -> None:
        d = record if isinstance(record, dict) else record.to_dict()
        pair = (d["trial_id"], d["subject"])
        line = (dumps_line(d) + "\n").encode("utf-8")
        with self._lock:
            if pair in self._pairs:
                raise DuplicateResultError(f"result for {pair[0]} / {pair[1]} already stored")
            fd = os.open(self.file, os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
            try:
                os.write(fd, line)
            finally:
                os.close(fd)
            self._pairs.add(pair)


def write_jsonl(path, records) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("".join(dumps_line(r) + "\n" for r in records))
    os.replace(tmp, path)


def read_jsonl(path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]


def discard_partials(parent) -> int:
    """Remove quarantined partial dataset dirs under ``parent``."""
    n = 0
    for p in Path(parent).glob(".*.partial-*"):
        shutil.rmtree(p)
        n += 1
    return n
