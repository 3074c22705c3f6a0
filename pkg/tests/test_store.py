import json
import os
import threading

import pytest

from vptbench import store as st_
from vptbench.director_gen import generate_dataset
from vptbench.harness import SubjectKind, SubjectSpec, run_battery
from vptbench.rft import RftSet, generate_set
from vptbench.store import (
    DatasetLoadError,
    DuplicateResultError,
    IntegrityError,
    ResultStore,
    director_generator,
    read_ascii,
    read_dataset,
    regenerate,
    rft_generator,
    write_dataset,
)

FIXED = lambda: "2020-01-01T00:00:00+00:00"  # noqa: E731


def _rft(tmp_path, name="ds", n=6, seed=3, images=True):
    trials = generate_set(RftSet.TEST_2, n, seed)
    m = write_dataset(trials, tmp_path / name, rft_generator(RftSet.TEST_2, n, seed), images=images, clock=FIXED)
    return trials, m


def test_round_trip_rft(tmp_path):
    trials, m = _rft(tmp_path)
    back, m2 = read_dataset(tmp_path / "ds")
    assert back == trials
    assert m2 == m and m.n == 6 and m.n_trials == 12
    assert m.chance_levels["TEST_2/VISUAL"] == 0.5
    # scenes share one image
    assert len(list((tmp_path / "ds" / "images").iterdir())) == 6


def test_round_trip_director_with_ascii(tmp_path, library):
    trials = generate_dataset(10, 2, 0.7, library=library)
    write_dataset(trials, tmp_path / "dd", director_generator(10, 2, 0.7, library=library), ascii=True,
                  images=False, library=library)
    back, m = read_dataset(tmp_path / "dd")
    assert back == trials and m.ascii and not m.images
    asc = read_ascii(tmp_path / "dd")
    assert set(asc) == {t.trial_id for t in trials}
    assert asc[trials[0].trial_id].startswith("=")


def test_tampered_trials_detected(tmp_path):
    _rft(tmp_path)
    p = tmp_path / "ds" / "trials.jsonl"
    p.write_bytes(p.read_bytes().replace(b'"LEFT"', b'"RIGHT"', 1))
    with pytest.raises(IntegrityError):
        read_dataset(tmp_path / "ds")


def test_missing_image_names_trial(tmp_path):
    trials, _ = _rft(tmp_path)
    os.remove(tmp_path / "ds" / st_.image_name(trials[4]))
    with pytest.raises(DatasetLoadError, match=trials[4].trial_id):
        read_dataset(tmp_path / "ds")
    assert read_dataset(tmp_path / "ds", check_images=False)[0] == trials


def test_missing_manifest(tmp_path):
    with pytest.raises(DatasetLoadError):
        read_dataset(tmp_path)


def test_refuses_non_empty_target(tmp_path):
    (tmp_path / "ds").mkdir()
    (tmp_path / "ds" / "x").write_text("")
    with pytest.raises(FileExistsError):
        _rft(tmp_path)


def test_missing_parent(tmp_path):
    trials = generate_set(RftSet.CONTROL_2, 1, 0)
    with pytest.raises(FileNotFoundError):
        write_dataset(trials, tmp_path / "no" / "ds", rft_generator("CONTROL_2", 1, 0))


def test_unwritable_parent(tmp_path, monkeypatch):
    # root ignores mode bits, so simulate the permission check
    monkeypatch.setattr(st_.os, "access", lambda p, mode: False)
    with pytest.raises(PermissionError):
        _rft(tmp_path)
    assert not (tmp_path / "ds").exists()


def test_failure_leaves_quarantine_only(tmp_path, monkeypatch):
    def boom(trial):
        raise RuntimeError("disk full")

    monkeypatch.setattr(st_, "render_trial_image", boom)
    with pytest.raises(RuntimeError):
        _rft(tmp_path)
    assert not (tmp_path / "ds").exists()
    leftovers = [p.name for p in tmp_path.iterdir()]
    assert len(leftovers) == 1 and leftovers[0].startswith(".ds.partial-")


def test_regenerate_reproduces_bytes(tmp_path, library):
    _rft(tmp_path, images=False)
    assert regenerate(tmp_path / "ds") == (tmp_path / "ds" / "trials.jsonl").read_bytes()
    trials = generate_dataset(28, 5, 0.5, library=library)
    write_dataset(trials, tmp_path / "dd", director_generator(28, 5, 0.5, library=library), images=False,
                  library=library)
    assert regenerate(tmp_path / "dd") == (tmp_path / "dd" / "trials.jsonl").read_bytes()


def test_image_bytes_deterministic(tmp_path):
    _rft(tmp_path, "a")
    _rft(tmp_path, "b")
    for p in sorted((tmp_path / "a" / "images").iterdir()):
        assert p.read_bytes() == (tmp_path / "b" / "images" / p.name).read_bytes()
    assert (tmp_path / "a" / "manifest.json").read_bytes() == (tmp_path / "b" / "manifest.json").read_bytes()


def test_changed_library_rejected(tmp_path, library):
    trials = generate_dataset(2, 5, 0.5, library=library)
    gen = director_generator(2, 5, 0.5, library=library)
    gen["library_sha256"] = "0" * 64
    with pytest.raises(IntegrityError):
        st_.generate_from_config(gen, library)
    assert trials


def test_result_store_duplicate(tmp_path):
    trials = generate_set(RftSet.CONTROL_2, 1, 0)
    store = ResultStore(tmp_path / "r", "abc")
    (rec, _) = run_battery(SubjectSpec(SubjectKind.ORACLE_AGENT), trials, store=store)
    with pytest.raises(DuplicateResultError):
        store.append_result(rec)
    assert len(store.records()) == 2
    # a fresh handle sees the persisted pairs
    assert ResultStore(tmp_path / "r", "abc").completed_pairs() == {(t.trial_id, "oracle") for t in trials}


def test_concurrent_appends(tmp_path):
    store = ResultStore(tmp_path / "r", "abc")
    payload = "x" * 5000

    def put(i):
        store.append_result({"trial_id": f"t{i}", "subject": "s", "pad": payload})

    threads = [threading.Thread(target=put, args=(i,)) for i in range(100)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    lines = (tmp_path / "r" / "results.jsonl").read_text().splitlines()
    assert len(lines) == 100
    assert {json.loads(l)["trial_id"] for l in lines} == {f"t{i}" for i in range(100)}


def test_jsonl_helpers(tmp_path):
    recs = [{"b": 1, "a": "é"}, {"c": [1, 2]}]
    st_.write_jsonl(tmp_path / "x.jsonl", recs)
    assert st_.read_jsonl(tmp_path / "x.jsonl") == recs
    assert (tmp_path / "x.jsonl").read_text().splitlines()[0] == '{"a":"é","b":1}'
