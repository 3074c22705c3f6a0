"""Command line entry point: generate, evaluate, score, analyze, validate.

Exit status is 0 on success, 1 when the task itself fails (integrity or
validation errors) and 2 on usage errors (bad flags, missing inputs).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import defaultdict
from pathlib import Path

from . import __version__
from .analysis import aggregate, emit_report, error_vectors, join_results
from .director import DirectorCondition
from .director_gen import GenerationError, generate_dataset, validate_trial
from .harness import SetupError, SubjectSpec, Transcript, run_battery
from .oracle import answer
from .rft import RftSet, generate_set
from .scoring import score_response
from .store import (
    DatasetLoadError,
    IntegrityError,
    ResultStore,
    director_generator,
    read_ascii,
    read_dataset,
    regenerate,
    rft_generator,
    write_dataset,
    write_jsonl,
)

HELP_WIDTH = 80
log = logging.getLogger("vptbench")


class UsageError(Exception):
    pass


def _formatter(prog):
    return argparse.HelpFormatter(prog, width=HELP_WIDTH, max_help_position=30)


def _rft_set(text: str) -> RftSet:
    try:
        return RftSet(text.upper())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown set {text!r}; choose from {', '.join(s.value.lower() for s in RftSet)}"
        ) from None


def _condition(text: str) -> DirectorCondition:
    try:
        visual, adj, pov = text.upper().split(":")
        return DirectorCondition(visual, adj, pov)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bad condition {text!r}; expected VISUAL:ADJECTIVE:POV, e.g. DIFFERENT:H_LEFTMOST:MINE"
        ) from None


def _proportion(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1]")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="vptbench",
        description="Generate, administer and analyse perspective-taking benchmarks.",
        formatter_class=_formatter,
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress and debug output")
    sub = p.add_subparsers(dest="verb", metavar="VERB", required=True)

    g = sub.add_parser("generate", help="generate a dataset", formatter_class=_formatter,
                       description="Generate one Rotating Figure set or one Director dataset.")
    g.add_argument("--task", choices=("rft", "director"), required=True, help="which task to generate")
    g.add_argument("--set", dest="rft_set", type=_rft_set, metavar="NAME",
                   help="RFT set: control_1, control_2, test_1, test_2 or test_3")
    g.add_argument("--condition-grid", action="store_true",
                   help="Director: cycle through all 28 crossed conditions (the default)")
    g.add_argument("--condition", type=_condition, action="append", metavar="V:ADJ:POV",
                   help="Director: restrict to this condition; repeatable")
    g.add_argument("--n", type=_positive, required=True,
                   help="number of scenes (RFT) or trials (Director)")
    g.add_argument("--seed", type=int, required=True, help="master seed")
    g.add_argument("--out", type=Path, required=True, help="output dataset directory")
    g.add_argument("--ascii", action="store_true", help="Director: embed the ASCII grid in each trial")
    g.add_argument("--no-images", action="store_true", help="skip rendering PNG images")
    g.add_argument("--question", choices=("visual", "spatial"),
                   help="RFT: keep only this question per scene")
    g.add_argument("--related", type=_proportion, default=0.9,
                   help="Director: related-item proportion (default 0.9)")
    g.add_argument("--fill", type=_proportion, default=0.6,
                   help="Director: grid fill proportion (default 0.6)")

    e = sub.add_parser("evaluate", help="run a subject over a dataset", formatter_class=_formatter,
                       description="Administer every trial of a dataset to one subject.")
    e.add_argument("--dataset", type=Path, required=True, help="dataset directory")
    e.add_argument("--subject", required=True,
                   help="oracle, egocentric, mirror, random or remote:<config.json>")
    e.add_argument("--parallelism", type=_positive, default=1, help="trials in flight (default 1)")
    e.add_argument("--rate-limit", type=float, default=None, metavar="RPS",
                   help="remote requests per second")
    e.add_argument("--seed", type=int, default=0, help="seed for the random agent")
    e.add_argument("--ascii", action="store_true",
                   help="present Director trials as ASCII text instead of images")
    e.add_argument("--out", type=Path, required=True, help="result store directory")

    s = sub.add_parser("score", help="rescore stored results", formatter_class=_formatter,
                       description="Rescore transcripts and write scored.jsonl.")
    s.add_argument("--results", type=Path, required=True, help="result store directory")
    s.add_argument("--dataset", type=Path, help="dataset directory (default: from the store)")
    s.add_argument("--out", type=Path, help="output JSONL (default RESULTS/scored.jsonl)")

    a = sub.add_parser("analyze", help="aggregate results into CSV and SVG", formatter_class=_formatter,
                       description="Aggregate accuracy and write CSV and SVG reports.")
    a.add_argument("--results", type=Path, required=True, help="result store directory")
    a.add_argument("--dataset", type=Path, help="dataset directory (default: from the store)")
    a.add_argument("--bins", type=int, choices=(4, 12, 24), default=4,
                   help="RFT angle bins (default 4)")
    a.add_argument("--signed", action=argparse.BooleanOptionalAction, default=None,
                   help="bucket signed rotation instead of folded disparity (default: on for 12/24)")
    a.add_argument("--corner-removed", action="store_true", help="drop corner-flagged RFT trials")
    a.add_argument("--error-vectors", action="store_true", help="Director: emit error-vector histograms")
    a.add_argument("--report", type=Path, required=True, help="output report directory")

    v = sub.add_parser("validate", help="check a dataset", formatter_class=_formatter,
                       description="Verify hashes, regenerate from the manifest, re-check every "
                                   "trial against the oracle and the Director constraints.")
    v.add_argument("--dataset", type=Path, required=True, help="dataset directory")
    return p


def _require_dir(path: Path, what: str) -> None:
    if not path.is_dir():
        raise UsageError(f"{what} {path} does not exist")


def cmd_generate(args, argv) -> int:
    if args.task == "rft":
        if args.rft_set is None:
            raise UsageError("--set is required for --task rft")
        if args.condition or args.condition_grid:
            raise UsageError("--condition/--condition-grid apply to --task director only")
        questions = None
        if args.question:
            if args.rft_set is RftSet.TEST_3:
                raise UsageError("test_3 has a single question; drop --question")
            questions = (args.question.upper(),)
        trials = generate_set(args.rft_set, args.n, args.seed, questions=questions)
        gen = rft_generator(args.rft_set, args.n, args.seed, questions=questions)
    else:
        if args.rft_set is not None or args.question:
            raise UsageError("--set/--question apply to --task rft only")
        conditions = args.condition
        trials = generate_dataset(args.n, args.seed, args.related, args.fill, conditions=conditions)
        gen = director_generator(args.n, args.seed, args.related, args.fill, conditions)
    manifest = write_dataset(trials, args.out, gen, images=not args.no_images, ascii=args.ascii)
    extra_path = args.out / "command.json"
    extra_path.write_text(json.dumps({"argv": argv}, indent=2) + "\n")
    print(f"wrote {manifest.n_trials} trials to {args.out} (sha256 {manifest.trials_sha256[:12]})")
    return 0


def _dataset_for(results: Path, override: Path | None) -> Path:
    if override is not None:
        return override
    meta = results / "store.json"
    if not meta.is_file():
        raise UsageError(f"{results} is not a result store; pass --dataset")
    d = json.loads(meta.read_text()).get("dataset_dir")
    if not d:
        raise UsageError("result store does not name its dataset; pass --dataset")
    return Path(d)


def cmd_evaluate(args, argv) -> int:
    _require_dir(args.dataset, "dataset")
    trials, manifest = read_dataset(args.dataset)
    spec = SubjectSpec.parse(args.subject, seed=args.seed)
    store = ResultStore(args.out, manifest.trials_sha256, str(args.dataset.resolve()))
    (args.out / "command.json").write_text(json.dumps({"argv": argv}, indent=2) + "\n")

    ascii_source = None
    if args.ascii:
        if manifest.task != "director":
            raise UsageError("--ascii applies to Director datasets")
        embedded = read_ascii(args.dataset)
        if len(embedded) != len(trials):
            raise UsageError("dataset was generated without --ascii")
        ascii_source = lambda t: embedded[t.trial_id]  # noqa: E731

    def image_source(trial):
        from .store import image_name

        return (args.dataset / image_name(trial)).read_bytes()

    records = run_battery(
        spec, trials, parallelism=args.parallelism, rate_limit=args.rate_limit, store=store,
        image_source=image_source if manifest.images else None, ascii_source=ascii_source,
    )
    total = len(store.completed_pairs())
    failed = sum(1 for r in records if r.transcript.failure_reason)
    print(f"{spec.subject_id}: {len(records)} new results, {total} stored, {failed} failed")
    return 0


def cmd_score(args, argv) -> int:
    _require_dir(args.results, "result store")
    dataset = _dataset_for(args.results, args.dataset)
    _require_dir(dataset, "dataset")
    trials, manifest = read_dataset(dataset, check_images=False)
    by_id = {t.trial_id: t for t in trials}
    store = ResultStore(args.results, manifest.trials_sha256)
    scored = []
    for rec in store.records():
        trial = by_id.get(rec["trial_id"])
        if trial is None:
            raise IntegrityError(f"result for unknown trial {rec['trial_id']}")
        tr = Transcript.from_dict(rec["transcript"])
        s = score_response(trial, tr.answer, rec["subject"], tr.failure_reason)
        scored.append({**s.to_dict(), "scoring_normalization": manifest.scoring_normalization})
    out = args.out or args.results / "scored.jsonl"
    write_jsonl(out, scored)
    counts = defaultdict(lambda: [0, 0, 0])
    for s in scored:
        c = counts[s["subject"]]
        c[0] += 1
        c[1] += s["correct"]
        c[2] += not s["valid"]
    for subject, (n, k, bad) in sorted(counts.items()):
        print(f"{subject}: n={n} accuracy={k / n:.4f} invalid={bad / n:.4f}")
    return 0


def cmd_analyze(args, argv) -> int:
    _require_dir(args.results, "result store")
    dataset = _dataset_for(args.results, args.dataset)
    _require_dir(dataset, "dataset")
    trials, manifest = read_dataset(dataset, check_images=False)
    store = ResultStore(args.results, manifest.trials_sha256)
    records = store.records()
    if not records:
        raise UsageError(f"{args.results} holds no results")
    rows = join_results(records, trials)
    args.report.mkdir(parents=True, exist_ok=True)
    (args.report / "command.json").write_text(json.dumps({"argv": argv}, indent=2) + "\n")
    written = []
    by_subject = defaultdict(list)
    for r in rows:
        by_subject[r["subject"]].append(r)
    for subject, srows in sorted(by_subject.items()):
        task = srows[0]["task"]
        if task == "rft":
            signed = args.signed if args.signed is not None else args.bins != 4
            summary = aggregate(srows, ("subject", "task", "set", "question_type"),
                                corner_removed=args.corner_removed)
            curve = aggregate(srows, ("subject", "task", "set", "question_type"), bins=args.bins,
                              signed=signed, corner_removed=args.corner_removed)
            tag = f"{'signed' if signed else 'folded'}{args.bins}" + ("-cr" if args.corner_removed else "")
            written += emit_report(summary, None, "CSV", args.report, subject, task, "summary" + ("-cr" if args.corner_removed else ""))
            for fmt in ("CSV", "SVG"):
                written += emit_report(curve, None, fmt, args.report, subject, task, f"curve-{tag}")
        else:
            summary = aggregate(srows, ("subject", "task", "set", "visual", "adjective", "pov"))
            written += emit_report(summary, None, "CSV", args.report, subject, task, "summary")
            if args.error_vectors:
                hist = error_vectors(srows)
                if hist.grids:
                    for fmt in ("CSV", "SVG"):
                        written += emit_report(None, hist, fmt, args.report, subject, task, "vectors")
                else:
                    print(f"{subject}: no wrong-but-valid answers, no error vectors written")
    for p in written:
        print(p)
    return 0


def cmd_validate(args, argv) -> int:
    _require_dir(args.dataset, "dataset")
    trials, manifest = read_dataset(args.dataset)
    problems = []
    regenerated = regenerate(args.dataset)
    if (args.dataset / "trials.jsonl").read_bytes() != regenerated:
        problems.append("trials.jsonl differs from a regeneration with the manifest's seed and config")
    library = None
    if manifest.task == "director":
        from .director import Library

        library = Library.from_dict(json.loads((args.dataset / "library.json").read_text()))
    for t in trials:
        try:
            got = answer(t)
        except ValueError as exc:
            problems.append(f"{t.trial_id}: oracle could not resolve ({exc})")
            continue
        if got != t.ground_truth:
            problems.append(f"{t.trial_id}: oracle {got} != stored {t.ground_truth}")
        if library is not None:
            report = validate_trial(t, library)
            if not report.ok:
                problems.append(f"{t.trial_id}: {', '.join(report.failures)}")
    for line in problems[:50]:
        print(line)
    if len(problems) > 50:
        print(f"... and {len(problems) - 50} more")
    status = "FAIL" if problems else "OK"
    print(f"{status}: {len(trials)} trials, {len(problems)} problems")
    return 1 if problems else 0


COMMANDS = {
    "generate": cmd_generate,
    "evaluate": cmd_evaluate,
    "score": cmd_score,
    "analyze": cmd_analyze,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on bad flags
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.verb](args, argv)
    except (UsageError, SetupError, FileNotFoundError, FileExistsError, PermissionError) as exc:
        print(f"vptbench {args.verb}: error: {exc}", file=sys.stderr)
        return 2
    except (IntegrityError, DatasetLoadError, GenerationError, ValueError) as exc:
        print(f"vptbench {args.verb}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
