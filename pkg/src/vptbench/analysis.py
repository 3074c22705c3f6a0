"""Accuracy tables, disparity curves, Director error vectors, CSV and SVG output.

Results are first flattened into one dict per scored trial (``join_results``),
then grouped by any of ``GROUP_FIELDS`` and optionally bucketed by angle.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geometry as geo
from .director import DirectorTrial, parse_ref
from .rft import QuestionType, RftSet, RftTrial

Z95 = 1.96

GROUP_FIELDS = (
    "subject",
    "task",
    "set",
    "question_type",
    "visual",
    "spatial",
    "adjective",
    "adjective_class",
    "pov",
    "corner_flag",
    "related_proportion",
)

CSV_COLUMNS = (
    "subject", "task", "set", "question_type", "visual", "spatial", "adjective",
    "adjective_class", "pov", "corner_flag", "related_proportion", "bins", "signed",
    "corner_removed", "bin_index", "bin_lo", "bin_hi", "n", "correct", "invalid",
    "accuracy", "ci_lo", "ci_hi", "invalid_rate",
)

DIRECTOR_CHANCE = 1.0 / 16


def chance_level(rft_set: str | None, question_type: str | None = None) -> float:
    """Guessing rate among the plausible responses to a question.

    Glyph questions count a glyph and its rotation partner; Test 3 adds the
    second glyph and its partner; wall questions have four options.
    """
    if rft_set is None or str(rft_set).startswith("rel") or rft_set == "director":
        return DIRECTOR_CHANCE
    s = RftSet(rft_set)
    if s is RftSet.CONTROL_2 or s is RftSet.TEST_3:
        return 0.25
    return 0.5


def chance_levels() -> dict:
    out = {}
    for s in RftSet:
        qs = (QuestionType.VISUOSPATIAL,) if s is RftSet.TEST_3 else (QuestionType.VISUAL, QuestionType.SPATIAL)
        for q in qs:
            out[f"{s.value}/{q.value}"] = chance_level(s.value, q.value)
    out["DIRECTOR"] = DIRECTOR_CHANCE
    return out


def wilson(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for ``k`` successes in ``n`` trials."""
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0 <= k <= n:
        raise ValueError("k must lie in [0, n]")
    p = k / n
    z2 = z * z
    denom = 1 + z2 / n
    centre = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    # exact endpoints at the extremes, free of rounding residue
    if k == 0:
        lo = 0.0
    if k == n:
        hi = 1.0
    return lo, hi


def join_results(results, trials) -> list[dict]:
    """One flat row per result. ``results`` are ResultRecords or their dicts."""
    by_id = {t.trial_id: t for t in trials}
    rows = []
    for rec in results:
        d = rec if isinstance(rec, dict) else rec.to_dict()
        tid = d["trial_id"]
        if tid not in by_id:
            raise KeyError(f"result for unknown trial {tid}")
        trial = by_id[tid]
        scored = d["scored"]
        row = {
            "trial_id": tid,
            "subject": d["subject"],
            "correct": bool(scored["correct"]),
            "valid": bool(scored["valid"]),
            "answer": scored["normalized_answer"],
            "ground_truth": trial.ground_truth,
        }
        if isinstance(trial, RftTrial):
            row.update(
                task="rft",
                set=trial.set.value,
                question_type=trial.question_type.value,
                heading=trial.figure_orientation,
                disparity=trial.disparity,
                corner_flag=trial.corner_flag,
            )
        elif isinstance(trial, DirectorTrial):
            cond = trial.condition
            row.update(
                task="director",
                set=f"rel{int(round(trial.related_proportion * 100)):02d}",
                question_type="SELECT",
                visual=cond.visual,
                spatial=cond.spatial,
                adjective=cond.adjective.value,
                adjective_class=cond.adjective_class,
                pov=cond.pov.value,
                related_proportion=trial.related_proportion,
            )
        else:
            raise TypeError(f"unsupported trial type {type(trial).__name__}")
        rows.append(row)
    return rows


def folded_bucket(disparity: float, bins: int) -> tuple[int, float, float]:
    width = 180.0 / bins
    idx = min(int(disparity // width), bins - 1)
    return idx, idx * width, (idx + 1) * width


def signed_bucket(heading: float, bins: int) -> tuple[int, float, float]:
    """Bucket of the signed angle in (-180, 180].

    Buckets mirror about 0: the folded magnitude picks the ring, the sign
    picks the half, so merging buckets ``m - 1 - j`` and ``m + j`` gives
    the folded bucket ``j`` exactly.
    """
    if bins % 2:
        raise ValueError("signed bucketing needs an even bin count")
    s = geo.signed_offset(heading, 0.0)
    width = 360.0 / bins
    m = bins // 2
    j = min(int(abs(s) // width), m - 1)
    if s >= 0:
        return m + j, j * width, (j + 1) * width
    return m - 1 - j, -(j + 1) * width, -j * width


@dataclass(frozen=True)
class AccuracyRow:
    key: tuple  # ((field, value), ...)
    n: int
    correct: int
    invalid: int
    accuracy: float
    ci_lo: float
    ci_hi: float
    invalid_rate: float
    bins: int | None = None
    signed: bool = False
    corner_removed: bool = False
    bin_index: int | None = None
    bin_lo: float | None = None
    bin_hi: float | None = None

    def get(self, name, default=None):
        return dict(self.key).get(name, default)

    def as_record(self) -> dict:
        d = {c: "" for c in CSV_COLUMNS}
        d.update(dict(self.key))
        d.update(
            bins=self.bins if self.bins is not None else "",
            signed=self.signed,
            corner_removed=self.corner_removed,
            bin_index=self.bin_index if self.bin_index is not None else "",
            bin_lo=self.bin_lo if self.bin_lo is not None else "",
            bin_hi=self.bin_hi if self.bin_hi is not None else "",
            n=self.n,
            correct=self.correct,
            invalid=self.invalid,
            accuracy=f"{self.accuracy:.6f}",
            ci_lo=f"{self.ci_lo:.6f}",
            ci_hi=f"{self.ci_hi:.6f}",
            invalid_rate=f"{self.invalid_rate:.6f}",
        )
        return d


def _sort_key(value):
    return (value is None, str(type(value).__name__), value if value is not None else 0)


def aggregate(
    rows: list[dict],
    grouping=("subject", "set", "question_type"),
    bins: int | None = None,
    signed: bool = False,
    corner_removed: bool = False,
) -> list[AccuracyRow]:
    grouping = tuple(grouping)
    unknown = [g for g in grouping if g not in GROUP_FIELDS]
    if unknown:
        raise ValueError(f"unknown grouping field(s): {unknown}")
    if bins not in (None, 4, 12, 24):
        raise ValueError("bins must be 4, 12 or 24")
    if signed and bins is None:
        raise ValueError("signed bucketing needs a bin count")

    groups: dict = defaultdict(lambda: [0, 0, 0])
    for row in rows:
        if corner_removed and row.get("corner_flag"):
            continue
        key = tuple((g, row.get(g)) for g in grouping)
        bucket = None
        if bins is not None:
            if "heading" not in row:
                raise ValueError(f"{row['trial_id']}: angle bucketing applies to RFT results only")
            bucket = signed_bucket(row["heading"], bins) if signed else folded_bucket(row["disparity"], bins)
        acc = groups[(key, bucket)]
        acc[0] += 1
        acc[1] += int(row["correct"])
        acc[2] += int(not row["valid"])

    out = []
    for (key, bucket), (n, k, bad) in sorted(
        groups.items(),
        key=lambda kv: (tuple(_sort_key(v) for _, v in kv[0][0]), kv[0][1] or (-1, 0, 0)),
    ):
        lo, hi = wilson(k, n)
        out.append(
            AccuracyRow(
                key=key, n=n, correct=k, invalid=bad, accuracy=k / n, ci_lo=lo, ci_hi=hi,
                invalid_rate=bad / n, bins=bins, signed=signed, corner_removed=corner_removed,
                bin_index=bucket[0] if bucket else None,
                bin_lo=bucket[1] if bucket else None,
                bin_hi=bucket[2] if bucket else None,
            )
        )
    return out


@dataclass(frozen=True)
class ErrorVector:
    trial_id: str
    d_col: int
    d_row: int
    adjective: str
    pov: str


@dataclass
class ErrorHistograms:
    vectors: list[ErrorVector]
    # (adjective, pov) -> 7x7 counts indexed [d_row + 3, d_col + 3]
    grids: dict = field(default_factory=dict)


def error_vectors(rows: list[dict], adjectives=None, povs=None) -> ErrorHistograms:
    """Offsets from the correct cell to the chosen cell for wrong but valid
    Director answers, in the participant's frame."""
    vectors = []
    grids: dict = {}
    for row in rows:
        if row.get("task") != "director" or row["correct"] or not row["valid"]:
            continue
        if adjectives is not None and row["adjective"] not in adjectives:
            continue
        if povs is not None and row["pov"] not in povs:
            continue
        tc, tr = parse_ref(row["ground_truth"])
        ac, ar = parse_ref(row["answer"])
        v = ErrorVector(row["trial_id"], ac - tc, ar - tr, row["adjective"], row["pov"])
        vectors.append(v)
        grid = grids.setdefault((v.adjective, v.pov), np.zeros((7, 7), dtype=int))
        grid[v.d_row + 3, v.d_col + 3] += 1
    return ErrorHistograms(vectors, dict(sorted(grids.items())))


# report emission


def _csv_text(rows: list[AccuracyRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r.as_record())
    return buf.getvalue()


def _vectors_csv(hist: ErrorHistograms) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["adjective", "pov", "d_col", "d_row", "count"])
    for (adj, pov), grid in hist.grids.items():
        for dr in range(-3, 4):
            for dc in range(-3, 4):
                w.writerow([adj, pov, dc, dr, int(grid[dr + 3, dc + 3])])
    return buf.getvalue()


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _f(x: float) -> str:
    return f"{x:.2f}"


def _curve_svg(rows: list[AccuracyRow], title: str) -> str:
    W, H, L, R, T, B = 640, 400, 60, 170, 40, 50
    pw, ph = W - L - R, H - T - B
    signed = any(r.signed for r in rows)
    xmin, xmax = (-180.0, 180.0) if signed else (0.0, 180.0)

    def sx(a):
        return L + (a - xmin) / (xmax - xmin) * pw

    def sy(p):
        return T + (1 - p) * ph

    series: dict = defaultdict(list)
    for r in rows:
        if r.bin_index is None:
            continue
        label = " ".join(str(v) for _, v in r.key if v is not None)
        series[label].append(r)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.0f}" y="22" font-size="14" text-anchor="middle" font-family="sans-serif">{title}</text>',
        f'<line x1="{L}" y1="{_f(sy(0))}" x2="{L + pw}" y2="{_f(sy(0))}" stroke="black"/>',
        f'<line x1="{L}" y1="{T}" x2="{L}" y2="{_f(sy(0))}" stroke="black"/>',
    ]
    for p in (0.0, 0.25, 0.5, 0.75, 1.0):
        out.append(f'<text x="{L - 6}" y="{_f(sy(p) + 4)}" font-size="10" text-anchor="end" font-family="sans-serif">{p:.2f}</text>')
    step = 90 if signed else 45
    for a in range(int(xmin), int(xmax) + 1, step):
        out.append(f'<text x="{_f(sx(a))}" y="{_f(sy(0) + 16)}" font-size="10" text-anchor="middle" font-family="sans-serif">{a}</text>')
    out.append(f'<text x="{L + pw / 2:.0f}" y="{H - 10}" font-size="11" text-anchor="middle" font-family="sans-serif">'
               f'{"signed rotation (deg)" if signed else "angular disparity (deg)"}</text>')

    chances = sorted({chance_level(r.get("set"), r.get("question_type")) for r in rows})
    for c in chances:
        out.append(f'<line class="chance" x1="{L}" y1="{_f(sy(c))}" x2="{L + pw}" y2="{_f(sy(c))}" '
                   f'stroke="grey" stroke-dasharray="6,4"/>')
    for i, (label, members) in enumerate(sorted(series.items())):
        colour = _PALETTE[i % len(_PALETTE)]
        pts = [((r.bin_lo + r.bin_hi) / 2, r.accuracy) for r in sorted(members, key=lambda r: r.bin_index)]
        path = " ".join(f"{_f(sx(a))},{_f(sy(p))}" for a, p in pts)
        out.append(f'<polyline points="{path}" fill="none" stroke="{colour}" stroke-width="2"/>')
        for a, p in pts:
            out.append(f'<circle cx="{_f(sx(a))}" cy="{_f(sy(p))}" r="3" fill="{colour}"/>')
        ly = T + 14 * i
        out.append(f'<line x1="{L + pw + 10}" y1="{ly}" x2="{L + pw + 28}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{L + pw + 32}" y="{ly + 4}" font-size="10" font-family="sans-serif">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _heatmap_svg(hist: ErrorHistograms, title: str) -> str:
    cell, gap, top = 20, 40, 50
    panels = list(hist.grids.items())
    W = max(1, len(panels)) * (7 * cell + gap) + gap
    H = top + 7 * cell + 40
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.0f}" y="20" font-size="14" text-anchor="middle" font-family="sans-serif">{title}</text>',
    ]
    for i, ((adj, pov), grid) in enumerate(panels):
        x0 = gap + i * (7 * cell + gap)
        peak = max(1, int(grid.max()))
        out.append(f'<text x="{x0 + 3.5 * cell:.0f}" y="{top - 8}" font-size="10" text-anchor="middle" font-family="sans-serif">{adj} {pov}</text>')
        for dr in range(7):
            for dc in range(7):
                v = int(grid[dr, dc])
                shade = 255 - int(round(215 * v / peak))
                out.append(
                    f'<rect x="{x0 + dc * cell}" y="{top + dr * cell}" width="{cell}" height="{cell}" '
                    f'fill="rgb({shade},{shade},255)" stroke="#cccccc"><title>dcol={dc - 3} drow={dr - 3} n={v}</title></rect>'
                )
        out.append(f'<rect x="{x0 + 3 * cell}" y="{top + 3 * cell}" width="{cell}" height="{cell}" fill="none" stroke="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def report_path(out_dir, subject: str, task: str, section: str, ext: str) -> Path:
    safe = "".join(ch if ch.isalnum() or ch in "-._" else "_" for ch in subject)
    return Path(out_dir) / f"{safe}_{task}_{section}.{ext}"


def emit_report(
    rows: list[AccuracyRow] | None,
    vectors: ErrorHistograms | None,
    fmt: str,
    out_dir,
    subject: str,
    task: str,
    section: str,
) -> list[Path]:
    """Write CSV or SVG for ``rows`` and/or ``vectors``; returns the paths written."""
    fmt = fmt.upper()
    if fmt not in ("CSV", "SVG"):
        raise ValueError("format must be CSV or SVG")
    if not rows and (vectors is None or not vectors.grids):
        raise ValueError("nothing to report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    ext = fmt.lower()
    if rows:
        text = _csv_text(rows) if fmt == "CSV" else _curve_svg(rows, f"{subject} {task} {section}")
        p = report_path(out_dir, subject, task, section, ext)
        p.write_text(text)
        written.append(p)
    if vectors is not None and vectors.grids:
        text = _vectors_csv(vectors) if fmt == "CSV" else _heatmap_svg(vectors, f"{subject} {task} error vectors")
        p = report_path(out_dir, subject, task, f"{section}-errors" if rows else section, ext)
        p.write_text(text)
        written.append(p)
    return written
