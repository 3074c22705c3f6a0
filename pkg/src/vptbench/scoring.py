"""Exact-match scoring against each question's closed answer vocabulary."""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass

from .director import ALL_REFS
from .rft import QuestionType, RftSet, RftTrial
from .symbols import ALPHABET

NORMALIZATION_VERSION = "1"

GLYPHS = frozenset(g.upper() for g in ALPHABET)
LEFT_RIGHT = frozenset({"LEFT", "RIGHT"})
WALL_COLORS = frozenset({"RED", "GREEN", "BLUE", "BLACK"})
WALL_SIDES = frozenset({"LEFT", "RIGHT", "TOP", "BOTTOM"})
VISIBILITY = frozenset({"CAN SEE", "CANNOT SEE"})
FRONT_BEHIND = frozenset({"FRONT", "BEHIND"})
CELLS = frozenset(ALL_REFS)

_QUOTES = "\"'`‘’“”"
_TERMINAL = ".,!?;:"
_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class ScoredResponse:
    trial_id: str
    subject: str
    raw_answer: str | None
    normalized_answer: str | None
    valid: bool
    correct: bool
    failure_reason: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def valid_answers(trial) -> frozenset[str]:
    if not isinstance(trial, RftTrial):
        return CELLS
    s, q = trial.set, trial.question_type
    if s is RftSet.CONTROL_2:
        return WALL_COLORS if q is QuestionType.VISUAL else WALL_SIDES
    if q in (QuestionType.VISUOSPATIAL,) or (q is QuestionType.VISUAL and s in (RftSet.CONTROL_1, RftSet.TEST_2)):
        return GLYPHS
    if s is RftSet.TEST_1:
        return VISIBILITY if q is QuestionType.VISUAL else FRONT_BEHIND
    return LEFT_RIGHT


def normalize_answer(raw: str) -> str:
    """Trim, collapse whitespace, uppercase, then peel surrounding quotes and
    trailing punctuation until nothing changes."""
    text = _WS.sub(" ", raw.strip()).upper()
    while True:
        before = text
        text = text.rstrip(_TERMINAL).strip()
        if len(text) >= 2 and text[0] in _QUOTES and text[-1] in _QUOTES:
            text = text[1:-1].strip()
        if text == before:
            return text


def score_response(
    trial, raw_answer: str | None, subject: str = "", failure_reason: str | None = None
) -> ScoredResponse:
    if raw_answer is None or failure_reason is not None:
        return ScoredResponse(trial.trial_id, subject, raw_answer, None, False, False,
                              failure_reason or "NO_ANSWER")
    normalized = normalize_answer(raw_answer)
    valid = normalized in valid_answers(trial)
    correct = valid and normalized == normalize_answer(trial.ground_truth)
    return ScoredResponse(trial.trial_id, subject, raw_answer, normalized, valid, correct)
