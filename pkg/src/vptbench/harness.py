"""Tool-calling agent loop, remote chat adapter and built-in reference agents.

A subject sees two system prompts (task, then general), a user message with
the context and question, and either an image attachment or an embedded
ASCII grid. It may call ``think`` any number of times and finishes by
calling ``submit``.
"""

from __future__ import annotations

import base64
import enum
import hashlib
import json
import logging
import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import httpx
import numpy as np

from . import geometry as geo
from . import oracle
from .director import DirectorTrial, Grid, Instruction, Pov, cell_ref
from .prompts import (
    DIRECTOR_SYSTEM_PROMPT,
    GENERAL_SYSTEM_PROMPT,
    NUDGE,
    THINK_ACK,
    TOOLS,
)
from .rft import QuestionType, RftSet, RftTrial, build_prompts
from .scoring import score_response, valid_answers
from .symbols import rotation_pair, viewer_snap_reading

log = logging.getLogger(__name__)

MAX_TURNS = 10
MAX_ATTEMPTS = 5


class SetupError(ValueError):
    """Subject configuration is unusable; raised before any message is sent."""


class TransportError(RuntimeError):
    """Remote endpoint failed after the retry budget was spent."""


class SubjectKind(str, enum.Enum):
    REMOTE = "REMOTE"
    ORACLE_AGENT = "ORACLE_AGENT"
    EGOCENTRIC_AGENT = "EGOCENTRIC_AGENT"
    MIRROR_AGENT = "MIRROR_AGENT"
    RANDOM_AGENT = "RANDOM_AGENT"


_SHORT_NAMES = {
    "oracle": SubjectKind.ORACLE_AGENT,
    "egocentric": SubjectKind.EGOCENTRIC_AGENT,
    "mirror": SubjectKind.MIRROR_AGENT,
    "random": SubjectKind.RANDOM_AGENT,
}


@dataclass(frozen=True)
class RemoteConfig:
    endpoint: str = ""
    model: str = ""
    temperature: float = 1.0
    top_p: float = 1.0
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0
    reasoning_effort: str | None = None
    api_key_env: str = "VPTBENCH_API_KEY"
    timeout: float = 120.0
    max_attempts: int = MAX_ATTEMPTS
    backoff_base: float = 1.0
    backoff_cap: float = 60.0
    debug: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "RemoteConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise SetupError(f"unknown remote config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class SubjectSpec:
    kind: SubjectKind
    remote: RemoteConfig | None = None
    seed: int = 0
    max_turns: int = MAX_TURNS

    def validate(self) -> None:
        if self.max_turns < 1:
            raise SetupError("max_turns must be >= 1")
        if self.kind is SubjectKind.REMOTE:
            cfg = self.remote
            if cfg is None or not cfg.endpoint or not cfg.model:
                raise SetupError("remote subject needs an endpoint and a model name")
            if cfg.max_attempts < 1:
                raise SetupError("max_attempts must be >= 1")

    @property
    def subject_id(self) -> str:
        if self.kind is SubjectKind.REMOTE:
            return f"remote-{self.remote.model}"
        name = self.kind.value.removesuffix("_AGENT").lower()
        return name if self.kind is not SubjectKind.RANDOM_AGENT else f"{name}-{self.seed}"

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "SubjectSpec":
        """``oracle`` / ``egocentric`` / ``mirror`` / ``random`` or ``remote:<config.json>``."""
        if text.startswith("remote:"):
            path = text.split(":", 1)[1]
            try:
                with open(path) as fh:
                    doc = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise SetupError(f"cannot read remote config {path}: {exc}") from exc
            max_turns = doc.pop("max_turns", MAX_TURNS)
            return cls(SubjectKind.REMOTE, RemoteConfig.from_dict(doc), seed, max_turns)
        try:
            return cls(_SHORT_NAMES[text], seed=seed)
        except KeyError:
            raise SetupError(f"unknown subject {text!r}") from None


# transcript types


@dataclass(frozen=True)
class ToolCall:
    call_id: str
    name: str
    arguments: dict


@dataclass(frozen=True)
class Message:
    role: str  # system | user | assistant | tool
    text: str | None = None
    image_ref: str | None = None
    tool_calls: tuple[ToolCall, ...] = ()
    tool_call_id: str | None = None


@dataclass
class Transcript:
    trial_id: str
    subject: str
    messages: list[Message] = field(default_factory=list)
    tool_calls: list[ToolCall] = field(default_factory=list)
    answer: str | None = None
    failure_reason: str | None = None
    turns: int = 0
    duration_s: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Transcript":
        d = dict(d)
        d["messages"] = [
            Message(**{**m, "tool_calls": tuple(ToolCall(**c) for c in m["tool_calls"])})
            for m in d["messages"]
        ]
        d["tool_calls"] = [ToolCall(**c) for c in d["tool_calls"]]
        return cls(**d)


@dataclass(frozen=True)
class TrialBundle:
    trial: RftTrial | DirectorTrial
    system_prompts: tuple[str, str]
    user_text: str
    image_png: bytes | None = None
    image_ref: str | None = None
    ascii_grid: str | None = None


def make_bundle(trial, image_png: bytes | None = None, image_ref: str | None = None,
                ascii_grid: str | None = None) -> TrialBundle:
    if isinstance(trial, RftTrial):
        task_prompt, context, question = build_prompts(trial)
        text = f"{context}\n{question}"
    else:
        task_prompt = DIRECTOR_SYSTEM_PROMPT
        text = trial.instruction.surface_text
        if ascii_grid is not None:
            text = f"{text}\n\n{ascii_grid}"
    if ascii_grid is None and image_ref is None and image_png is not None:
        image_ref = f"{trial.trial_id}.png"
    return TrialBundle(trial, (task_prompt, GENERAL_SYSTEM_PROMPT), text, image_png,
                       image_ref, ascii_grid)


@dataclass(frozen=True)
class Reply:
    text: str | None
    tool_calls: tuple[ToolCall, ...] = ()


# built-in agents


def _image_x(symbol) -> float:
    return geo.polar_to_xy(symbol.position_angle, symbol.radius)[0]


def _snapped_rft_answer(trial: RftTrial, mirrored: bool) -> str:
    """Answer as a viewer locked to heading 0; ``mirrored`` applies the
    wholesale 180-degree swap on top."""
    s, q = trial.set, trial.question_type
    if s in (RftSet.CONTROL_1, RftSet.CONTROL_2):
        return oracle.answer_rft(trial)
    swap = {"LEFT": "RIGHT", "RIGHT": "LEFT", "FRONT": "BEHIND", "BEHIND": "FRONT"}

    def side(sym) -> str:
        label = "RIGHT" if _image_x(sym) >= 0 else "LEFT"
        return swap[label] if mirrored else label

    def reading(sym) -> str:
        g = viewer_snap_reading(sym)
        return rotation_pair(g) if mirrored else g

    if s is RftSet.TEST_3:
        picks = [sym for sym in trial.symbols if side(sym) == trial.queried_side]
        # both glyphs on one image side: take the one nearer the asked side
        if not picks:
            key = (lambda sym: _image_x(sym)) if (trial.queried_side == "RIGHT") != mirrored else (lambda sym: -_image_x(sym))
            picks = [max(trial.symbols, key=key)]
        return reading(picks[0])
    (sym,) = trial.symbols
    if s is RftSet.TEST_1:
        if q is QuestionType.VISUAL:
            seen = geo.in_view_cone(sym.position_angle, 180.0 if mirrored else 0.0)
            return "CAN SEE" if seen else "CANNOT SEE"
        label = "FRONT" if geo.polar_to_xy(sym.position_angle, sym.radius)[1] < 0 else "BEHIND"
        return swap[label] if mirrored else label
    if q is QuestionType.VISUAL:
        return reading(sym)
    return side(sym)


def _director_mirror(grid: Grid, instruction: Instruction) -> str:
    """Occlusion-aware, swaps horizontal adjectives for the director's
    frame, breaks ties topmost then leftmost."""
    adj = instruction.adjective
    candidates = [
        (c, r, cell)
        for c, r, cell in grid.positions()
        if instruction.description.matches(cell.item) and not cell.occluded
    ]
    if not candidates:
        return oracle.answer_director_egocentric(grid, instruction)
    if adj.kind != "NONE":
        frame = instruction.pov is Pov.MINE
        scored = [(oracle.extremity(adj, c, r, cell.item.size_level, frame), c, r, cell)
                  for c, r, cell in candidates]
        best = max(t[0] for t in scored)
        candidates = [(c, r, cell) for sc, c, r, cell in scored if sc == best]
    col, row, _ = min(candidates, key=lambda t: (t[1], t[0]))
    return cell_ref(col, row)


def _trial_rng(seed: int, trial_id: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{trial_id}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


def builtin_agent_answer(kind: SubjectKind | str, trial, seed: int = 0) -> str:
    kind = SubjectKind(kind)
    if kind is SubjectKind.ORACLE_AGENT:
        return oracle.answer(trial)
    if kind is SubjectKind.RANDOM_AGENT:
        options = sorted(valid_answers(trial))
        return options[int(_trial_rng(seed, trial.trial_id).integers(len(options)))]
    if kind not in (SubjectKind.EGOCENTRIC_AGENT, SubjectKind.MIRROR_AGENT):
        raise ValueError(f"{kind.value} is not a built-in agent")
    mirror = kind is SubjectKind.MIRROR_AGENT
    if isinstance(trial, RftTrial):
        return _snapped_rft_answer(trial, mirror and trial.disparity > 90.0)
    if mirror:
        return _director_mirror(trial.grid, trial.instruction)
    return oracle.answer_director_egocentric(trial.grid, trial.instruction)


class BuiltinAgent:
    concurrent_safe = True

    def __init__(self, kind: SubjectKind, seed: int = 0):
        if kind is SubjectKind.REMOTE:
            raise SetupError("REMOTE is not a built-in agent")
        self.kind = kind
        self.seed = seed
        self.needs_image = False

    def respond(self, messages, bundle: TrialBundle) -> Reply:
        answer = builtin_agent_answer(self.kind, bundle.trial, self.seed)
        return Reply(None, (ToolCall("call_0", "submit", {"answer": answer}),))


# remote adapter


class RateLimiter:
    """Spaces request starts at least ``1 / rate`` seconds apart."""

    def __init__(self, rate: float, clock=time.monotonic, sleep=time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.interval = 1.0 / rate
        self.clock, self.sleep = clock, sleep
        self._next = -math.inf
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            now = self.clock()
            start = max(now, self._next)
            self._next = start + self.interval
        if start > now:
            self.sleep(start - now)


def _wire_message(msg: Message, bundle: TrialBundle) -> dict:
    if msg.role == "tool":
        return {"role": "tool", "tool_call_id": msg.tool_call_id, "content": msg.text or ""}
    if msg.role == "assistant":
        out: dict = {"role": "assistant", "content": msg.text}
        if msg.tool_calls:
            out["tool_calls"] = [
                {
                    "id": c.call_id,
                    "type": "function",
                    "function": {"name": c.name, "arguments": json.dumps(c.arguments)},
                }
                for c in msg.tool_calls
            ]
        return out
    if msg.image_ref is not None:
        b64 = base64.b64encode(bundle.image_png).decode("ascii")
        return {
            "role": msg.role,
            "content": [{"type": "image_url", "image_url": {"url": f"data:image/png;base64,{b64}"}}],
        }
    return {"role": msg.role, "content": msg.text}


def _parse_reply(body: dict) -> Reply:
    msg = body["choices"][0]["message"]
    calls = []
    for i, c in enumerate(msg.get("tool_calls") or []):
        fn = c.get("function", {})
        raw = fn.get("arguments") or "{}"
        try:
            args = json.loads(raw) if isinstance(raw, str) else dict(raw)
            if not isinstance(args, dict):
                args = {"_raw": raw}
        except json.JSONDecodeError:
            args = {"_raw": raw}
        calls.append(ToolCall(c.get("id") or f"call_{i}", fn.get("name", ""), args))
    return Reply(msg.get("content"), tuple(calls))


class RemoteSubject:
    """Chat-completions style endpoint. The credential is read from the
    environment variable named in the config."""

    concurrent_safe = True
    needs_image = True

    def __init__(self, config: RemoteConfig, client: httpx.Client | None = None,
                 limiter: RateLimiter | None = None, sleep=time.sleep):
        self.config = config
        self._key = os.environ.get(config.api_key_env)
        if not self._key:
            raise SetupError(f"environment variable {config.api_key_env} is not set")
        self.client = client or httpx.Client(timeout=config.timeout)
        self.limiter = limiter
        self.sleep = sleep

    def payload(self, messages, bundle: TrialBundle) -> dict:
        cfg = self.config
        body = {
            "model": cfg.model,
            "messages": [_wire_message(m, bundle) for m in messages],
            "tools": [{"type": "function", "function": t} for t in TOOLS],
            "temperature": cfg.temperature,
            "top_p": cfg.top_p,
            "frequency_penalty": cfg.frequency_penalty,
            "presence_penalty": cfg.presence_penalty,
        }
        if cfg.reasoning_effort is not None:
            body["reasoning_effort"] = cfg.reasoning_effort
        return body

    def _redact(self, text: str) -> str:
        return text.replace(self._key, "***") if self._key else text

    def respond(self, messages, bundle: TrialBundle) -> Reply:
        cfg = self.config
        body = self.payload(messages, bundle)
        headers = {"Authorization": f"Bearer {self._key}", "Content-Type": "application/json"}
        if cfg.debug:
            log.debug("request %s", self._redact(json.dumps(body)[:4000]))
        last = "no attempt made"
        for attempt in range(cfg.max_attempts):
            if attempt:
                self.sleep(min(cfg.backoff_cap, cfg.backoff_base * 2 ** (attempt - 1)))
            if self.limiter is not None:
                self.limiter.acquire()
            try:
                resp = self.client.post(cfg.endpoint, json=body, headers=headers)
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}: {exc}"
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last = f"HTTP {resp.status_code}"
                continue
            if resp.status_code >= 400:
                raise TransportError(self._redact(f"HTTP {resp.status_code}: {resp.text[:500]}"))
            if cfg.debug:
                log.debug("response %s", self._redact(resp.text[:4000]))
            try:
                return _parse_reply(resp.json())
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"unreadable response body: {exc}") from exc
        raise TransportError(self._redact(f"gave up after {cfg.max_attempts} attempts ({last})"))


def make_subject(spec: SubjectSpec, client: httpx.Client | None = None,
                 limiter: RateLimiter | None = None):
    spec.validate()
    if spec.kind is SubjectKind.REMOTE:
        return RemoteSubject(spec.remote, client=client, limiter=limiter)
    return BuiltinAgent(spec.kind, spec.seed)


# loop


def run_trial(subject, bundle: TrialBundle, max_turns: int = MAX_TURNS, subject_id: str = "") -> Transcript:
    if max_turns < 1:
        raise SetupError("max_turns must be >= 1")
    t0 = time.perf_counter()
    tr = Transcript(bundle.trial.trial_id, subject_id)
    tr.messages.append(Message("system", bundle.system_prompts[0]))
    tr.messages.append(Message("system", bundle.system_prompts[1]))
    tr.messages.append(Message("user", bundle.user_text))
    if bundle.ascii_grid is None and bundle.image_png is not None:
        tr.messages.append(Message("user", image_ref=bundle.image_ref))

    while tr.answer is None and tr.failure_reason is None:
        if tr.turns >= max_turns:
            tr.failure_reason = "MAX_TURNS"
            break
        try:
            reply = subject.respond(tuple(tr.messages), bundle)
        except TransportError as exc:
            log.warning("%s: %s", bundle.trial.trial_id, exc)
            tr.failure_reason = "TRANSPORT_ERROR"
            break
        tr.turns += 1
        calls = []
        for call in reply.tool_calls:
            calls.append(call)
            if call.name == "submit":
                break
        tr.messages.append(Message("assistant", reply.text, tool_calls=tuple(calls)))
        for call in calls:
            tr.tool_calls.append(call)
            if call.name == "submit":
                answer = call.arguments.get("answer", call.arguments.get("_raw", ""))
                tr.answer = answer if isinstance(answer, str) else json.dumps(answer)
            elif call.name == "think":
                tr.messages.append(Message("tool", THINK_ACK, tool_call_id=call.call_id))
            else:
                tr.messages.append(
                    Message("tool", f"Unknown function {call.name!r}.", tool_call_id=call.call_id)
                )
        if not calls:
            tr.messages.append(Message("user", NUDGE))
    tr.duration_s = round(time.perf_counter() - t0, 6)
    return tr


@dataclass
class ResultRecord:
    trial_id: str
    subject: str
    transcript: Transcript
    scored: object  # ScoredResponse
    duration_s: float

    def to_dict(self) -> dict:
        return {
            "trial_id": self.trial_id,
            "subject": self.subject,
            "transcript": self.transcript.to_dict(),
            "scored": self.scored.to_dict(),
            "duration_s": self.duration_s,
        }


def run_battery(
    spec: SubjectSpec,
    trials,
    parallelism: int = 1,
    rate_limit: float | None = None,
    store=None,
    image_source=None,
    ascii_source=None,
    subject=None,
) -> list[ResultRecord]:
    """Administer every trial not already in ``store`` and return the new records.

    ``image_source(trial)`` returns PNG bytes and ``ascii_source(trial)``
    returns an ASCII grid for Director trials; either may be None.
    """
    if parallelism < 1:
        raise SetupError("parallelism must be >= 1")
    limiter = RateLimiter(rate_limit) if rate_limit else None
    if subject is None:
        subject = make_subject(spec, limiter=limiter)
    elif limiter is not None and hasattr(subject, "limiter"):
        subject.limiter = limiter
    if not getattr(subject, "concurrent_safe", False):
        parallelism = 1
    subject_id = spec.subject_id
    ids = {t.trial_id for t in trials}
    done = set()
    if store is not None:
        done = {tid for tid, subj in store.completed_pairs() if subj == subject_id}
        stray = done - ids
        if stray:
            raise ValueError(f"result store has {len(stray)} trials not in this dataset, e.g. {sorted(stray)[0]}")
    pending = [t for t in trials if t.trial_id not in done]
    if image_source is None and getattr(subject, "needs_image", False):
        from .render import render_trial_image

        image_source = lambda t: render_trial_image(t).png  # noqa: E731

    def one(trial) -> ResultRecord:
        ascii_grid = ascii_source(trial) if ascii_source and isinstance(trial, DirectorTrial) else None
        png = image_source(trial) if image_source and ascii_grid is None else None
        bundle = make_bundle(trial, image_png=png, ascii_grid=ascii_grid)
        tr = run_trial(subject, bundle, spec.max_turns, subject_id)
        scored = score_response(trial, tr.answer, subject_id, tr.failure_reason)
        rec = ResultRecord(trial.trial_id, subject_id, tr, scored, tr.duration_s)
        if store is not None:
            store.append_result(rec)
        return rec

    if parallelism == 1:
        return [one(t) for t in pending]
    slots = threading.BoundedSemaphore(parallelism)
    futures = []
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        for trial in pending:
            slots.acquire()
            fut = pool.submit(one, trial)
            fut.add_done_callback(lambda _f: slots.release())
            futures.append(fut)
        return [f.result() for f in futures]
