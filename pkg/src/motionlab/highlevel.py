"""High-level planning: decompose a motion instruction into timed steps.

Two querying strategies: piece_by_piece walks one step at a time through
movement / initial state / final state / timing / completion questions;
in_one_go asks for the whole decomposition at once and parses a structured
reply.  Both return plans that satisfy the timing and numbering invariants,
repairing LLM sloppiness where possible and recording a warning per repair.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ParseError, StepCapExceeded
from .gateway import ChatSession
from .prompts import PromptLibrary

log = logging.getLogger(__name__)

DEFAULT_STEP_CAP = 10
DEFAULT_DURATION = 1.0
PARSE_RETRIES = 2
PLACEHOLDER_TEXT = "(no description provided)"

FORMAT_NUDGE = (
    "Please reply in the requested format: a fenced ```json code block with "
    'a list of step objects carrying "step_number", "time_range", '
    '"movement", "initial_state" and "final_state".'
)


@dataclass(frozen=True)
class MotionInstruction:
    id: int
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("instruction text must be non-empty")


@dataclass
class HighLevelStep:
    step_number: int
    time_range: tuple[float, float]
    movement: str
    initial_state: str
    final_state: str

    @property
    def duration(self) -> float:
        return self.time_range[1] - self.time_range[0]


@dataclass
class HighLevelPlan:
    instruction: MotionInstruction
    steps: list[HighLevelStep]
    strategy: str
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "instruction": {"id": self.instruction.id, "text": self.instruction.text},
            "strategy": self.strategy,
            "steps": [
                {
                    "step_number": s.step_number,
                    "time_range": list(s.time_range),
                    "movement": s.movement,
                    "initial_state": s.initial_state,
                    "final_state": s.final_state,
                }
                for s in self.steps
            ],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "HighLevelPlan":
        return cls(
            instruction=MotionInstruction(**doc["instruction"]),
            steps=[
                HighLevelStep(
                    step_number=s["step_number"],
                    time_range=tuple(s["time_range"]),
                    movement=s["movement"],
                    initial_state=s["initial_state"],
                    final_state=s["final_state"],
                )
                for s in doc["steps"]
            ],
            strategy=doc.get("strategy", ""),
            warnings=list(doc.get("warnings", [])),
        )


def load_instructions(path=None) -> list[MotionInstruction]:
    """The bundled 20-instruction corpus (ids 1-20), or an external file."""
    if path is None:
        raw = resources.files("motionlab.data").joinpath("instructions.json").read_text()
    else:
        raw = Path(path).read_text()
    doc = json.loads(raw)
    return [MotionInstruction(e["id"], e["text"]) for e in doc["instructions"]]


# --- reply parsing -----------------------------------------------------------

_NUMBER_RE = re.compile(r"(\d+(?:\.\d+)?)")
_YES_RE = re.compile(r"\b(yes|yeah|yep|indeed|affirmative|correct|certainly|sure)\b")
_END_RE = re.compile(r"\b(it|this|that)(?:'s| is) the end\b")
_NEG_RE = re.compile(r"\b(no|not|never|isn't|doesn't|don't|nope)\b|n't\b")


def parse_timing(reply: str) -> float | None:
    """First number in the reply, seconds; None when absent or non-positive.
    Step references like "Step1" are ignored so echoes of the question text
    don't shadow the actual duration."""
    cleaned = re.sub(r"[Ss]tep\s*\d+", "", reply)
    m = _NUMBER_RE.search(cleaned)
    if not m:
        return None
    value = float(m.group(1))
    return value if value > 0 else None


def _leading_clause(reply: str) -> str:
    return re.split(r"[.!?\n]", reply.strip(), maxsplit=1)[0].lower()


def is_affirmative(reply: str) -> bool:
    clause = _leading_clause(reply)
    if _NEG_RE.search(clause):
        return False
    return bool(_YES_RE.search(clause) or _END_RE.search(clause))


def _extract_json_steps(reply: str) -> list[dict] | None:
    fenced = re.search(r"```(?:json)?\s*(.*?)```", reply, re.DOTALL)
    candidates = []
    if fenced:
        candidates.append(fenced.group(1))
    start = reply.find("[")
    if start != -1:
        depth = 0
        for i in range(start, len(reply)):
            if reply[i] == "[":
                depth += 1
            elif reply[i] == "]":
                depth -= 1
                if depth == 0:
                    candidates.append(reply[start : i + 1])
                    break
    for text in candidates:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            continue
        if isinstance(doc, dict):
            doc = [doc]
        if isinstance(doc, list) and doc and all(isinstance(e, dict) for e in doc):
            return doc
    return None


def _repair_steps(entries: list[dict], warnings: list[str]) -> list[HighLevelStep]:
    steps: list[HighLevelStep] = []
    cursor = 0.0
    for i, entry in enumerate(entries, start=1):
        number = entry.get("step_number")
        if number != i:
            warnings.append(f"step {i}: renumbered from {number!r}")
        texts = {}
        for key in ("movement", "initial_state", "final_state"):
            value = str(entry.get(key, "") or "").strip()
            if not value:
                warnings.append(f"step {i}: missing {key}")
                value = PLACEHOLDER_TEXT
            texts[key] = value
        tr = entry.get("time_range")
        if (isinstance(tr, (list, tuple)) and len(tr) == 2
                and all(isinstance(v, (int, float)) for v in tr)):
            start, end = float(tr[0]), float(tr[1])
            duration = end - start
            if duration <= 0:
                warnings.append(f"step {i}: non-positive duration repaired to {DEFAULT_DURATION}s")
                duration = DEFAULT_DURATION
            if abs(start - cursor) > 1e-9:
                warnings.append(f"step {i}: start shifted from {start} to {cursor}")
        else:
            warnings.append(f"step {i}: missing time_range, defaulted to {DEFAULT_DURATION}s")
            duration = DEFAULT_DURATION
        steps.append(HighLevelStep(
            step_number=i,
            time_range=(cursor, cursor + duration),
            **texts,
        ))
        cursor += duration
    return steps


# --- strategies --------------------------------------------------------------

def plan_piece_by_piece(instruction: MotionInstruction, session: ChatSession,
                        library: PromptLibrary | None = None,
                        step_cap: int = DEFAULT_STEP_CAP,
                        raise_on_cap: bool = False) -> HighLevelPlan:
    """Iterative decomposition: setup, then per step the five questions
    movement / initial_state / final_state / timing / is_end, looping until
    the completion question parses affirmative or the step cap is reached."""
    library = library or PromptLibrary.bundled()
    warnings: list[str] = []
    session.send(library.high_setup(instruction.text))

    steps: list[HighLevelStep] = []
    cursor = 0.0
    for number in range(1, step_cap + 1):
        texts = {}
        for key in ("movement", "initial_state", "final_state"):
            reply = session.send(library.high_question(key, number)).strip()
            if not reply:
                warnings.append(f"step {number}: empty {key} reply")
                reply = PLACEHOLDER_TEXT
            texts[key] = reply
        timing_reply = session.send(library.high_question("timing", number))
        duration = parse_timing(timing_reply)
        if duration is None:
            warnings.append(
                f"step {number}: unparseable timing {timing_reply[:40]!r}, "
                f"defaulted to {DEFAULT_DURATION}s")
            duration = DEFAULT_DURATION
        steps.append(HighLevelStep(
            step_number=number, time_range=(cursor, cursor + duration), **texts))
        cursor += duration
        if is_affirmative(session.send(library.high_question("is_end", number))):
            break
    else:
        if raise_on_cap:
            raise StepCapExceeded(f"no completion after {step_cap} steps")
        warnings.append(f"step cap {step_cap} reached without completion; plan truncated")

    plan = HighLevelPlan(instruction, steps, "piece_by_piece", warnings)
    for warning in warnings:
        log.warning("plan %s: %s", instruction.id, warning)
    return plan


def plan_in_one_go(instruction: MotionInstruction, session: ChatSession,
                   library: PromptLibrary | None = None,
                   parse_retries: int = PARSE_RETRIES) -> HighLevelPlan:
    """Single-query decomposition; the structured reply is parsed from a
    fenced JSON block with lenient fallbacks and up to parse_retries
    format-nudge re-asks."""
    library = library or PromptLibrary.bundled()
    warnings: list[str] = []
    reply = session.send(library.high_in_one_go(instruction.text))
    entries = _extract_json_steps(reply)
    attempts = 0
    while entries is None and attempts < parse_retries:
        attempts += 1
        warnings.append(f"reply unparseable, format nudge {attempts}")
        reply = session.send(FORMAT_NUDGE)
        entries = _extract_json_steps(reply)
    if entries is None:
        raise ParseError(
            f"no parseable step list after {attempts + 1} attempts for "
            f"instruction {instruction.id}")

    steps = _repair_steps(entries, warnings)
    plan = HighLevelPlan(instruction, steps, "in_one_go", warnings)
    for warning in warnings:
        log.warning("plan %s: %s", instruction.id, warning)
    return plan


def validate_plan(plan: HighLevelPlan) -> list[str]:
    """Empty iff numbering, timing, and non-emptiness invariants all hold."""
    problems: list[str] = []
    for i, step in enumerate(plan.steps, start=1):
        if step.step_number != i:
            problems.append(f"step {i}: non-consecutive step numbers ({step.step_number})")
        if step.duration <= 0:
            problems.append(f"step {step.step_number}: non-positive duration")
        for key in ("movement", "initial_state", "final_state"):
            if not getattr(step, key):
                problems.append(f"step {step.step_number}: empty {key}")
    if plan.steps:
        if abs(plan.steps[0].time_range[0]) > 1e-9:
            problems.append("first step must start at 0")
        for prev, nxt in zip(plan.steps, plan.steps[1:]):
            if abs(prev.time_range[1] - nxt.time_range[0]) > 1e-9:
                problems.append(
                    f"step {nxt.step_number}: timing gap after step {prev.step_number}")
    else:
        problems.append("plan has no steps")
    return problems


def save_plan(plan: HighLevelPlan, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(plan.to_dict(), indent=2) + "\n")
    return path


def load_plan(path) -> HighLevelPlan:
    """Load a plan file; hand-edited (manually corrected) plans are accepted
    as pipeline input, so invariants are re-checked by the caller."""
    return HighLevelPlan.from_dict(json.loads(Path(path).read_text()))
