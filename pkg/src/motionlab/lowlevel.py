"""Low-level planning: one discrete position per body part per step.

Three querying strategies (hierarchical tree walk, position-by-position
yes/no, all-options-at-once), each preceded by a free-language description
query and followed by a single self-reflection round that may replan the
part once.  Every strategy is total: unparseable replies fall back to
`neutral` with a warning, so any reply stream yields a complete plan.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .errors import ParseError
from .gateway import ChatSession
from .highlevel import (
    FORMAT_NUDGE,
    HighLevelPlan,
    HighLevelStep,
    MotionInstruction,
    _extract_json_steps,
    _repair_steps,
    is_affirmative,
)
from .prompts import JSON_FORMAT_NOTE, PromptLibrary
from .skeleton import Skeleton
from .taxonomy import NEUTRAL, BodyPart, DecisionNode, PoseTaxonomy

log = logging.getLogger(__name__)

STRATEGIES = ("hierarchical", "one_by_one", "all")
REASK_NUDGE = "Please answer with exactly one of the listed options."


@dataclass
class Provenance:
    strategy: str
    # question path for hierarchical, candidate index for one_by_one,
    # matched token for all; None when the fallback fired
    path: object = None
    corrected: bool = False


@dataclass
class StepPoseAssignment:
    step_number: int
    positions: dict[BodyPart, str]
    provenance: dict[BodyPart, Provenance] = field(default_factory=dict)


@dataclass
class ReflectionEvent:
    step_number: int
    part: BodyPart
    position_before: str
    position_after: str
    analysis: str
    judgement: str
    corrected: bool


@dataclass
class AnimationPlan:
    high_level: HighLevelPlan
    frames: list[StepPoseAssignment]
    strategy: str = ""
    reflections: list[ReflectionEvent] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "high_level": self.high_level.to_dict(),
            "strategy": self.strategy,
            "frames": [
                {
                    "step_number": f.step_number,
                    "positions": {p.value: t for p, t in f.positions.items()},
                    "provenance": {
                        p.value: {"strategy": v.strategy, "path": v.path,
                                  "corrected": v.corrected}
                        for p, v in f.provenance.items()
                    },
                }
                for f in self.frames
            ],
            "reflections": [
                {
                    "step_number": e.step_number,
                    "part": e.part.value,
                    "position_before": e.position_before,
                    "position_after": e.position_after,
                    "analysis": e.analysis,
                    "judgement": e.judgement,
                    "corrected": e.corrected,
                }
                for e in self.reflections
            ],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AnimationPlan":
        return cls(
            high_level=HighLevelPlan.from_dict(doc["high_level"]),
            frames=[
                StepPoseAssignment(
                    step_number=f["step_number"],
                    positions={BodyPart(p): t for p, t in f["positions"].items()},
                    provenance={
                        BodyPart(p): Provenance(v["strategy"], v.get("path"),
                                                v.get("corrected", False))
                        for p, v in f.get("provenance", {}).items()
                    },
                )
                for f in doc["frames"]
            ],
            strategy=doc.get("strategy", ""),
            reflections=[
                ReflectionEvent(
                    step_number=e["step_number"],
                    part=BodyPart(e["part"]),
                    position_before=e["position_before"],
                    position_after=e["position_after"],
                    analysis=e.get("analysis", ""),
                    judgement=e.get("judgement", ""),
                    corrected=e["corrected"],
                )
                for e in doc.get("reflections", [])
            ],
            warnings=list(doc.get("warnings", [])),
        )


def neutral_assignment(step_number: int = 0) -> StepPoseAssignment:
    """The standing-start assignment used as step 1's previous context."""
    return StepPoseAssignment(
        step_number=step_number,
        positions={part: NEUTRAL for part in BodyPart},
    )


# --- option parsing ----------------------------------------------------------

_BOLD_RE = re.compile(r"\*\*(.+?)\*\*", re.DOTALL)
_CHOICE_LINE_RE = re.compile(r"choice\s*:\s*(.+)", re.IGNORECASE)


def _labels_in(text: str, labels: list[str]) -> list[str]:
    found = []
    lowered = text.lower()
    for label in labels:
        if re.search(rf"(?<![0-9A-Za-z_]){re.escape(label.lower())}(?![0-9A-Za-z_])", lowered):
            found.append(label)
    return found


def parse_option(reply: str, labels: list[str]) -> str | None:
    """Match one option label in a free-form reply.

    Bold-marked and "Choice:"-prefixed mentions take precedence over plain
    occurrences; more than one distinct label (or none) returns None so the
    caller can re-ask.
    """
    preferred_spans = _BOLD_RE.findall(reply) + _CHOICE_LINE_RE.findall(reply)
    for scope in (" ".join(preferred_spans), reply):
        if not scope:
            continue
        found = _labels_in(scope, labels)
        if len(set(found)) == 1:
            return found[0]
        if found:
            return None  # ambiguous within this scope
    return None


_REPLAN_NEG_RE = re.compile(
    r"\b(no need|not necessary|no necessity|unnecessary|"
    r"(?:do not|don't|should not|shouldn't|isn't|is not|no)\s+(?:\w+\s+){0,3}replan)\b",
    re.IGNORECASE,
)
_REPLAN_RE = re.compile(r"\breplan\b", re.IGNORECASE)


def parse_judgement(reply: str) -> bool | None:
    """True = replan requested, False = keep, None = undecidable."""
    if _REPLAN_NEG_RE.search(reply):
        return False
    if _REPLAN_RE.search(reply):
        return True
    clause = reply.strip().lower()
    if re.match(r"^(yes|yeah|yep|indeed)\b", clause):
        return True
    if re.match(r"^(no|nope|keep)\b", clause):
        return False
    return None


# --- per-part selection ------------------------------------------------------

@dataclass
class _PartContext:
    taxonomy: PoseTaxonomy
    library: PromptLibrary
    session: ChatSession
    step: HighLevelStep
    warnings: list[str]


def _fallback(ctx: _PartContext, part: BodyPart, reason: str) -> tuple[str, Provenance]:
    ctx.warnings.append(
        f"step {ctx.step.step_number} {part.value}: {reason}; defaulted to {NEUTRAL}")
    return NEUTRAL, Provenance(strategy="fallback", path=None)


def _select_hierarchical(ctx: _PartContext, part: BodyPart) -> tuple[str, Provenance]:
    node: DecisionNode | str = ctx.taxonomy.decision_tree(part)
    path: list[str] = []
    while isinstance(node, DecisionNode):
        labels = list(node.options)
        reply = ctx.session.send(node.render())
        label = parse_option(reply, labels)
        if label is None:
            reply = ctx.session.send(REASK_NUDGE)
            label = parse_option(reply, labels)
        if label is None:
            return _fallback(ctx, part, "no option label matched in tree question")
        path.append(label)
        node = node.options[label]
    return node, Provenance(strategy="hierarchical", path=path)


def _select_one_by_one(ctx: _PartContext, part: BodyPart,
                       last_position: str) -> tuple[str, Provenance]:
    for index, spec in enumerate(ctx.taxonomy.positions_for(part)):
        prompt = ctx.library.choice_one_by_one(ctx.taxonomy, part, last_position, spec.id)
        if is_affirmative(ctx.session.send(prompt)):
            return spec.id, Provenance(strategy="one_by_one", path=index)
    return _fallback(ctx, part, "no candidate affirmed")


def _select_all(ctx: _PartContext, part: BodyPart,
                last_position: str) -> tuple[str, Provenance]:
    tokens = [spec.id for spec in ctx.taxonomy.positions_for(part)]
    reply = ctx.session.send(ctx.library.choice_all(ctx.taxonomy, part, last_position))
    token = parse_option(reply, tokens)
    if token is None:
        reply = ctx.session.send(REASK_NUDGE)
        token = parse_option(reply, tokens)
    if token is None:
        return _fallback(ctx, part, "no position token matched")
    return token, Provenance(strategy="all", path=token)


_SELECTORS: dict[str, Callable] = {
    "hierarchical": lambda ctx, part, last: _select_hierarchical(ctx, part),
    "one_by_one": _select_one_by_one,
    "all": _select_all,
}


def reflect_and_correct(ctx: _PartContext, part: BodyPart, candidate: str,
                        strategy: str, last_position: str) -> tuple[str, ReflectionEvent]:
    """One analysis -> judgement -> optional correction round.

    A replan verdict re-runs the owning strategy's selection once; the event's
    corrected flag is true only when the final token actually changed.
    """
    analysis = ctx.session.send(ctx.library.reflection_analysis())
    judgement_reply = ctx.session.send(ctx.library.reflection_judgement())
    verdict = parse_judgement(judgement_reply)
    final = candidate
    if verdict is None:
        ctx.warnings.append(
            f"step {ctx.step.step_number} {part.value}: unparseable reflection "
            "judgement; candidate kept")
    elif verdict:
        ctx.session.send(ctx.library.correction(
            ctx.taxonomy, part, candidate, judgement_reply.strip(), ctx.step.step_number))
        final, _ = _SELECTORS[strategy](ctx, part, last_position)
    event = ReflectionEvent(
        step_number=ctx.step.step_number,
        part=part,
        position_before=candidate,
        position_after=final,
        analysis=analysis,
        judgement=judgement_reply,
        corrected=final != candidate,
    )
    return final, event


def _assign(strategy: str, step: HighLevelStep, prev: StepPoseAssignment,
            session: ChatSession, taxonomy: PoseTaxonomy, library: PromptLibrary,
            instruction_text: str, reflect: bool = True,
            ) -> tuple[StepPoseAssignment, list[ReflectionEvent], list[str]]:
    warnings: list[str] = []
    ctx = _PartContext(taxonomy, library, session, step, warnings)
    session.send(library.step_setup(
        instruction_text, step.step_number, step.initial_state,
        step.final_state, step.movement))

    positions: dict[BodyPart, str] = {}
    provenance: dict[BodyPart, Provenance] = {}
    events: list[ReflectionEvent] = []
    for part in taxonomy.list_body_parts():
        last = prev.positions[part]
        session.send(library.language_description(taxonomy, part, last, step.step_number))
        token, prov = _SELECTORS[strategy](ctx, part, last)
        if reflect:
            token, event = reflect_and_correct(ctx, part, token, strategy, last)
            prov.corrected = event.corrected
            events.append(event)
        positions[part] = token
        provenance[part] = prov
    assignment = StepPoseAssignment(step.step_number, positions, provenance)
    for warning in warnings:
        log.warning("%s", warning)
    return assignment, events, warnings


def assign_hierarchical(step, prev, session, taxonomy, library,
                        instruction_text, reflect=True):
    """Walk each part's decision tree from large to atomic components."""
    return _assign("hierarchical", step, prev, session, taxonomy, library,
                   instruction_text, reflect)


def assign_one_by_one(step, prev, session, taxonomy, library,
                      instruction_text, reflect=True):
    """Offer candidate positions sequentially; the first affirmed one wins."""
    return _assign("one_by_one", step, prev, session, taxonomy, library,
                   instruction_text, reflect)


def assign_all(step, prev, session, taxonomy, library,
               instruction_text, reflect=True):
    """Present the full position list at once and parse the named choice."""
    return _assign("all", step, prev, session, taxonomy, library,
                   instruction_text, reflect)


def build_animation_plan(high: HighLevelPlan, strategy: str,
                         session_factory: Callable[[], ChatSession],
                         taxonomy: PoseTaxonomy,
                         library: PromptLibrary | None = None,
                         reflect: bool = True) -> AnimationPlan:
    """Fold a per-step assignment strategy over the high-level plan, threading
    each step's assignment into the next as the "last position" context."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown low-level strategy {strategy!r}")
    library = library or PromptLibrary.bundled()
    session = session_factory()
    frames: list[StepPoseAssignment] = []
    reflections: list[ReflectionEvent] = []
    warnings: list[str] = []
    prev = neutral_assignment()
    for step in high.steps:
        assignment, events, warns = _assign(
            strategy, step, prev, session, taxonomy, library,
            high.instruction.text, reflect)
        frames.append(assignment)
        reflections.extend(events)
        warnings.extend(warns)
        prev = assignment
    return AnimationPlan(high, frames, strategy, reflections, warnings)


def save_animation_plan(plan: AnimationPlan, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(plan.to_dict(), indent=2) + "\n")
    return path


def load_animation_plan(path) -> AnimationPlan:
    return AnimationPlan.from_dict(json.loads(Path(path).read_text()))


# --- raw avatar control parameters -------------------------------------------

RAW_SETUP_TEMPLATE = (
    "The human avatar is driven by a skeleton with the following joints and "
    "their initial world coordinates in meters (x = avatar's left, y = up, "
    "z = forward):\n{joint listing}\n"
    "Rotations are Euler angles in degrees applied as (x, y, z); positive x "
    "pitches forward, positive y turns left, positive z rolls toward the "
    "avatar's left. The root joint m_avg_Pelvis may also translate in "
    "meters.\n"
    "The textual human motion instruction is \"{motion instruction}\". "
    "Decompose it into sequential steps with a time range in seconds for "
    "each step."
)
RAW_JOINTS_PROMPT = (
    "Which joints are relevant in Step{step number}? List the joint names.")
RAW_DIRECTION_PROMPT = (
    "Describe the rotational direction of {joint} during Step{step number}.")
RAW_QUANTITY_PROMPT = (
    "Give the rotation of {joint} during Step{step number} as Euler degrees "
    "in the form (x, y, z).")
RAW_ROOT_PROMPT = (
    "Does the root joint translate during Step{step number}? If so, reply "
    "with a direction (forward/backward/left/right/up/down) and a distance "
    "in meters; otherwise reply \"no root movement\".")

ANATOMICAL_BOUND_DEG = 180.0

_TRIPLE_RE = re.compile(
    r"\(?\s*(-?\d+(?:\.\d+)?)\s*[, ]\s*(-?\d+(?:\.\d+)?)\s*[, ]\s*(-?\d+(?:\.\d+)?)\s*\)?")
_ROOT_DIR = {
    "forward": (0.0, 0.0, 1.0), "backward": (0.0, 0.0, -1.0),
    "left": (1.0, 0.0, 0.0), "right": (-1.0, 0.0, 0.0),
    "up": (0.0, 1.0, 0.0), "down": (0.0, -1.0, 0.0),
}


@dataclass
class RawJointDelta:
    joint: str
    direction: str
    rotation_deg: tuple[float, float, float]


@dataclass
class RawJointStep:
    step_number: int
    time_range: tuple[float, float]
    deltas: list[RawJointDelta] = field(default_factory=list)
    root_translation: tuple[float, float, float] | None = None


@dataclass
class RawJointPlan:
    instruction: MotionInstruction
    steps: list[RawJointStep]
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "instruction": {"id": self.instruction.id, "text": self.instruction.text},
            "mode": "raw",
            "steps": [
                {
                    "step_number": s.step_number,
                    "time_range": list(s.time_range),
                    "deltas": [
                        {"joint": d.joint, "direction": d.direction,
                         "rotation_deg": list(d.rotation_deg)}
                        for d in s.deltas
                    ],
                    "root_translation": (
                        list(s.root_translation) if s.root_translation else None),
                }
                for s in self.steps
            ],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RawJointPlan":
        return cls(
            instruction=MotionInstruction(**doc["instruction"]),
            steps=[
                RawJointStep(
                    step_number=s["step_number"],
                    time_range=tuple(s["time_range"]),
                    deltas=[
                        RawJointDelta(d["joint"], d["direction"],
                                      tuple(d["rotation_deg"]))
                        for d in s["deltas"]
                    ],
                    root_translation=(
                        tuple(s["root_translation"]) if s.get("root_translation") else None),
                )
                for s in doc["steps"]
            ],
            warnings=list(doc.get("warnings", [])),
        )


def _parse_root_translation(reply: str) -> tuple[float, float, float] | None:
    lowered = reply.lower()
    m = re.search(r"(-?\d+(?:\.\d+)?)", lowered)
    if m is None:
        return None
    magnitude = float(m.group(1))
    for word, axis in _ROOT_DIR.items():
        if re.search(rf"\b{word}\b", lowered):
            return tuple(magnitude * c for c in axis)
    triple = _TRIPLE_RE.search(reply)
    if triple:
        return tuple(float(g) for g in triple.groups())
    return None


def plan_raw_parameters(instruction: MotionInstruction, session: ChatSession,
                        skeleton: Skeleton,
                        parse_retries: int = 2) -> RawJointPlan:
    """Raw control-parameter mode: the model emits joint names, rotation
    directions, and Euler quantities directly, bypassing the position
    vocabulary.

    Values are recorded verbatim; rotations beyond the anatomical bound are
    kept but flagged so the exaggeration failure mode stays observable.
    """
    warnings: list[str] = []
    neutral_fk = skeleton.forward_kinematics(skeleton.neutral_pose())
    listing = "\n".join(
        f"- {name}: ({p[0]:.3f}, {p[1]:.3f}, {p[2]:.3f})"
        for name, p in neutral_fk.items()
    )
    setup = RAW_SETUP_TEMPLATE.replace("{joint listing}", listing).replace(
        "{motion instruction}", instruction.text)
    reply = session.send(setup + JSON_FORMAT_NOTE)
    entries = _extract_json_steps(reply)
    attempts = 0
    while entries is None and attempts < parse_retries:
        attempts += 1
        reply = session.send(FORMAT_NUDGE)
        entries = _extract_json_steps(reply)
    if entries is None:
        raise ParseError(f"no parseable step decomposition for instruction {instruction.id}")
    high_steps = _repair_steps(entries, warnings)

    known = set(skeleton.joint_names)
    steps: list[RawJointStep] = []
    for hstep in high_steps:
        n = hstep.step_number
        raw_step = RawJointStep(step_number=n, time_range=hstep.time_range)
        joints_reply = session.send(RAW_JOINTS_PROMPT.replace("{step number}", str(n)))
        joints = [j for j in re.findall(r"m_avg_\w+", joints_reply) if j in known]
        bogus = set(re.findall(r"m_avg_\w+", joints_reply)) - known
        if bogus:
            warnings.append(f"step {n}: unknown joints dropped: {sorted(bogus)}")
        seen = set()
        for joint in joints:
            if joint in seen or joint == skeleton.root:
                continue
            seen.add(joint)
            direction = session.send(
                RAW_DIRECTION_PROMPT.replace("{joint}", joint).replace("{step number}", str(n)))
            quantity_reply = session.send(
                RAW_QUANTITY_PROMPT.replace("{joint}", joint).replace("{step number}", str(n)))
            m = _TRIPLE_RE.search(quantity_reply)
            if m is None:
                warnings.append(f"step {n}: unparseable rotation for {joint}; joint dropped")
                continue
            vec = tuple(float(g) for g in m.groups())
            if any(abs(c) > ANATOMICAL_BOUND_DEG for c in vec):
                warnings.append(f"step {n}: {joint} rotation {vec} exceeds anatomical bound")
            raw_step.deltas.append(RawJointDelta(joint, direction.strip(), vec))
        root_reply = session.send(RAW_ROOT_PROMPT.replace("{step number}", str(n)))
        if not re.search(r"\bno root movement\b", root_reply.lower()):
            raw_step.root_translation = _parse_root_translation(root_reply)
        steps.append(raw_step)

    for warning in warnings:
        log.warning("raw plan %s: %s", instruction.id, warning)
    return RawJointPlan(instruction, steps, warnings)
