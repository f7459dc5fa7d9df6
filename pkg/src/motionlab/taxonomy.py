"""Discrete body-part position vocabulary and its hierarchical question trees.

The vocabulary ships as a bundled, versioned JSON file; this module loads it,
validates the structural invariants, and answers lookups for the planners.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

MAX_TREE_QUESTIONS = 5


class BodyPart(str, Enum):
    """The 16 preset body parts, in canonical querying order (left/right
    counterparts adjacent so related parts are asked sequentially)."""

    Head = "Head"
    Torso = "Torso"
    LeftUpperArm = "LeftUpperArm"
    RightUpperArm = "RightUpperArm"
    LeftElbow = "LeftElbow"
    RightElbow = "RightElbow"
    LeftWrist = "LeftWrist"
    RightWrist = "RightWrist"
    LeftUpperLeg = "LeftUpperLeg"
    RightUpperLeg = "RightUpperLeg"
    LeftKnee = "LeftKnee"
    RightKnee = "RightKnee"
    LeftAnkle = "LeftAnkle"
    RightAnkle = "RightAnkle"
    LeftToes = "LeftToes"
    RightToes = "RightToes"

    @property
    def kind(self) -> str:
        """Part kind with the side prefix stripped (Elbow, Head, ...)."""
        return re.sub(r"^(Left|Right)", "", self.value)

    @property
    def side(self) -> str | None:
        if self.value.startswith("Left"):
            return "left"
        if self.value.startswith("Right"):
            return "right"
        return None


NEUTRAL = "neutral"


@dataclass(frozen=True)
class PositionSpec:
    id: str
    description: str


@dataclass
class DecisionNode:
    """One question with an ordered option map; values are either terminal
    position tokens (str) or nested DecisionNodes."""

    question: str
    options: dict[str, "DecisionNode | str"]

    def leaves(self) -> list[str]:
        out: list[str] = []
        for value in self.options.values():
            if isinstance(value, DecisionNode):
                out.extend(value.leaves())
            else:
                out.append(value)
        return out

    def render(self) -> str:
        """Question text followed by the enumerated option labels."""
        labels = ", ".join(f"**{label}**" for label in self.options)
        return f"{self.question} {labels}."


@dataclass
class PartEntry:
    part: BodyPart
    phrase: str
    paired_with: BodyPart | None
    positions: list[PositionSpec]
    tree: DecisionNode


@dataclass
class Violation:
    part: str
    path: str
    rule: str
    detail: str = ""

    def __str__(self) -> str:
        msg = f"{self.part} @ {self.path or '<root>'}: {self.rule}"
        return f"{msg} ({self.detail})" if self.detail else msg


@dataclass
class PoseTaxonomy:
    version: str
    parts: dict[BodyPart, PartEntry]
    descriptions_reconstructed: bool = False
    _desc: dict[tuple[BodyPart, str], str] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for part, entry in self.parts.items():
            for spec in entry.positions:
                self._desc[(part, spec.id)] = spec.description

    def list_body_parts(self) -> list[BodyPart]:
        """All 16 parts in canonical order."""
        return list(BodyPart)

    def positions_for(self, part: BodyPart) -> list[PositionSpec]:
        """Complete position set for a part, in stable (tree traversal) order."""
        return list(self.parts[part].positions)

    def decision_tree(self, part: BodyPart) -> DecisionNode:
        return self.parts[part].tree

    def phrase(self, part: BodyPart) -> str:
        return self.parts[part].phrase

    def description(self, part: BodyPart, position: str) -> str:
        return self._desc[(part, position)]

    def is_valid_position(self, part: BodyPart, position: str) -> bool:
        return (part, position) in self._desc


def _node_from_json(obj) -> DecisionNode | str:
    if isinstance(obj, str):
        return obj
    return DecisionNode(
        question=obj["question"],
        options={k: _node_from_json(v) for k, v in obj["options"].items()},
    )


def load_taxonomy(path=None) -> PoseTaxonomy:
    """Load the bundled taxonomy, or one from an explicit path.

    Raises ValueError for unknown part ids; structural problems are left to
    validate_taxonomy, which reports them as data.
    """
    if path is None:
        raw = resources.files("motionlab.data").joinpath("taxonomy.json").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    doc = json.loads(raw)

    known = {p.value for p in BodyPart}
    unknown = set(doc["parts"]) - known
    if unknown:
        raise ValueError(f"unknown body part ids in taxonomy file: {sorted(unknown)}")

    parts: dict[BodyPart, PartEntry] = {}
    for name, payload in doc["parts"].items():
        part = BodyPart(name)
        paired = payload.get("paired_with")
        parts[part] = PartEntry(
            part=part,
            phrase=payload["phrase"],
            paired_with=BodyPart(paired) if paired else None,
            positions=[PositionSpec(p["id"], p["description"]) for p in payload["positions"]],
            tree=_node_from_json(payload["tree"]),
        )
    return PoseTaxonomy(
        version=doc["version"],
        parts=parts,
        descriptions_reconstructed=doc.get("descriptions_reconstructed", False),
    )


def _walk(node, part: str, path: str, depth: int, seen: set[int], out: list[Violation]) -> list[str]:
    """Collect leaf tokens; record acyclicity/depth violations along the way."""
    if id(node) in seen:
        out.append(Violation(part, path, "tree must be acyclic"))
        return []
    if depth > MAX_TREE_QUESTIONS:
        out.append(Violation(part, path, f"tree deeper than {MAX_TREE_QUESTIONS} questions"))
        return []
    seen = seen | {id(node)}
    leaves: list[str] = []
    for label, value in node.options.items():
        child_path = f"{path}/{label}" if path else label
        if isinstance(value, DecisionNode):
            leaves.extend(_walk(value, part, child_path, depth + 1, seen, out))
        else:
            leaves.append(value)
    return leaves


_SIDE_WORDS = [("left", "right"), ("Left", "Right")]


def _strip_side(text: str) -> str:
    for a, b in _SIDE_WORDS:
        text = re.sub(rf"\b{a}\b", "\0", text)
        text = re.sub(rf"\b{b}\b", "\0", text)
    return text


def _tree_shape(node) -> object:
    if isinstance(node, str):
        return _strip_side(node)
    return (
        _strip_side(node.question),
        tuple((_strip_side(k), _tree_shape(v)) for k, v in node.options.items()),
    )


def validate_taxonomy(taxonomy: PoseTaxonomy) -> list[Violation]:
    """Empty list iff every structural invariant holds.

    Violations are data, not exceptions: each names the part, the node path
    within its tree, and the rule broken.
    """
    out: list[Violation] = []

    present = set(taxonomy.parts)
    for part in BodyPart:
        if part not in present:
            out.append(Violation(part.value, "", "part missing from taxonomy"))

    broken_trees: set[BodyPart] = set()
    for part, entry in taxonomy.parts.items():
        tokens = [p.id for p in entry.positions]
        if len(set(tokens)) != len(tokens):
            dupes = sorted({t for t in tokens if tokens.count(t) > 1})
            out.append(Violation(part.value, "", "position ids must be unique", str(dupes)))
        if NEUTRAL not in tokens:
            out.append(Violation(part.value, "", "position set must contain 'neutral'"))

        structural = len(out)
        leaves = _walk(entry.tree, part.value, "", 1, set(), out)
        if any(v.rule.startswith("tree") for v in out[structural:]):
            broken_trees.add(part)
        if sorted(leaves) != sorted(tokens):
            missing = sorted(set(tokens) - set(leaves))
            extra = sorted(set(leaves) - set(tokens))
            out.append(Violation(
                part.value, "", "tree leaf set must equal position set",
                f"missing={missing} extra={extra}",
            ))
        if entry.tree.options.get(NEUTRAL) != NEUTRAL and NEUTRAL not in [
            v for v in entry.tree.options.values() if isinstance(v, str)
        ]:
            out.append(Violation(part.value, "", "'neutral' must be a direct root option"))

    # paired trees must be isomorphic up to left/right wording
    for part, entry in taxonomy.parts.items():
        mate = entry.paired_with
        if mate is None or part.side != "left":
            continue
        if mate not in taxonomy.parts:
            out.append(Violation(part.value, "", "paired part missing", mate.value))
            continue
        if part in broken_trees or mate in broken_trees:
            continue  # shape comparison is meaningless on a broken tree
        if _tree_shape(entry.tree) != _tree_shape(taxonomy.parts[mate].tree):
            out.append(Violation(
                part.value, "", "paired trees must match up to left/right wording", mate.value,
            ))
    return out
