"""Joint hierarchy, poses, and the (body part, position) -> joint rotation
rule table that deterministically maps discrete positions onto the skeleton.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import UnknownPosition
from .euler import Vec3, euler_to_matrix
from .taxonomy import BodyPart, PoseTaxonomy

_IDENTITY = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Joint:
    name: str
    parent: str | None
    offset: Vec3
    # rest orientation O: the authored Euler rotation acts as O * R * O^-1,
    # so e.g. the elbows' local +Y axis is their flexion axis
    orientation: Vec3 = _IDENTITY


@dataclass
class Pose:
    """Per-joint Euler rotations (degrees) plus a root translation (meters).

    Keys always equal the owning skeleton's joint set.
    """

    rotations: dict[str, Vec3]
    root_translation: Vec3 = (0.0, 0.0, 0.0)

    def copy(self) -> "Pose":
        return Pose(dict(self.rotations), tuple(self.root_translation))


class Skeleton:
    def __init__(self, version: str, joints: list[Joint],
                 body_parts: dict[BodyPart, list[str]],
                 end_sites: dict[str, Vec3] | None = None):
        self.version = version
        self.joints = joints
        self.by_name = {j.name: j for j in joints}
        self.body_parts = body_parts
        self.end_sites = end_sites or {}
        self._children: dict[str | None, list[str]] = {}
        for j in joints:
            self._children.setdefault(j.parent, []).append(j.name)
        roots = self._children.get(None, [])
        if len(roots) != 1:
            raise ValueError(f"skeleton must have exactly one root, got {roots}")
        self.root = roots[0]
        # cache rest orientation matrices; most joints are identity
        self._orient: dict[str, np.ndarray | None] = {}
        for j in joints:
            self._orient[j.name] = (
                None if j.orientation == _IDENTITY else euler_to_matrix(j.orientation)
            )

    @property
    def joint_names(self) -> list[str]:
        return [j.name for j in self.joints]

    def children(self, name: str) -> list[str]:
        return self._children.get(name, [])

    def preorder(self) -> list[str]:
        out: list[str] = []

        def visit(name: str):
            out.append(name)
            for child in self.children(name):
                visit(child)

        visit(self.root)
        return out

    def joints_for(self, part: BodyPart) -> list[str]:
        return self.body_parts[part]

    def neutral_pose(self) -> Pose:
        """All joint rotations zero, root translation zero (natural stance)."""
        return Pose({name: _IDENTITY for name in self.joint_names})

    def local_rotation_matrix(self, joint: str, angles: Vec3) -> np.ndarray:
        """Effective local rotation in the parent frame: O * R(angles) * O^-1."""
        rot = euler_to_matrix(angles)
        orient = self._orient[joint]
        if orient is None:
            return rot
        return orient @ rot @ orient.T

    def forward_kinematics(self, pose: Pose) -> dict[str, np.ndarray]:
        """World-space joint positions (meters), root transforms first.

        Deterministic: identical poses give bitwise-identical outputs.
        """
        missing = set(self.by_name) ^ set(pose.rotations)
        if missing:
            raise ValueError(f"pose keys do not match skeleton joints: {sorted(missing)}")
        positions: dict[str, np.ndarray] = {}
        world_rot: dict[str, np.ndarray] = {}

        def visit(name: str, parent: str | None):
            joint = self.by_name[name]
            local = self.local_rotation_matrix(name, pose.rotations[name])
            offset = np.asarray(joint.offset, dtype=float)
            if parent is None:
                positions[name] = np.asarray(pose.root_translation, dtype=float) + offset
                world_rot[name] = local
            else:
                positions[name] = positions[parent] + world_rot[parent] @ offset
                world_rot[name] = world_rot[parent] @ local
            for child in self.children(name):
                visit(child, name)

        visit(self.root, None)
        return positions

    def to_dict(self) -> dict:
        """JSON-ready description, embedded in exported clips for playback."""
        return {
            "version": self.version,
            "joints": [
                {
                    "name": j.name,
                    "parent": j.parent,
                    "offset": list(j.offset),
                    "orientation": list(j.orientation),
                }
                for j in self.joints
            ],
            "end_sites": {k: list(v) for k, v in self.end_sites.items()},
            "body_parts": {p.value: list(js) for p, js in self.body_parts.items()},
        }


@dataclass(frozen=True)
class RotationRule:
    part: BodyPart
    position: str
    joint_rotations: dict[str, Vec3] = field(hash=False)


class RuleTable:
    """Complete (part, position) -> joint rotations mapping, validated at load."""

    def __init__(self, version: str, rules: list[RotationRule],
                 taxonomy_version: str = "", skeleton_version: str = ""):
        self.version = version
        self.rules = rules
        self.taxonomy_version = taxonomy_version
        self.skeleton_version = skeleton_version
        self._index = {(r.part, r.position): r for r in rules}
        if len(self._index) != len(rules):
            raise ValueError("duplicate (part, position) rules")

    def rule(self, part: BodyPart, position: str) -> RotationRule:
        try:
            return self._index[(part, position)]
        except KeyError:
            raise UnknownPosition(f"no rotation rule for ({part.value}, {position})") from None

    def apply_position(self, pose: Pose, part: BodyPart, position: str,
                       skeleton: Skeleton) -> Pose:
        """New pose with this part's joints set to the rule's rotations;
        every other joint unchanged.  Assignment, not accumulation, so the
        operation is idempotent."""
        rule = self.rule(part, position)
        out = pose.copy()
        for joint in skeleton.joints_for(part):
            out.rotations[joint] = rule.joint_rotations.get(joint, _IDENTITY)
        return out

    def validate(self, taxonomy: PoseTaxonomy, skeleton: Skeleton) -> list[str]:
        """Totality over the taxonomy, all-zero neutral rules, left/right
        mirror symmetry (y, z negated), the +-180 degree sanity bound, and
        version agreement with the given taxonomy and skeleton."""
        problems: list[str] = []
        if self.taxonomy_version and self.taxonomy_version != taxonomy.version:
            problems.append(
                f"rule table targets taxonomy {self.taxonomy_version}, "
                f"loaded taxonomy is {taxonomy.version}")
        if self.skeleton_version and self.skeleton_version != skeleton.version:
            problems.append(
                f"rule table targets skeleton {self.skeleton_version}, "
                f"loaded skeleton is {skeleton.version}")
        for part in taxonomy.list_body_parts():
            part_joints = set(skeleton.joints_for(part))
            for spec in taxonomy.positions_for(part):
                rule = self._index.get((part, spec.id))
                if rule is None:
                    problems.append(f"missing rule ({part.value}, {spec.id})")
                    continue
                if not set(rule.joint_rotations) <= part_joints:
                    problems.append(f"rule ({part.value}, {spec.id}) touches foreign joints")
                for joint, vec in rule.joint_rotations.items():
                    if any(abs(c) > 180.0 for c in vec):
                        problems.append(
                            f"rule ({part.value}, {spec.id}) rotates {joint} beyond +-180")
                if spec.id == "neutral" and any(
                    v != _IDENTITY for v in rule.joint_rotations.values()
                ):
                    problems.append(f"neutral rule for {part.value} is not all-zero")
        extra = set(self._index) - {
            (p, s.id) for p in taxonomy.list_body_parts() for s in taxonomy.positions_for(p)
        }
        for part, pos in sorted(extra, key=lambda k: (k[0].value, k[1])):
            problems.append(f"rule ({part.value}, {pos}) has no taxonomy position")

        for (part, pos), rule in self._index.items():
            if part.side != "left":
                continue
            mate = BodyPart("Right" + part.kind)
            mate_rule = self._index.get((mate, pos))
            if mate_rule is None:
                continue  # reported as missing above
            mirrored = {
                j.replace("_L_", "_R_"): (v[0], -v[1], -v[2])
                for j, v in rule.joint_rotations.items()
            }
            got = {j: tuple(v) for j, v in mate_rule.joint_rotations.items()}
            if mirrored != got:
                problems.append(f"mirror mismatch for ({part.value}, {pos})")
        return problems


def load_skeleton(path=None) -> Skeleton:
    if path is None:
        raw = resources.files("motionlab.data").joinpath("skeleton.json").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    doc = json.loads(raw)
    joints = [
        Joint(
            name=j["name"],
            parent=j["parent"],
            offset=tuple(j["offset"]),
            orientation=tuple(j.get("orientation", _IDENTITY)),
        )
        for j in doc["joints"]
    ]
    body_parts = {BodyPart(k): v for k, v in doc["body_parts"].items()}
    end_sites = {k: tuple(v) for k, v in doc.get("end_sites", {}).items()}
    return Skeleton(doc["version"], joints, body_parts, end_sites)


def load_rules(path=None) -> RuleTable:
    if path is None:
        raw = resources.files("motionlab.data").joinpath("rotation_rules.json").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    doc = json.loads(raw)
    rules = [
        RotationRule(
            part=BodyPart(r["part"]),
            position=r["position"],
            joint_rotations={j: tuple(v) for j, v in r["joint_rotations"].items()},
        )
        for r in doc["rules"]
    ]
    return RuleTable(doc["version"], rules,
                     taxonomy_version=doc.get("taxonomy_version", ""),
                     skeleton_version=doc.get("skeleton_version", ""))
