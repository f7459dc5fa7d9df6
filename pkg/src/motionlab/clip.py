"""Keyframed animation clips: deterministic compilation from plans, linear
sampling between keyframes, and clip-json / BVH export.

A taxonomy-driven clip always starts with a neutral keyframe at t=0 and adds
one keyframe at each step's end time; the high-level plan supplies all
temporal structure.  Interpolation is componentwise linear on the Euler
channels and the root translation, exactly as rendered.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path

from .errors import OutOfRange, UnknownJoint
from .euler import Vec3, euler_to_matrix, matrix_to_euler
from .lowlevel import AnimationPlan, RawJointPlan
from .skeleton import Pose, RuleTable, Skeleton

DEFAULT_FPS = 30.0
CLIP_FORMAT = "clip-json"
CLIP_SCHEMA_VERSION = 1


@dataclass
class Keyframe:
    time: float
    rotations: dict[str, Vec3]
    root_translation: Vec3 = (0.0, 0.0, 0.0)


@dataclass
class AnimationClip:
    skeleton_version: str
    keyframes: list[Keyframe]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        times = [k.time for k in self.keyframes]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("keyframe times must be strictly increasing")

    @property
    def duration(self) -> float:
        return self.keyframes[-1].time if self.keyframes else 0.0

    def sample(self, t: float) -> Pose:
        """Pose at time t: exact at keyframes, componentwise linear between."""
        if t < 0 or t > self.duration:
            raise OutOfRange(f"t={t} outside [0, {self.duration}]")
        times = [k.time for k in self.keyframes]
        idx = bisect_right(times, t) - 1
        if idx < 0:
            idx = 0
        kf = self.keyframes[idx]
        if kf.time == t or idx == len(self.keyframes) - 1:
            return Pose(dict(kf.rotations), tuple(kf.root_translation))
        nxt = self.keyframes[idx + 1]
        alpha = (t - kf.time) / (nxt.time - kf.time)

        def lerp3(a: Vec3, b: Vec3) -> Vec3:
            return tuple(a[i] + (b[i] - a[i]) * alpha for i in range(3))

        rotations = {
            name: lerp3(kf.rotations[name], nxt.rotations[name])
            for name in kf.rotations
        }
        return Pose(rotations, lerp3(kf.root_translation, nxt.root_translation))


def compile_plan(plan: AnimationPlan, rules: RuleTable, skeleton: Skeleton) -> AnimationClip:
    """Map each step's position assignment onto joint rotations (Keyframe per
    step end, neutral start).  Pure function of (plan, rules, skeleton)."""
    keyframes = [Keyframe(0.0, skeleton.neutral_pose().rotations)]
    for frame, step in zip(plan.frames, plan.high_level.steps):
        pose = skeleton.neutral_pose()
        for part, token in frame.positions.items():
            pose = rules.apply_position(pose, part, token, skeleton)
        keyframes.append(Keyframe(step.time_range[1], pose.rotations))
    return AnimationClip(
        skeleton_version=skeleton.version,
        keyframes=keyframes,
        metadata={
            "motion_id": plan.high_level.instruction.id,
            "source": "taxonomy",
        },
    )


def compile_raw(plan: RawJointPlan, skeleton: Skeleton,
                clamp: bool = True) -> AnimationClip:
    """Raw-parameter compilation: per-step joint deltas accumulate onto the
    previous keyframe; root translations accumulate likewise.  Clamping to
    +-180 degrees is on by default and can be disabled to observe the
    exaggerated-rotation failure mode unmodified."""
    known = set(skeleton.joint_names)
    rotations = dict(skeleton.neutral_pose().rotations)
    root = (0.0, 0.0, 0.0)
    keyframes = [Keyframe(0.0, dict(rotations), root)]
    for step in plan.steps:
        for delta in step.deltas:
            if delta.joint not in known:
                raise UnknownJoint(delta.joint)
            current = rotations[delta.joint]
            new = tuple(current[i] + delta.rotation_deg[i] for i in range(3))
            if clamp:
                new = tuple(max(-180.0, min(180.0, c)) for c in new)
            rotations[delta.joint] = new
        if step.root_translation is not None:
            root = tuple(root[i] + step.root_translation[i] for i in range(3))
        keyframes.append(Keyframe(step.time_range[1], dict(rotations), root))
    return AnimationClip(
        skeleton_version=skeleton.version,
        keyframes=keyframes,
        metadata={"motion_id": plan.instruction.id, "source": "raw"},
    )


# --- clip-json ---------------------------------------------------------------

def clip_to_dict(clip: AnimationClip, skeleton: Skeleton | None = None) -> dict:
    doc = {
        "format": CLIP_FORMAT,
        "schema_version": CLIP_SCHEMA_VERSION,
        "skeleton_version": clip.skeleton_version,
        "duration": clip.duration,
        "metadata": dict(clip.metadata),
        "keyframes": [
            {
                "time": k.time,
                "rotations": {j: list(v) for j, v in k.rotations.items()},
                "root_translation": list(k.root_translation),
            }
            for k in clip.keyframes
        ],
    }
    if skeleton is not None:
        doc["skeleton"] = skeleton.to_dict()
    return doc


def clip_from_dict(doc: dict) -> AnimationClip:
    if doc.get("format") != CLIP_FORMAT:
        raise ValueError(f"not a {CLIP_FORMAT} document")
    return AnimationClip(
        skeleton_version=doc["skeleton_version"],
        keyframes=[
            Keyframe(
                time=k["time"],
                rotations={j: tuple(v) for j, v in k["rotations"].items()},
                root_translation=tuple(k["root_translation"]),
            )
            for k in doc["keyframes"]
        ],
        metadata=doc.get("metadata", {}),
    )


def export_clip_json(clip: AnimationClip, path, skeleton: Skeleton | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(clip_to_dict(clip, skeleton), indent=2) + "\n")
    return path


def load_clip_json(path) -> AnimationClip:
    return clip_from_dict(json.loads(Path(path).read_text()))


# --- BVH ----------------------------------------------------------------------

def _bvh_rotation(skeleton: Skeleton, joint: str, angles: Vec3) -> Vec3:
    # Oriented joints store their Euler values in the oriented frame; BVH
    # players expect the effective parent-frame rotation, so re-decompose.
    if skeleton.by_name[joint].orientation == (0.0, 0.0, 0.0):
        return angles
    return matrix_to_euler(skeleton.local_rotation_matrix(joint, angles))


def export_bvh(clip: AnimationClip, skeleton: Skeleton, path,
               fps: float = DEFAULT_FPS) -> Path:
    """Standard HIERARCHY/MOTION BVH with ZYX rotation channels, sampled at
    fps; frame count is floor(duration * fps) + 1."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines: list[str] = ["HIERARCHY"]

    def emit(joint_name: str, indent: int, is_root: bool):
        pad = "  " * indent
        joint = skeleton.by_name[joint_name]
        keyword = "ROOT" if is_root else "JOINT"
        lines.append(f"{pad}{keyword} {joint_name}")
        lines.append(f"{pad}{{")
        ox, oy, oz = joint.offset
        lines.append(f"{pad}  OFFSET {ox:.6f} {oy:.6f} {oz:.6f}")
        if is_root:
            lines.append(f"{pad}  CHANNELS 6 Xposition Yposition Zposition "
                         "Zrotation Yrotation Xrotation")
        else:
            lines.append(f"{pad}  CHANNELS 3 Zrotation Yrotation Xrotation")
        children = skeleton.children(joint_name)
        if children:
            for child in children:
                emit(child, indent + 1, False)
        else:
            end = skeleton.end_sites.get(joint_name, (0.0, 0.0, 0.0))
            lines.append(f"{pad}  End Site")
            lines.append(f"{pad}  {{")
            lines.append(f"{pad}    OFFSET {end[0]:.6f} {end[1]:.6f} {end[2]:.6f}")
            lines.append(f"{pad}  }}")
        lines.append(f"{pad}}}")

    emit(skeleton.root, 0, True)

    order = skeleton.preorder()
    frame_count = int(clip.duration * fps) + 1
    lines.append("MOTION")
    lines.append(f"Frames: {frame_count}")
    lines.append(f"Frame Time: {1.0 / fps:.8f}")
    for i in range(frame_count):
        t = min(i / fps, clip.duration)
        pose = clip.sample(t)
        values: list[float] = []
        for name in order:
            if name == skeleton.root:
                values.extend(pose.root_translation)
            x, y, z = _bvh_rotation(skeleton, name, pose.rotations[name])
            values.extend((z, y, x))
        lines.append(" ".join(f"{v:.6f}" for v in values))
    path.write_text("\n".join(lines) + "\n")
    return path


def bvh_check_roundtrip(skeleton: Skeleton) -> bool:
    """Sanity helper: oriented-joint conversion must preserve the rotation."""
    import numpy as np

    for joint in skeleton.joint_names:
        angles = (10.0, 20.0, 30.0)
        direct = skeleton.local_rotation_matrix(joint, angles)
        via_bvh = euler_to_matrix(_bvh_rotation(skeleton, joint, angles))
        if not np.allclose(direct, via_bvh, atol=1e-9):
            return False
    return True
