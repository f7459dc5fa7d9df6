"""Regenerate the client/server agreement fixtures.

Usage: python scripts/export_fixtures.py   (from frontend/)

Writes tests/fixtures/clips.json: 10 clips in the exact shape the service
serves to raters, each with a probe grid of sampler outputs and forward-
kinematics positions computed by the backend.  The vitest suite replays the
probes through the TypeScript sampler/FK and asserts agreement.
"""

import json
import sys
from pathlib import Path

import numpy as np

from motionlab.clip import clip_to_dict, compile_plan, compile_raw
from motionlab.highlevel import HighLevelPlan, HighLevelStep, MotionInstruction
from motionlab.lowlevel import (
    AnimationPlan,
    RawJointDelta,
    RawJointPlan,
    RawJointStep,
    StepPoseAssignment,
)
from motionlab.service import _blinded_clip
from motionlab.skeleton import load_rules, load_skeleton
from motionlab.taxonomy import NEUTRAL, BodyPart, load_taxonomy

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "clips.json"
PROBES_PER_CLIP = 25


def high(motion_id, durations):
    steps = []
    cursor = 0.0
    for i, d in enumerate(durations, start=1):
        steps.append(HighLevelStep(i, (cursor, cursor + d), f"m{i}", f"i{i}", f"f{i}"))
        cursor += d
    return HighLevelPlan(MotionInstruction(motion_id, f"fixture {motion_id}"), steps, "fixture")


def random_plan(motion_id, n_steps, rng, taxonomy):
    durations = [float(rng.integers(1, 4)) * 0.5 for _ in range(n_steps)]
    frames = []
    for i in range(1, n_steps + 1):
        positions = {}
        for part in BodyPart:
            specs = taxonomy.positions_for(part)
            positions[part] = specs[rng.integers(len(specs))].id
        frames.append(StepPoseAssignment(i, positions))
    return AnimationPlan(high(motion_id, durations), frames, "fixture")


def main() -> None:
    taxonomy = load_taxonomy()
    skeleton = load_skeleton()
    rules = load_rules()
    rng = np.random.default_rng(424242)

    clips = []
    # one canonical elbow bend, one raw-mode clip with root motion, eight random
    elbow = AnimationPlan(
        high(101, [2.0]),
        [StepPoseAssignment(1, {
            part: ("bent_in_90_degrees" if part is BodyPart.LeftElbow else NEUTRAL)
            for part in BodyPart})],
        "fixture")
    clips.append(("elbow_bend", compile_plan(elbow, rules, skeleton)))

    raw = RawJointPlan(MotionInstruction(102, "raw fixture"), [
        RawJointStep(1, (0.0, 1.0),
                     [RawJointDelta("m_avg_L_Elbow", "flex", (0.0, 60.0, 0.0))],
                     root_translation=(0.0, 0.0, 1.0)),
        RawJointStep(2, (1.0, 2.5),
                     [RawJointDelta("m_avg_R_Knee", "bend", (45.0, 0.0, 0.0))],
                     root_translation=(0.5, 0.0, 0.0)),
    ])
    clips.append(("raw_root_motion", compile_raw(raw, skeleton)))

    for i in range(8):
        plan = random_plan(200 + i, int(rng.integers(1, 6)), rng, taxonomy)
        clips.append((f"random_{i}", compile_plan(plan, rules, skeleton)))

    fixtures = []
    for name, clip in clips:
        times = sorted({k.time for k in clip.keyframes}
                       | {float(t) for t in rng.uniform(0, clip.duration,
                                                        size=PROBES_PER_CLIP)})
        samples = []
        fk_probes = []
        for t in times:
            pose = clip.sample(t)
            samples.append({
                "t": t,
                "rotations": {j: list(v) for j, v in pose.rotations.items()},
                "root_translation": list(pose.root_translation),
            })
            positions = skeleton.forward_kinematics(pose)
            fk_probes.append({
                "t": t,
                "positions": {j: [float(c) for c in p] for j, p in positions.items()},
            })
        fixtures.append({
            "name": name,
            "clip": _blinded_clip(clip_to_dict(clip, skeleton)),
            "samples": samples,
            "fk": fk_probes,
        })

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"fixtures": fixtures}) + "\n")
    print(f"wrote {OUT} ({len(fixtures)} clips)")


if __name__ == "__main__":
    sys.exit(main())
