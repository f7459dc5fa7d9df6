"""Acceptance suite: every release criterion at its stated tolerance.

Runs offline with replay clients only (no network, no API keys).  One
pass/fail line per criterion is printed in the terminal summary.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import (
    assignment,
    high_plan,
    high_script,
    low_script_hierarchical,
    neutral_paths,
)
from motionlab.clip import AnimationClip, Keyframe, compile_plan, export_clip_json
from motionlab.gateway import LlmConfig, ReplayClient, record_transcript, load_transcript
from motionlab.highlevel import MotionInstruction, plan_piece_by_piece, validate_plan
from motionlab.lowlevel import AnimationPlan, build_animation_plan
from motionlab.metrics import (
    OracleAnnotation,
    bppa,
    classify_agreement,
    motion_complexity,
    reflection_stats,
    stat_cell,
    weighted_kappa,
)
from motionlab.prompts import PromptLibrary
from motionlab.skeleton import load_rules, load_skeleton
from motionlab.taxonomy import NEUTRAL, BodyPart, load_taxonomy, validate_taxonomy

GOLDEN = Path(__file__).parent / "golden"

EXPECTED_CARDINALITIES = {
    "Head": 13, "Torso": 12, "LeftUpperArm": 20, "RightUpperArm": 20,
    "LeftElbow": 4, "RightElbow": 4, "LeftWrist": 6, "RightWrist": 6,
    "LeftUpperLeg": 15, "RightUpperLeg": 15, "LeftKnee": 4, "RightKnee": 4,
    "LeftAnkle": 5, "RightAnkle": 5, "LeftToes": 3, "RightToes": 3,
}


def test_taxonomy_integrity():
    """Bundled taxonomy: zero violations, reference cardinalities, leaf-set
    equality for all 16 parts, in under one second."""
    start = time.perf_counter()
    taxonomy = load_taxonomy()
    violations = validate_taxonomy(taxonomy)
    assert violations == []
    for part in taxonomy.list_body_parts():
        assert len(taxonomy.positions_for(part)) == EXPECTED_CARDINALITIES[part.value]
        leaves = taxonomy.decision_tree(part).leaves()
        assert sorted(leaves) == sorted(s.id for s in taxonomy.positions_for(part))
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"taxonomy validation took {elapsed:.2f}s"


def test_mapping_fixed_point():
    """LeftElbow bent_in_90_degrees compiles to m_avg_L_Elbow == (0, 90, 0)
    at the step keyframe, exactly."""
    skeleton = load_skeleton()
    rules = load_rules()
    plan = AnimationPlan(
        high_plan(3, [2.0]),
        [assignment(1, {BodyPart.LeftElbow: "bent_in_90_degrees"})],
        "hierarchical")
    clip = compile_plan(plan, rules, skeleton)
    assert clip.keyframes[1].time == 2.0
    assert clip.keyframes[1].rotations["m_avg_L_Elbow"] == (0.0, 90.0, 0.0)


def test_interpolation_suite():
    """sample() is exact at keyframe times, linear at midpoints within 1e-9,
    and agrees with an independent piecewise-linear evaluator on 1,000
    random (clip, t) probes within 1e-9."""
    rng = np.random.default_rng(101)
    joints = ("j1", "j2", "j3", "j4")

    def random_clip():
        n = int(rng.integers(2, 8))
        times = np.concatenate([[0.0], np.cumsum(rng.uniform(0.1, 2.0, size=n - 1))])
        return AnimationClip("test", [
            Keyframe(float(t),
                     {j: tuple(rng.uniform(-180, 180, size=3)) for j in joints},
                     tuple(rng.uniform(-2, 2, size=3)))
            for t in times
        ])

    clips = [random_clip() for _ in range(25)]

    for clip in clips:
        for kf in clip.keyframes:
            pose = clip.sample(kf.time)
            assert pose.rotations == kf.rotations  # exact, not approximate
        for a, b in zip(clip.keyframes, clip.keyframes[1:]):
            mid = clip.sample((a.time + b.time) / 2)
            for j in joints:
                for c in range(3):
                    expected = (a.rotations[j][c] + b.rotations[j][c]) / 2
                    assert abs(mid.rotations[j][c] - expected) <= 1e-9

    probes = 0
    while probes < 1000:
        clip = clips[int(rng.integers(len(clips)))]
        t = float(rng.uniform(0, clip.duration))
        pose = clip.sample(t)
        times = [k.time for k in clip.keyframes]
        for j in joints:
            for c in range(3):
                reference = float(np.interp(
                    t, times, [k.rotations[j][c] for k in clip.keyframes]))
                assert abs(pose.rotations[j][c] - reference) <= 1e-9
        probes += 1


def _scripted_pipeline_replies() -> list[str]:
    paths = neutral_paths()
    paths[BodyPart.LeftElbow] = ["bent", "bent_in_90_degrees"]
    paths[BodyPart.Head] = ["tilted_down", "tilted_down_slightly"]
    second = neutral_paths()
    second[BodyPart.LeftElbow] = ["bent", "fully_bent"]
    return (
        high_script([
            ("raise the arm", "standing", "arm raised", "1.5 seconds"),
            ("lower the arm", "arm raised", "standing", "2 seconds"),
        ])
        + low_script_hierarchical([paths, second])
    )


def _run_pipeline(client: ReplayClient, out_dir: Path) -> tuple[bytes, bytes]:
    config = LlmConfig()
    library = PromptLibrary.bundled()
    taxonomy = load_taxonomy()
    skeleton = load_skeleton()
    rules = load_rules()
    instruction = MotionInstruction(3, "Look down to check the time of the watch on the left wrist.")

    high_session = client.session(config, library.system_prompt)
    high = plan_piece_by_piece(instruction, high_session, library)
    assert validate_plan(high) == []
    low = build_animation_plan(
        high, "hierarchical",
        lambda: client.session(config, library.system_prompt),
        taxonomy, library)
    clip = compile_plan(low, rules, skeleton)

    plan_path = out_dir / "plan.json"
    plan_path.write_text(json.dumps(low.to_dict(), indent=2))
    clip_path = export_clip_json(clip, out_dir / "clip.json", skeleton)
    return plan_path.read_bytes(), clip_path.read_bytes()


def test_replay_determinism(tmp_path):
    """A full piece_by_piece + hierarchical pipeline run against a recorded
    replay script produces bit-identical plan and clip files across 5
    repeated executions."""
    # run once from the authored script, recording the session transcripts
    seed_client = ReplayClient(_scripted_pipeline_replies())
    config = LlmConfig()
    library = PromptLibrary.bundled()
    sessions = []

    original_session = seed_client.session

    def tracking_session(*args, **kwargs):
        session = original_session(*args, **kwargs)
        sessions.append(session)
        return session

    seed_client.session = tracking_session
    first_dir = tmp_path / "seed"
    first_dir.mkdir()
    reference = _run_pipeline(seed_client, first_dir)
    transcript_paths = [record_transcript(s, tmp_path / "transcripts")
                        for s in sessions]

    # replay the recorded transcripts; every execution must be bit-identical
    recorded_replies: list[str] = []
    for path in transcript_paths:
        recorded_replies.extend(load_transcript(path).assistant_replies())

    outputs = []
    for i in range(5):
        out_dir = tmp_path / f"run{i}"
        out_dir.mkdir()
        outputs.append(_run_pipeline(ReplayClient(recorded_replies), out_dir))
    assert all(o == reference for o in outputs)


def test_bppa_oracle_checks():
    """predicted==oracle gives exactly 1.0; a 4-step fixture with 50/64
    matches gives exactly 0.78125; the by-part breakdown matches an
    independent brute-force counter on 100 randomized fixtures."""
    taxonomy = load_taxonomy()
    parts = list(BodyPart)

    identity_plan = AnimationPlan(
        high_plan(1, [1.0, 1.0]), [assignment(1), assignment(2)], "hierarchical")
    identity_oracle = OracleAnnotation(
        1, [dict(f.positions) for f in identity_plan.frames])
    assert bppa(identity_plan, identity_oracle).overall == 1.0

    plan4 = AnimationPlan(
        high_plan(5, [1.0] * 4), [assignment(i) for i in range(1, 5)], "hierarchical")
    oracle4 = OracleAnnotation(5, [dict(f.positions) for f in plan4.frames])
    flipped = 0
    for step in range(4):
        for part in parts:
            if flipped == 14:
                break
            oracle4.frames[step][part] = [
                s.id for s in taxonomy.positions_for(part) if s.id != NEUTRAL][0]
            flipped += 1
    report = bppa(plan4, oracle4)
    assert report.matched == 50 and report.total == 64
    assert report.overall == 0.78125

    for trial in range(100):
        rng = np.random.default_rng(2000 + trial)
        n_steps = int(rng.integers(1, 6))

        def token(part, rng=rng):
            specs = taxonomy.positions_for(part)
            return specs[rng.integers(len(specs))].id

        frames = [assignment(i + 1, {p: token(p) for p in parts})
                  for i in range(n_steps)]
        oracle_frames = [{p: token(p) for p in parts} for _ in range(n_steps)]
        plan = AnimationPlan(high_plan(1, [1.0] * n_steps), frames, "hierarchical")
        oracle = OracleAnnotation(1, oracle_frames)
        report = bppa(plan, oracle)
        for kind, fraction in report.by_part.items():
            kind_parts = [p for p in parts if p.kind == kind]
            hits = sum(1 for f, t in zip(frames, oracle_frames)
                       for p in kind_parts if f.positions[p] == t[p])
            assert fraction == hits / (len(kind_parts) * n_steps)
        brute = sum(1 for f, t in zip(frames, oracle_frames)
                    for p in parts if f.positions[p] == t[p])
        assert report.overall == brute / (16 * n_steps)


def test_metric_formulas():
    """Complexity matches hand evaluation exactly; reflection stats match a
    brute-force recount; kappa is reflexive and symmetric and matches
    independent evaluation on 50 random pairs within 1e-9; agreement bands
    map 0.74 to substantial and 0.531 to moderate."""
    # complexity: hand-evaluated sum of |moved|/|unmoved|
    s1 = assignment(1, {BodyPart.Head: "tilted_down_slightly",
                        BodyPart.LeftElbow: "bent_in_90_degrees",
                        BodyPart.RightElbow: "bent_in_90_degrees"})
    s2 = assignment(2, {BodyPart.Head: "tilted_down_slightly"})
    plan = AnimationPlan(high_plan(1, [1.0, 1.0]), [s1, s2], "hierarchical")
    assert motion_complexity(plan) == 3 / 13 + 2 / 14

    neutral2 = AnimationPlan(
        high_plan(1, [1.0, 1.0]), [assignment(1), assignment(2)], "hierarchical")
    assert motion_complexity(neutral2) == 0.0

    # reflection stats: brute-force recount on a synthetic log
    from motionlab.lowlevel import ReflectionEvent

    oracle = OracleAnnotation(1, [dict(assignment(1).positions),
                                  dict(assignment(2).positions)])
    oracle.frames[0][BodyPart.Head] = "tilted_up_fully"
    events = [
        ReflectionEvent(1, BodyPart.Head, NEUTRAL, "tilted_up_fully", "a", "j", True),
        ReflectionEvent(2, BodyPart.Torso, NEUTRAL, "bent_backward", "a", "j", True),
    ]
    stats = reflection_stats(events, oracle)
    assert stats.correction_percentage == 2 / 32
    assert stats.success_rate == 1 / 2
    assert stats.perfect_reflection_rate == 1 / 2

    # weighted kappa: reflexivity, symmetry, independent formula agreement
    rng = np.random.default_rng(77)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        a = list(rng.integers(1, 6, size=n))
        b = list(rng.integers(1, 6, size=n))
        if len(set(a)) > 1:
            assert weighted_kappa(a, a) == 1.0
        assert abs(weighted_kappa(a, b) - weighted_kappa(b, a)) <= 1e-12

        k = 5
        w = np.abs(np.subtract.outer(np.arange(1, 6), np.arange(1, 6))) / (k - 1)
        observed = np.zeros((k, k))
        for x, y in zip(a, b):
            observed[x - 1, y - 1] += 1 / n
        pa = np.bincount(np.array(a) - 1, minlength=k) / n
        pb = np.bincount(np.array(b) - 1, minlength=k) / n
        reference = 1 - (w * observed).sum() / (w * np.outer(pa, pb)).sum()
        assert abs(weighted_kappa(a, b) - reference) <= 1e-9

    assert classify_agreement(0.74) == "substantial"
    assert classify_agreement(0.531) == "moderate"


def test_statistics_consistency():
    """Every reported cell satisfies var == sd**2 and two-point fixtures
    reproduce mean/sd exactly."""
    cell = stat_cell([0.75, 0.8125])
    assert cell.mean == 0.78125
    assert cell.sd == 0.03125
    assert cell.var == cell.sd ** 2

    rng = np.random.default_rng(55)
    for _ in range(200):
        values = list(rng.uniform(0, 1, size=int(rng.integers(1, 9))))
        c = stat_cell(values)
        assert c.var == c.sd * c.sd
    single = stat_cell([0.5])
    assert single.sd == 0.0 and single.var == 0.0 and single.flags == ["single run"]


def test_prompt_fidelity():
    """Every rendered prompt template equals the reference text byte-for-byte
    after placeholder substitution."""
    library = PromptLibrary.bundled()
    taxonomy = load_taxonomy()

    def golden(name):
        text = (GOLDEN / f"{name}.txt").read_text()
        return text[:-1]

    watch = "Look down to check the time of the watch on the left wrist."
    golf = "Swing the golf club from right to left."
    rendered = {
        "system_prompt": library.system_prompt,
        "high_setup": library.high_setup(watch),
        "high_movement": library.high_question("movement", 1),
        "high_initial_state": library.high_question("initial_state", 1),
        "high_final_state": library.high_question("final_state", 1),
        "high_timing": library.high_question("timing", 1),
        "high_is_end": library.high_question("is_end", 1),
        "high_in_one_go": library.high_in_one_go(golf, format_note=False),
        "low_step_setup": library.step_setup(
            golf, 2, "arms raised", "arms crossed to the left",
            "swing the arms down and across"),
        "low_language_description": library.language_description(
            taxonomy, BodyPart.LeftElbow, "neutral", 1),
        "low_choice_one_by_one": library.choice_one_by_one(
            taxonomy, BodyPart.LeftElbow, "neutral", "slightly_bent_in"),
        "low_choice_all": library.choice_all(taxonomy, BodyPart.LeftElbow, "neutral"),
        "low_reflection_analysis": library.reflection_analysis(),
        "low_reflection_judgement": library.reflection_judgement(),
        "low_correction": library.correction(
            taxonomy, BodyPart.LeftElbow, "slightly_bent_in",
            "The elbow must bend further to reach the final state", 2),
    }
    for name, text in rendered.items():
        assert text == golden(name), f"prompt {name} deviates from the reference"


def test_totality_under_hostile_replies(tmp_path, caplog):
    """With a replay client returning garbage for every query the pipeline
    still yields a total plan and a compilable clip, with warnings logged."""
    taxonomy = load_taxonomy()
    skeleton = load_skeleton()
    rules = load_rules()
    library = PromptLibrary.bundled()
    config = LlmConfig()
    instruction = MotionInstruction(1, "Slide the window open from the center to the sides with both hands.")

    garbage_pool = ["@#$%^ blorp zzz", "", "!!!", "lorem ipsum dolor",
                    "%%%%%%", "no comprende 0"]
    for low_strategy in ("hierarchical", "one_by_one", "all"):
        # enough cycling garbage for every query the pipeline can make
        client = ReplayClient([garbage_pool[i % len(garbage_pool)]
                               for i in range(20000)])
        with caplog.at_level("WARNING"):
            high = plan_piece_by_piece(
                instruction, client.session(config, library.system_prompt), library)
            assert validate_plan(high) == []
            assert len(high.steps) == 10  # step cap reached, truncated
            plan = build_animation_plan(
                high, low_strategy,
                lambda: client.session(config, library.system_prompt),
                taxonomy, library)
        assert len(plan.frames) == len(high.steps)
        for frame in plan.frames:
            assert set(frame.positions) == set(BodyPart)
            for part, token in frame.positions.items():
                assert taxonomy.is_valid_position(part, token)
        assert plan.warnings, "hostile replies must be surfaced as warnings"
        assert any("defaulted" in w or "no candidate" in w for w in plan.warnings)
        clip = compile_plan(plan, rules, skeleton)
        assert len(clip.keyframes) == 11
        path = export_clip_json(clip, tmp_path / f"hostile_{low_strategy}.json")
        assert path.stat().st_size > 0
