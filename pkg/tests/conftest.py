import pytest

from motionlab.gateway import LlmConfig, ReplayClient

ACCEPTANCE_CRITERIA = {
    "test_taxonomy_integrity": "taxonomy integrity (cardinalities, leaf sets, <1s)",
    "test_mapping_fixed_point": "mapping fixed point: left elbow 90deg -> (0, 90, 0)",
    "test_interpolation_suite": "interpolation exact/linear/1000-probe agreement @1e-9",
    "test_replay_determinism": "replay determinism: bit-identical plan+clip x5",
    "test_bppa_oracle_checks": "BPPA oracle checks (1.0, 0.78125, 100 randomized fixtures)",
    "test_metric_formulas": "metric formulas (complexity, reflection, kappa, bands)",
    "test_statistics_consistency": "statistics consistency (var == sd^2, two-point exact)",
    "test_prompt_fidelity": "prompt fidelity (byte-exact golden templates)",
    "test_totality_under_hostile_replies": "totality under hostile replies",
}


def pytest_terminal_summary(terminalreporter):
    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            if "test_acceptance.py" not in report.nodeid:
                continue
            name = report.nodeid.split("::")[-1]
            label = ACCEPTANCE_CRITERIA.get(name, name)
            verdict = "PASS" if status == "passed" else "FAIL"
            lines.append(f"ACCEPTANCE {verdict}: {label}")
    if lines:
        terminalreporter.write_line("")
        for line in sorted(lines, key=lambda s: s.split(": ", 1)[1]):
            terminalreporter.write_line(line)
from motionlab.highlevel import HighLevelPlan, HighLevelStep, MotionInstruction
from motionlab.lowlevel import StepPoseAssignment
from motionlab.prompts import PromptLibrary
from motionlab.skeleton import load_rules, load_skeleton
from motionlab.taxonomy import NEUTRAL, BodyPart, load_taxonomy


@pytest.fixture(scope="session")
def taxonomy():
    return load_taxonomy()


@pytest.fixture(scope="session")
def skeleton():
    return load_skeleton()


@pytest.fixture(scope="session")
def rules():
    return load_rules()


@pytest.fixture(scope="session")
def library():
    return PromptLibrary.bundled()


@pytest.fixture()
def config():
    return LlmConfig()


def make_session(script, config=None, strict=False, **tags):
    config = config or LlmConfig()
    client = ReplayClient(script, strict=strict)
    return client.session(config, PromptLibrary.bundled().system_prompt, **tags)


def high_plan(motion_id: int, durations: list[float],
              strategy: str = "piece_by_piece", text: str = "test motion") -> HighLevelPlan:
    steps = []
    cursor = 0.0
    for i, duration in enumerate(durations, start=1):
        steps.append(HighLevelStep(
            step_number=i,
            time_range=(cursor, cursor + duration),
            movement=f"movement {i}",
            initial_state=f"initial {i}",
            final_state=f"final {i}",
        ))
        cursor += duration
    return HighLevelPlan(MotionInstruction(motion_id, text), steps, strategy)


def assignment(step_number: int, overrides: dict | None = None) -> StepPoseAssignment:
    positions = {part: NEUTRAL for part in BodyPart}
    if overrides:
        positions.update(overrides)
    return StepPoseAssignment(step_number=step_number, positions=positions)


def high_script(step_specs: list[tuple[str, str, str, str]]) -> list[str]:
    """Replay script for plan_piece_by_piece: setup ack, then per step the
    movement / initial / final / timing replies and a completion answer that
    is negative until the last step."""
    replies = ["Understood."]
    for i, (movement, initial, final, timing) in enumerate(step_specs):
        last = i == len(step_specs) - 1
        replies.extend([movement, initial, final, timing,
                        "Yes, it is the end of this motion." if last else "No, it continues."])
    return replies


def low_script_hierarchical(step_paths: list[dict[BodyPart, list[str]]],
                            judgement: str = "No need to replan.",
                            reflect: bool = True) -> list[str]:
    """Replay script for hierarchical assignment: step_setup ack, then per
    part a language description, the tree answers, and one reflection round."""
    replies = []
    for paths in step_paths:
        replies.append("Understood.")
        for part in BodyPart:
            replies.append(f"The {part.value} holds its position.")
            replies.extend(paths.get(part, ["neutral"]))
            if reflect:
                replies.append("The planned position is appropriate.")
                replies.append(judgement)
    return replies


def neutral_paths() -> dict[BodyPart, list[str]]:
    """Tree answers that pick the root 'neutral'/'straight' option everywhere."""
    paths = {part: ["neutral"] for part in BodyPart}
    for part in (BodyPart.LeftElbow, BodyPart.RightElbow,
                 BodyPart.LeftKnee, BodyPart.RightKnee):
        paths[part] = ["straight"]
    return paths
