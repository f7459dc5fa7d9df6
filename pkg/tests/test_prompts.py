"""Golden-file checks: every rendered template must be byte-identical to the
reference text after placeholder substitution.  The one-shot decomposition
prompt additionally carries the documented JSON format note as a suffix.
"""

from pathlib import Path

from motionlab.prompts import JSON_FORMAT_NOTE, PromptLibrary
from motionlab.taxonomy import BodyPart

GOLDEN = Path(__file__).parent / "golden"

WATCH = "Look down to check the time of the watch on the left wrist."
GOLF = "Swing the golf club from right to left."


def golden(name: str) -> str:
    text = (GOLDEN / f"{name}.txt").read_text()
    assert text.endswith("\n")
    return text[:-1]


def test_system_prompt(library):
    assert library.system_prompt == golden("system_prompt")


def test_high_setup(library):
    assert library.high_setup(WATCH) == golden("high_setup")


def test_high_step_questions(library):
    assert library.high_question("movement", 1) == golden("high_movement")
    assert library.high_question("initial_state", 1) == golden("high_initial_state")
    assert library.high_question("final_state", 1) == golden("high_final_state")
    assert library.high_question("timing", 1) == golden("high_timing")
    assert library.high_question("is_end", 1) == golden("high_is_end")


def test_high_in_one_go(library):
    assert library.high_in_one_go(GOLF, format_note=False) == golden("high_in_one_go")
    assert library.high_in_one_go(GOLF) == golden("high_in_one_go") + JSON_FORMAT_NOTE


def test_low_step_setup(library):
    rendered = library.step_setup(
        GOLF, 2,
        "arms raised",
        "arms crossed to the left",
        "swing the arms down and across",
    )
    assert rendered == golden("low_step_setup")


def test_low_language_description(library, taxonomy):
    rendered = library.language_description(taxonomy, BodyPart.LeftElbow, "neutral", 1)
    assert rendered == golden("low_language_description")


def test_low_choice_one_by_one(library, taxonomy):
    rendered = library.choice_one_by_one(
        taxonomy, BodyPart.LeftElbow, "neutral", "slightly_bent_in")
    assert rendered == golden("low_choice_one_by_one")


def test_low_choice_all(library, taxonomy):
    rendered = library.choice_all(taxonomy, BodyPart.LeftElbow, "neutral")
    assert rendered == golden("low_choice_all")


def test_low_choice_all_lists_exactly_four_elbow_options(library, taxonomy):
    rendered = library.choice_all(taxonomy, BodyPart.LeftElbow, "neutral")
    assert rendered.count("\n- **") + rendered.startswith("- **") == 4


def test_reflection_prompts(library):
    assert library.reflection_analysis() == golden("low_reflection_analysis")
    assert library.reflection_judgement() == golden("low_reflection_judgement")


def test_correction(library, taxonomy):
    rendered = library.correction(
        taxonomy, BodyPart.LeftElbow, "slightly_bent_in",
        "The elbow must bend further to reach the final state", 2)
    assert rendered == golden("low_correction")


def test_tree_question_rendering(taxonomy):
    root = taxonomy.decision_tree(BodyPart.LeftElbow)
    assert root.render() == (
        "At the end of this step, is the left elbow stright or bent? "
        "Choose one from **straight**, **bent**."
    )
