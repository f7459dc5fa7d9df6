"""Prompt template loading and placeholder substitution.

Templates ship verbatim in data/prompt_templates.json; rendering is plain
string substitution so the sent text stays byte-identical to the stored
template.  The only machine-format addition is JSON_FORMAT_NOTE, appended to
the one-shot decomposition prompt so replies carry a parseable block.
"""

from __future__ import annotations

import json
from importlib import resources

from .taxonomy import BodyPart, PoseTaxonomy

JSON_FORMAT_NOTE = (
    "\n\nReply with a fenced ```json code block containing a list of step "
    'objects, each with the keys "step_number", "time_range" ([start, end] '
    'in seconds), "movement", "initial_state" and "final_state".'
)


class PromptLibrary:
    def __init__(self, doc: dict):
        self._doc = doc

    @classmethod
    def bundled(cls) -> "PromptLibrary":
        raw = resources.files("motionlab.data").joinpath("prompt_templates.json").read_text()
        return cls(json.loads(raw))

    @property
    def system_prompt(self) -> str:
        return self._doc["system_prompt"]

    @staticmethod
    def _fill(template: str, values: dict[str, str]) -> str:
        out = template
        for key, val in values.items():
            out = out.replace("{" + key + "}", str(val))
        return out

    # --- high level ---------------------------------------------------------

    def high_setup(self, instruction: str) -> str:
        return self._fill(self._doc["high_level"]["piece_by_piece"]["setup"],
                          {"motion instruction": instruction})

    def high_question(self, name: str, step_number: int) -> str:
        return self._fill(self._doc["high_level"]["piece_by_piece"][name],
                          {"step number": step_number})

    def high_in_one_go(self, instruction: str, format_note: bool = True) -> str:
        text = self._fill(self._doc["high_level"]["in_one_go"],
                          {"motion instruction": instruction})
        return text + JSON_FORMAT_NOTE if format_note else text

    # --- low level ----------------------------------------------------------

    def step_setup(self, instruction: str, step_number: int, initial_states: str,
                   final_states: str, movements: str) -> str:
        return self._fill(self._doc["low_level"]["step_setup"], {
            "motion instruction": instruction,
            "step number": step_number,
            "initial states": initial_states,
            "final states": final_states,
            "movements": movements,
        })

    def language_description(self, taxonomy: PoseTaxonomy, part: BodyPart,
                             last_position: str, step_number: int) -> str:
        return self._fill(self._doc["low_level"]["language_description"], {
            "body part": taxonomy.phrase(part),
            "position": last_position,
            "description": taxonomy.description(part, last_position),
            "step number": step_number,
        })

    def choice_one_by_one(self, taxonomy: PoseTaxonomy, part: BodyPart,
                          last_position: str, candidate: str) -> str:
        return self._fill(self._doc["low_level"]["position_choice_one_by_one"], {
            "body part": taxonomy.phrase(part),
            "position": last_position,
            "description": taxonomy.description(part, last_position),
            "next position": candidate,
            "next description": taxonomy.description(part, candidate),
        })

    def choice_all(self, taxonomy: PoseTaxonomy, part: BodyPart, last_position: str) -> str:
        listing = "\n".join(
            f"- **{spec.id}** ({spec.description})"
            for spec in taxonomy.positions_for(part)
        )
        return self._fill(self._doc["low_level"]["position_choice_all"], {
            "body part": taxonomy.phrase(part),
            "positions with descriptions": listing,
            "position": last_position,
        })

    def reflection_analysis(self) -> str:
        return self._doc["low_level"]["reflection_analysis"]

    def reflection_judgement(self) -> str:
        return self._doc["low_level"]["reflection_judgement"]

    def correction(self, taxonomy: PoseTaxonomy, part: BodyPart, position: str,
                   reflection: str, step_number: int) -> str:
        return self._fill(self._doc["low_level"]["correction"], {
            "reflection": reflection,
            "body part": taxonomy.phrase(part),
            "position": position,
            "step number": step_number,
        })
