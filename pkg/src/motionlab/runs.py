"""Run directory layout and manifests.

Every run is self-describing: the manifest records the LLM config, strategy
pair, instruction ids, and data-file versions, so artifacts can be
re-evaluated without re-querying any model.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, asdict
from importlib.metadata import version as pkg_version
from pathlib import Path

SUBDIRS = ("transcripts", "plans", "plans_low", "clips", "eval", "ratings")


@dataclass
class RunManifest:
    run_id: str
    created_at: str = ""
    llm: dict = field(default_factory=dict)
    strategies: dict = field(default_factory=dict)  # {"high": ..., "low": ...}
    instruction_ids: list[int] = field(default_factory=list)
    versions: dict = field(default_factory=dict)
    seed: int = 0
    notes: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


class RunDirectory:
    def __init__(self, path):
        self.path = Path(path)

    @classmethod
    def create(cls, path, manifest: RunManifest) -> "RunDirectory":
        run = cls(path)
        run.path.mkdir(parents=True, exist_ok=True)
        for sub in SUBDIRS:
            (run.path / sub).mkdir(exist_ok=True)
        if not manifest.created_at:
            manifest.created_at = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()) + "Z"
        (run.path / "manifest.json").write_text(
            json.dumps(manifest.to_dict(), indent=2) + "\n")
        return run

    @property
    def manifest(self) -> RunManifest:
        doc = json.loads((self.path / "manifest.json").read_text())
        return RunManifest(**doc)

    def subdir(self, name: str) -> Path:
        return self.path / name

    def plan_path(self, motion_id: int) -> Path:
        return self.path / "plans" / f"motion_{motion_id:02d}.json"

    def animation_plan_path(self, motion_id: int) -> Path:
        return self.path / "plans_low" / f"motion_{motion_id:02d}.json"

    def clip_path(self, motion_id: int) -> Path:
        return self.path / "clips" / f"motion_{motion_id:02d}.clip.json"

    def bvh_path(self, motion_id: int) -> Path:
        return self.path / "clips" / f"motion_{motion_id:02d}.bvh"

    def ratings_path(self) -> Path:
        return self.path / "ratings" / "ratings.jsonl"


def data_versions() -> dict:
    """Version tags of the bundled data files plus the package itself."""
    from .skeleton import load_rules, load_skeleton
    from .taxonomy import load_taxonomy

    try:
        package = pkg_version("motionlab")
    except Exception:
        package = "unknown"
    return {
        "taxonomy": load_taxonomy().version,
        "rules": load_rules().version,
        "skeleton": load_skeleton().version,
        "package": package,
    }
