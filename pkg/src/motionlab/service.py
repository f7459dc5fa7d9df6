"""Annotation service: serves clips/plans and collects human ratings.

Raters see blinded payloads: task lists, clips, and plans never carry the
system tag (which LLM and strategy produced them); the tag is re-attached
server-side when a rating is submitted.  Ratings persist as append-only
JSONL, so a restart loses nothing.
"""

from __future__ import annotations

import json
import random
import threading
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .metrics import RatingRecord
from .runs import RunDirectory


@dataclass
class AnnotationTask:
    task_id: str
    target_kind: str  # "animation" | "high_level_plan"
    motion_id: int
    instruction_text: str
    system_tag: str  # server-side only, never serialized for raters
    artifact_path: Path

    def public_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "target_kind": self.target_kind,
            "motion_id": self.motion_id,
            "instruction_text": self.instruction_text,
            "artifact_url": (
                f"/clip/{self.task_id}" if self.target_kind == "animation"
                else f"/plan/{self.task_id}"
            ),
            "rubric_url": f"/rubric/{self.target_kind}",
        }


class RatingSubmission(BaseModel):
    task_id: str
    rater_id: str
    score: int
    bpq: dict[str, str] | None = None
    comment: str = ""


def _system_tag(manifest) -> str:
    if manifest.notes.strip().lower() == "oracle":
        return "oracle"
    model = manifest.llm.get("model_name", "unknown")
    high = manifest.strategies.get("high", "?")
    low = manifest.strategies.get("low", "?")
    return f"{model}+{high}/{low}"


def discover_tasks(root: Path) -> list[AnnotationTask]:
    """Build the task pool from a run directory or a batch of run
    directories: one animation task per clip, one plan task per high-level
    plan file."""
    root = Path(root)
    if (root / "manifest.json").exists():
        run_dirs = [root]
    else:
        run_dirs = sorted(p for p in root.iterdir()
                          if p.is_dir() and (p / "manifest.json").exists())
    tasks: list[AnnotationTask] = []
    for run_path in run_dirs:
        run = RunDirectory(run_path)
        manifest = run.manifest
        tag = _system_tag(manifest)
        for clip_path in sorted((run_path / "clips").glob("motion_*.clip.json")):
            doc = json.loads(clip_path.read_text())
            motion_id = doc.get("metadata", {}).get("motion_id", 0)
            instruction = _instruction_for(run_path, motion_id)
            tasks.append(AnnotationTask(
                task_id=f"{run_path.name}-anim-{motion_id:02d}",
                target_kind="animation",
                motion_id=motion_id,
                instruction_text=instruction,
                system_tag=tag,
                artifact_path=clip_path,
            ))
        for plan_path in sorted((run_path / "plans").glob("motion_*.json")):
            doc = json.loads(plan_path.read_text())
            motion_id = doc["instruction"]["id"]
            tasks.append(AnnotationTask(
                task_id=f"{run_path.name}-plan-{motion_id:02d}",
                target_kind="high_level_plan",
                motion_id=motion_id,
                instruction_text=doc["instruction"]["text"],
                system_tag=tag,
                artifact_path=plan_path,
            ))
    return tasks


def _manifest_seed(root: Path) -> int:
    """Task-balancing seed recorded at planning time, if any."""
    candidates = [root / "manifest.json"] + sorted(root.glob("*/manifest.json"))
    for path in candidates:
        if path.exists():
            return json.loads(path.read_text()).get("seed", 0)
    return 0


def _instruction_for(run_path: Path, motion_id: int) -> str:
    plan_path = run_path / "plans" / f"motion_{motion_id:02d}.json"
    if plan_path.exists():
        return json.loads(plan_path.read_text())["instruction"]["text"]
    low_path = run_path / "plans_low" / f"motion_{motion_id:02d}.json"
    if low_path.exists():
        return json.loads(low_path.read_text())["high_level"]["instruction"]["text"]
    return ""


def balanced_order(tasks: list[AnnotationTask], rater_id: str, seed: int) -> list[AnnotationTask]:
    """Round-robin over system tags with a per-rater deterministic shuffle,
    so each rater sees an interleaved mix of systems."""
    rng = random.Random(f"{seed}:{rater_id}")
    by_tag: dict[str, list[AnnotationTask]] = {}
    for task in tasks:
        by_tag.setdefault(task.system_tag, []).append(task)
    queues = []
    for tag in sorted(by_tag):
        group = list(by_tag[tag])
        rng.shuffle(group)
        queues.append(group)
    rng.shuffle(queues)
    out: list[AnnotationTask] = []
    cursor = 0
    while any(queues):
        queue = queues[cursor % len(queues)]
        if queue:
            out.append(queue.pop(0))
        cursor += 1
        queues = [q for q in queues if q] or []
        if not queues:
            break
    return out


class RatingsStore:
    """Append-only JSONL store with serialized writes."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, record: RatingRecord) -> None:
        with self._lock:
            with open(self.path, "a") as fh:
                fh.write(json.dumps(record.to_dict()) + "\n")

    def all(self) -> list[RatingRecord]:
        if not self.path.exists():
            return []
        out = []
        for line in self.path.read_text().splitlines():
            if line.strip():
                out.append(RatingRecord.from_dict(json.loads(line)))
        return out

    def completed(self, rater_id: str) -> set[str]:
        return {r.task_id for r in self.all() if r.rater_id == rater_id}


def _blinded_clip(doc: dict) -> dict:
    # drop metadata (motion source, generator hints); keep geometry + tracks
    return {k: v for k, v in doc.items() if k != "metadata"}


def _blinded_plan(doc: dict) -> dict:
    return {
        "instruction": doc["instruction"],
        "steps": doc["steps"],
    }


def create_app(root, ratings_path=None, seed: int | None = None,
               frontend_dir=None) -> FastAPI:
    root = Path(root)
    if seed is None:
        seed = _manifest_seed(root)
    tasks = discover_tasks(root)
    by_id = {t.task_id: t for t in tasks}
    store = RatingsStore(Path(ratings_path) if ratings_path
                         else root / "ratings" / "ratings.jsonl")
    rubrics = json.loads(
        resources.files("motionlab.data").joinpath("rubrics.json").read_text())

    app = FastAPI(title="motionlab annotation service")
    app.state.tasks = tasks
    app.state.store = store

    @app.get("/tasks")
    def list_tasks(rater: str = Query(...)):
        done = store.completed(rater)
        ordered = balanced_order(tasks, rater, seed)
        return {
            "rater_id": rater,
            "tasks": [
                {**t.public_dict(), "completed": t.task_id in done}
                for t in ordered
            ],
        }

    @app.get("/clip/{task_id}")
    def get_clip(task_id: str):
        task = by_id.get(task_id)
        if task is None or task.target_kind != "animation":
            raise HTTPException(status_code=404, detail="unknown clip task")
        return JSONResponse(_blinded_clip(json.loads(task.artifact_path.read_text())))

    @app.get("/plan/{task_id}")
    def get_plan(task_id: str):
        task = by_id.get(task_id)
        if task is None or task.target_kind != "high_level_plan":
            raise HTTPException(status_code=404, detail="unknown plan task")
        return JSONResponse(_blinded_plan(json.loads(task.artifact_path.read_text())))

    @app.get("/rubric/{kind}")
    def get_rubric(kind: str):
        if kind not in rubrics or kind == "version":
            raise HTTPException(status_code=404, detail="unknown rubric kind")
        return JSONResponse(rubrics[kind])

    @app.post("/ratings")
    def post_rating(submission: RatingSubmission):
        task = by_id.get(submission.task_id)
        if task is None:
            raise HTTPException(status_code=404, detail="unknown task")
        record = RatingRecord(
            rater_id=submission.rater_id,
            target_kind=task.target_kind,
            motion_id=task.motion_id,
            system_tag=task.system_tag,
            score=submission.score,
            bpq=submission.bpq,
            comment=submission.comment,
            task_id=task.task_id,
        )
        problems = record.validate()
        if problems:
            raise HTTPException(status_code=422, detail=problems)
        store.append(record)
        return {"status": "ok", "task_id": task.task_id}

    @app.get("/export/ratings")
    def export_ratings():
        return {"ratings": [r.to_dict() for r in store.all()]}

    if frontend_dir and Path(frontend_dir).exists():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app
