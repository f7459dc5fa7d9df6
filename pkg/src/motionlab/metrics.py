"""Automatic evaluation: position accuracy against oracle annotations,
motion complexity, self-reflection statistics, and annotator agreement.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from .errors import ShapeMismatch
from .lowlevel import AnimationPlan, ReflectionEvent
from .taxonomy import NEUTRAL, BodyPart

log = logging.getLogger(__name__)

N_PARTS = 16
LIKERT_MIN, LIKERT_MAX = 1, 5
BPQ_GROUPS = ("Head", "Torso", "Left Arm", "Right Arm", "Left Leg", "Right Leg")
BPQ_LABELS = ("Good", "PartiallyGood", "Bad", "NotRelevant")

AGREEMENT_BANDS = [
    (0.80, "almost perfect"),
    (0.60, "substantial"),
    (0.40, "moderate"),
    (0.20, "fair"),
]


@dataclass
class OracleAnnotation:
    """Ground-truth position per (step, part) for one motion's fixed plan."""

    motion_id: int
    frames: list[dict[BodyPart, str]]

    def __post_init__(self):
        for i, frame in enumerate(self.frames, start=1):
            missing = set(BodyPart) - set(frame)
            if missing:
                raise ValueError(
                    f"oracle step {i} missing parts: {sorted(p.value for p in missing)}")

    def to_dict(self) -> dict:
        return {
            "motion_id": self.motion_id,
            "frames": [{p.value: t for p, t in f.items()} for f in self.frames],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "OracleAnnotation":
        return cls(
            motion_id=doc["motion_id"],
            frames=[{BodyPart(p): t for p, t in f.items()} for f in doc["frames"]],
        )


def load_oracle(path) -> OracleAnnotation:
    return OracleAnnotation.from_dict(json.loads(Path(path).read_text()))


def save_oracle(oracle: OracleAnnotation, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(oracle.to_dict(), indent=2) + "\n")
    return path


@dataclass
class BppaReport:
    motion_id: int
    overall: float
    by_part: dict[str, float]  # part kind, left/right pooled
    by_step: list[float]
    matched: int
    total: int
    by_part_counts: dict[str, tuple[int, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "motion_id": self.motion_id,
            "overall": self.overall,
            "by_part": dict(self.by_part),
            "by_step": list(self.by_step),
            "matched": self.matched,
            "total": self.total,
            "by_part_counts": {k: list(v) for k, v in self.by_part_counts.items()},
        }


def bppa(predicted: AnimationPlan, oracle: OracleAnnotation) -> BppaReport:
    """Body Part Position Accuracy: exact-token matches over 16 * N_steps
    cells, with per-step and per-part-kind (paired parts averaged) breakdowns."""
    if predicted.high_level.instruction.id != oracle.motion_id:
        raise ShapeMismatch(
            f"motion id mismatch: plan {predicted.high_level.instruction.id} "
            f"vs oracle {oracle.motion_id}")
    if len(predicted.frames) != len(oracle.frames):
        raise ShapeMismatch(
            f"step count mismatch: plan {len(predicted.frames)} "
            f"vs oracle {len(oracle.frames)}")

    matched = 0
    by_step: list[float] = []
    kind_counts: dict[str, list[int]] = {}
    for frame, truth in zip(predicted.frames, oracle.frames):
        step_matched = 0
        for part in BodyPart:
            hit = frame.positions[part] == truth[part]
            counts = kind_counts.setdefault(part.kind, [0, 0])
            counts[0] += int(hit)
            counts[1] += 1
            step_matched += int(hit)
        matched += step_matched
        by_step.append(step_matched / N_PARTS)
    total = N_PARTS * len(oracle.frames)
    return BppaReport(
        motion_id=oracle.motion_id,
        overall=matched / total,
        by_part={kind: hits / n for kind, (hits, n) in kind_counts.items()},
        by_step=by_step,
        matched=matched,
        total=total,
        by_part_counts={kind: (hits, n) for kind, (hits, n) in kind_counts.items()},
    )


def motion_complexity(plan: AnimationPlan) -> float:
    """Sum over steps of |moved| / |unmoved|, where a part "moved" in a step
    when its token differs from the previous step (step 1 compares against
    the all-neutral stance).  A fully-moved step has an undefined denominator;
    it is treated as 1 and flagged in the log."""
    total = 0.0
    prev = {part: NEUTRAL for part in BodyPart}
    for frame in plan.frames:
        moved = sum(1 for part in BodyPart if frame.positions[part] != prev[part])
        unmoved = N_PARTS - moved
        if unmoved == 0:
            log.warning(
                "motion %s step %s: every part moved; complexity denominator "
                "clamped to 1", plan.high_level.instruction.id, frame.step_number)
            unmoved = 1
        total += moved / unmoved
        prev = frame.positions
    return total


@dataclass
class ReflectionStats:
    correction_percentage: float
    success_rate: float
    perfect_reflection_rate: float
    corrected_cells: int
    total_cells: int
    undefined: bool = False  # no corrections happened; rates reported as 0

    def to_dict(self) -> dict:
        return {
            "correction_percentage": self.correction_percentage,
            "success_rate": self.success_rate,
            "perfect_reflection_rate": self.perfect_reflection_rate,
            "corrected_cells": self.corrected_cells,
            "total_cells": self.total_cells,
            "undefined": self.undefined,
        }


def reflection_stats(events: list[ReflectionEvent], oracle: OracleAnnotation,
                     predicted_history: dict[tuple[int, BodyPart], list[str]] | None = None,
                     ) -> ReflectionStats:
    """Correction Percentage (corrected cells over all 16 * N cells), Success
    Rate (corrected cells ending on the oracle token), and Perfect Reflection
    Rate (successful and every previously selected position was wrong).

    predicted_history may supply the full candidate list per cell; otherwise
    the event's position_before is the single prior candidate.
    """
    total_cells = N_PARTS * len(oracle.frames)
    corrected = [e for e in events if e.corrected]
    for e in events:
        if not (1 <= e.step_number <= len(oracle.frames)):
            raise ValueError(f"reflection event references unknown step {e.step_number}")
    if not corrected:
        return ReflectionStats(0.0, 0.0, 0.0, 0, total_cells, undefined=True)

    successes = 0
    perfect = 0
    for e in corrected:
        truth = oracle.frames[e.step_number - 1][e.part]
        if e.position_after != truth:
            continue
        successes += 1
        history = None
        if predicted_history is not None:
            history = predicted_history.get((e.step_number, e.part))
        if history is None:
            history = [e.position_before]
        if all(prior != truth for prior in history):
            perfect += 1
    n = len(corrected)
    return ReflectionStats(
        correction_percentage=n / total_cells,
        success_rate=successes / n,
        perfect_reflection_rate=perfect / n,
        corrected_cells=n,
        total_cells=total_cells,
    )


def reflection_stats_pooled(
    pairs: list[tuple[list[ReflectionEvent], OracleAnnotation]],
    predicted_history: dict[tuple[int, int, BodyPart], list[str]] | None = None,
) -> ReflectionStats:
    """Reflection statistics pooled across motions; history keys carry the
    motion id as their first element."""
    total_cells = sum(N_PARTS * len(oracle.frames) for _, oracle in pairs)
    corrected = 0
    successes = 0
    perfect = 0
    for events, oracle in pairs:
        for e in events:
            if not e.corrected:
                continue
            corrected += 1
            truth = oracle.frames[e.step_number - 1][e.part]
            if e.position_after != truth:
                continue
            successes += 1
            history = None
            if predicted_history is not None:
                history = predicted_history.get((oracle.motion_id, e.step_number, e.part))
            if history is None:
                history = [e.position_before]
            if all(prior != truth for prior in history):
                perfect += 1
    if corrected == 0:
        return ReflectionStats(0.0, 0.0, 0.0, 0, total_cells, undefined=True)
    return ReflectionStats(
        correction_percentage=corrected / total_cells,
        success_rate=successes / corrected,
        perfect_reflection_rate=perfect / corrected,
        corrected_cells=corrected,
        total_cells=total_cells,
    )


def weighted_kappa(a, b, scale: int = LIKERT_MAX, weighting: str = "linear") -> float:
    """Weighted Cohen's kappa for paired ordinal ratings on 1..scale.

    kappa = 1 - sum(w * O) / sum(w * E) with disagreement weights
    w_ij = |i-j|/(k-1) (linear) or ((i-j)/(k-1))^2 (quadratic); O holds
    observed pair proportions and E the chance-expected ones from the
    marginals.  Two identical constant rating vectors have no expected
    disagreement and return 1.0 by convention.
    """
    if len(a) != len(b):
        raise ValueError("rating vectors must have equal length")
    if not a:
        raise ValueError("rating vectors must be non-empty")
    for v in list(a) + list(b):
        if not (1 <= v <= scale):
            raise ValueError(f"rating {v} outside 1..{scale}")
    if weighting not in ("linear", "quadratic"):
        raise ValueError(f"unknown weighting {weighting!r}")

    k = scale
    n = len(a)

    def weight(i: int, j: int) -> float:
        d = abs(i - j) / (k - 1)
        return d if weighting == "linear" else d * d

    observed = 0.0
    for x, y in zip(a, b):
        observed += weight(x, y)
    observed /= n

    pa = [sum(1 for v in a if v == i) / n for i in range(1, k + 1)]
    pb = [sum(1 for v in b if v == i) / n for i in range(1, k + 1)]
    expected = 0.0
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            expected += weight(i, j) * pa[i - 1] * pb[j - 1]

    if expected == 0.0:
        # both raters constant and equal: perfect, degenerate agreement
        return 1.0
    return 1.0 - observed / expected


def average_pairwise_agreement(labels: dict[str, list]) -> float:
    """Mean over unordered rater pairs of the exact-match fraction."""
    raters = sorted(labels)
    if len(raters) < 2:
        raise ValueError("need at least two raters")
    lengths = {len(labels[r]) for r in raters}
    if len(lengths) != 1:
        raise ValueError("all raters must label the same items")
    n_items = lengths.pop()
    if n_items == 0:
        raise ValueError("no items to compare")
    total = 0.0
    pairs = 0
    for r1, r2 in combinations(raters, 2):
        matches = sum(1 for x, y in zip(labels[r1], labels[r2]) if x == y)
        total += matches / n_items
        pairs += 1
    return total / pairs


def classify_agreement(kappa: float) -> str:
    """Band label for a kappa value; bands are upper-inclusive so e.g. 0.40
    is still 'fair' and anything above it is 'moderate'."""
    if math.isnan(kappa):
        raise ValueError("kappa must be finite")
    for lower, label in AGREEMENT_BANDS:
        if kappa > lower:
            return label
    return "slight or worse"


# --- human ratings ------------------------------------------------------------

@dataclass
class RatingRecord:
    rater_id: str
    target_kind: str  # "high_level_plan" | "animation"
    motion_id: int
    system_tag: str
    score: int  # HPS for plans, WBS for animations
    bpq: dict[str, str] | None = None
    comment: str = ""
    task_id: str = ""

    def validate(self) -> list[str]:
        problems = []
        if self.target_kind not in ("high_level_plan", "animation"):
            problems.append(f"unknown target kind {self.target_kind!r}")
        if not isinstance(self.score, int) or not (LIKERT_MIN <= self.score <= LIKERT_MAX):
            problems.append(f"score {self.score!r} outside {LIKERT_MIN}..{LIKERT_MAX}")
        if self.target_kind == "animation":
            if self.bpq is None:
                problems.append("animation rating requires BPQ labels")
            else:
                missing = set(BPQ_GROUPS) - set(self.bpq)
                if missing:
                    problems.append(f"missing BPQ groups: {sorted(missing)}")
                unknown = set(self.bpq) - set(BPQ_GROUPS)
                if unknown:
                    problems.append(f"unknown BPQ groups: {sorted(unknown)}")
                bad = [v for v in self.bpq.values() if v not in BPQ_LABELS]
                if bad:
                    problems.append(f"unknown BPQ labels: {bad}")
        elif self.bpq is not None:
            problems.append("plan rating must not carry BPQ labels")
        return problems

    def to_dict(self) -> dict:
        return {
            "rater_id": self.rater_id,
            "target_kind": self.target_kind,
            "motion_id": self.motion_id,
            "system_tag": self.system_tag,
            "score": self.score,
            "bpq": dict(self.bpq) if self.bpq else None,
            "comment": self.comment,
            "task_id": self.task_id,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RatingRecord":
        return cls(
            rater_id=doc["rater_id"],
            target_kind=doc["target_kind"],
            motion_id=doc["motion_id"],
            system_tag=doc["system_tag"],
            score=doc["score"],
            bpq=doc.get("bpq"),
            comment=doc.get("comment", ""),
            task_id=doc.get("task_id", ""),
        )


def aggregate_bpq(records: list[RatingRecord]) -> dict[str, dict[str, dict[str, float]]]:
    """Per system tag and body-part group: percentage of Good / PartiallyGood
    / Bad among the non-NotRelevant labels.  Groups with only NotRelevant
    labels are omitted from that system's row."""
    counts: dict[str, dict[str, dict[str, int]]] = {}
    for record in records:
        if record.target_kind != "animation" or not record.bpq:
            continue
        system = counts.setdefault(record.system_tag, {})
        for group, label in record.bpq.items():
            if label == "NotRelevant":
                continue
            tally = system.setdefault(group, {"Good": 0, "PartiallyGood": 0, "Bad": 0})
            tally[label] += 1
    out: dict[str, dict[str, dict[str, float]]] = {}
    for system, groups in counts.items():
        out[system] = {}
        for group, tally in groups.items():
            n = sum(tally.values())
            out[system][group] = {label: 100.0 * c / n for label, c in tally.items()}
    return out


# --- cross-run statistics ------------------------------------------------------

@dataclass
class StatCell:
    mean: float
    sd: float
    var: float
    n: int
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "sd": self.sd, "var": self.var,
                "n": self.n, "flags": list(self.flags)}


def stat_cell(values: list[float]) -> StatCell:
    """Mean with population standard deviation; var is reported as sd**2 so
    the paired columns stay exactly consistent."""
    n = len(values)
    if n == 0:
        return StatCell(math.nan, math.nan, math.nan, 0, ["missing data"])
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    sd = math.sqrt(var)
    flags = ["single run"] if n == 1 else []
    return StatCell(mean=mean, sd=sd, var=sd * sd, n=n, flags=flags)


def summarize_run(run_directory) -> dict:
    """Aggregate evaluation outputs across a run directory.

    Accepts either a single run directory (manifest.json at the top) or a
    batch directory whose children are runs; statistics are computed across
    runs per (model, strategy, motion) cell.  Missing inputs become per-cell
    flags rather than failures.
    """
    root = Path(run_directory)
    if (root / "manifest.json").exists():
        run_dirs = [root]
    else:
        run_dirs = sorted(p for p in root.iterdir()
                          if p.is_dir() and (p / "manifest.json").exists())
    if not run_dirs:
        raise FileNotFoundError(f"no run manifest found under {root}")

    bppa_values: dict[tuple[str, str, int], list[float]] = {}
    reflection_rows = []
    complexity: dict[int, float] = {}
    ratings: list[RatingRecord] = []
    for run in run_dirs:
        manifest = json.loads((run / "manifest.json").read_text())
        model = manifest.get("llm", {}).get("model_name", "unknown")
        strategy = manifest.get("strategies", {}).get("low", "unknown")
        for path in sorted((run / "eval").glob("bppa_motion_*.json")) if (run / "eval").exists() else []:
            doc = json.loads(path.read_text())
            key = (model, strategy, doc["motion_id"])
            bppa_values.setdefault(key, []).append(doc["overall"])
        reflection_path = run / "eval" / "reflection.json"
        if reflection_path.exists():
            reflection_rows.append(json.loads(reflection_path.read_text()))
        complexity_path = run / "eval" / "complexity.json"
        if complexity_path.exists():
            complexity.update(
                {int(k): v for k, v in json.loads(complexity_path.read_text()).items()})
        ratings_path = run / "ratings" / "ratings.jsonl"
        if ratings_path.exists():
            for line in ratings_path.read_text().splitlines():
                if line.strip():
                    ratings.append(RatingRecord.from_dict(json.loads(line)))

    bppa_cells = {
        key: stat_cell(values) for key, values in sorted(bppa_values.items())
    }
    score_cells: dict[str, dict[tuple[str, int], StatCell]] = {"wbs": {}, "hps": {}}
    for kind, section in (("animation", "wbs"), ("high_level_plan", "hps")):
        grouped: dict[tuple[str, int], list[float]] = {}
        for record in ratings:
            if record.target_kind == kind:
                grouped.setdefault((record.system_tag, record.motion_id), []).append(
                    float(record.score))
        score_cells[section] = {key: stat_cell(v) for key, v in sorted(grouped.items())}

    return {
        "runs": [str(r) for r in run_dirs],
        "bppa": {
            "cells": [
                {"model": m, "strategy": s, "motion_id": mid, **cell.to_dict()}
                for (m, s, mid), cell in bppa_cells.items()
            ],
        },
        "wbs": [
            {"system": sys, "motion_id": mid, **cell.to_dict()}
            for (sys, mid), cell in score_cells["wbs"].items()
        ],
        "hps": [
            {"system": sys, "motion_id": mid, **cell.to_dict()}
            for (sys, mid), cell in score_cells["hps"].items()
        ],
        "reflection": reflection_rows,
        "complexity": complexity,
        "bpq": aggregate_bpq(ratings),
    }
