"""Report rendering: aligned text tables, CSV, and matplotlib figures.

Figures land next to their delimited counterparts so a run's eval/ or
report/ directory is browsable on its own.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PART_KIND_ORDER = ["Head", "Torso", "UpperArm", "Elbow", "Wrist",
                   "UpperLeg", "Knee", "Ankle", "Toes"]
BPQ_COLORS = {"Good": "#4c9f70", "PartiallyGood": "#e3b23c", "Bad": "#c0504d"}


def render_table(headers: list[str], rows: list[list]) -> str:
    cells = [[str(h) for h in headers]] + [[_fmt(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = []
    for idx, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def write_csv(path, headers: list[str], rows: list[list]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        writer.writerows(rows)
    return path


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def fig_bppa_by_part(by_part: dict[str, float], path, title: str = "Accuracy by body part") -> Path:
    kinds = [k for k in PART_KIND_ORDER if k in by_part]
    values = [by_part[k] for k in kinds]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.bar(kinds, values, color="#4878a8")
    ax.set_ylim(0, 1)
    ax.set_ylabel("BPPA")
    ax.set_title(title)
    ax.tick_params(axis="x", rotation=30)
    return _save(fig, path)


def fig_bppa_by_motion(per_motion: dict[int, float], path) -> Path:
    motions = sorted(per_motion)
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.bar([str(m) for m in motions], [per_motion[m] for m in motions], color="#4878a8")
    ax.set_ylim(0, 1)
    ax.set_xlabel("motion id")
    ax.set_ylabel("BPPA")
    ax.set_title("Accuracy by motion")
    return _save(fig, path)


def fig_complexity_vs_bppa(complexity: dict[int, float], bppa: dict[int, float], path) -> Path:
    motions = sorted(set(complexity) & set(bppa))
    fig, ax = plt.subplots(figsize=(5, 4))
    xs = [complexity[m] for m in motions]
    ys = [bppa[m] for m in motions]
    ax.scatter(xs, ys, color="#4878a8")
    for m, x, y in zip(motions, xs, ys):
        ax.annotate(str(m), (x, y), fontsize=7, xytext=(3, 3), textcoords="offset points")
    ax.set_xlabel("motion complexity")
    ax.set_ylabel("BPPA")
    ax.set_title("Complexity vs accuracy")
    return _save(fig, path)


def fig_reflection_stats(stats: dict, path) -> Path:
    names = ["correction_percentage", "success_rate", "perfect_reflection_rate"]
    labels = ["Correction %", "Success rate", "Perfect reflection"]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(labels, [stats.get(n, 0.0) for n in names], color="#4878a8")
    ax.set_ylim(0, 1)
    ax.set_title("Self-reflection statistics")
    return _save(fig, path)


def fig_kappa_heatmap(raters: list[str], matrix: np.ndarray, path,
                      title: str = "Pairwise weighted kappa") -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.imshow(matrix, vmin=-1, vmax=1, cmap="RdYlGn")
    ax.set_xticks(range(len(raters)), raters, rotation=45, ha="right", fontsize=7)
    ax.set_yticks(range(len(raters)), raters, fontsize=7)
    for i in range(len(raters)):
        for j in range(len(raters)):
            ax.text(j, i, f"{matrix[i, j]:.2f}", ha="center", va="center", fontsize=6)
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title(title)
    return _save(fig, path)


def fig_score_means(cells: list[dict], path, metric: str) -> Path:
    # cells: [{"system", "motion_id", "mean", ...}]
    systems = sorted({c["system"] for c in cells})
    means = []
    for system in systems:
        vals = [c["mean"] for c in cells if c["system"] == system]
        means.append(sum(vals) / len(vals))
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(systems, means, color="#4878a8")
    ax.set_ylim(0, 5)
    ax.set_ylabel(metric)
    ax.set_title(f"{metric} by system")
    ax.tick_params(axis="x", rotation=20)
    return _save(fig, path)


def fig_bpq_stacked(bpq: dict[str, dict[str, dict[str, float]]], path) -> Path:
    systems = sorted(bpq)
    groups = ["Head", "Torso", "Left Arm", "Right Arm", "Left Leg", "Right Leg"]
    fig, axes = plt.subplots(1, len(systems) or 1, figsize=(3.2 * max(len(systems), 1), 3.8),
                             squeeze=False)
    for ax, system in zip(axes[0], systems):
        bottoms = np.zeros(len(groups))
        for label in ("Good", "PartiallyGood", "Bad"):
            vals = np.array([bpq[system].get(g, {}).get(label, 0.0) for g in groups])
            ax.bar(range(len(groups)), vals, bottom=bottoms,
                   color=BPQ_COLORS[label], label=label)
            bottoms += vals
        ax.set_xticks(range(len(groups)), groups, rotation=45, ha="right", fontsize=7)
        ax.set_ylim(0, 100)
        ax.set_title(system, fontsize=9)
    if systems:
        axes[0][0].set_ylabel("% of non-NotRelevant labels")
        axes[0][-1].legend(fontsize=7)
    return _save(fig, path)
