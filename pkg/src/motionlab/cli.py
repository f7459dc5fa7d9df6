"""Command-line entry point: plan / compile / evaluate / serve / report.

Exit codes: 0 on success, 1 when some artifacts failed but usable output was
produced, 2 on fatal errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from itertools import combinations
from pathlib import Path

import numpy as np

from . import reporting
from .clip import (
    DEFAULT_FPS,
    compile_plan,
    compile_raw,
    export_bvh,
    export_clip_json,
)
from .gateway import HttpChatClient, LlmConfig, ReplayClient, record_transcript
from .highlevel import (
    load_instructions,
    plan_in_one_go,
    plan_piece_by_piece,
    save_plan,
    validate_plan,
)
from .lowlevel import (
    RawJointPlan,
    build_animation_plan,
    load_animation_plan,
    plan_raw_parameters,
    save_animation_plan,
)
from .metrics import (
    RatingRecord,
    bppa,
    classify_agreement,
    load_oracle,
    motion_complexity,
    reflection_stats_pooled,
    stat_cell,
    summarize_run,
    weighted_kappa,
)
from .prompts import PromptLibrary
from .runs import RunDirectory, RunManifest, data_versions
from .skeleton import load_rules, load_skeleton
from .taxonomy import load_taxonomy, validate_taxonomy

log = logging.getLogger("motionlab")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_FATAL = 2


def _parse_ids(text: str) -> list[int]:
    out: list[int] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if "-" in chunk:
            lo, hi = chunk.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif chunk:
            out.append(int(chunk))
    return out


def _build_client(args) -> tuple[object, LlmConfig]:
    config = LlmConfig(
        endpoint_url=args.endpoint,
        model_name=args.model,
        temperature=args.temperature,
        max_tokens=args.max_tokens,
        timeout=args.timeout,
        max_retries=args.max_retries,
        api_key_env=args.api_key_env,
    )
    if args.replay:
        script = json.loads(Path(args.replay).read_text())
        if isinstance(script, dict):
            script = script.get("replies", [])
        return ReplayClient(script, strict=args.replay_strict), config
    if not os.environ.get(config.api_key_env):
        raise SystemExit(
            f"fatal: API key env var {config.api_key_env!r} is not set and no "
            "--replay script was given")
    return HttpChatClient(), config


def cmd_plan(args) -> int:
    instructions = load_instructions(args.corpus)
    if args.instructions:
        wanted = set(_parse_ids(args.instructions))
        instructions = [i for i in instructions if i.id in wanted]
    if not instructions:
        print("fatal: no instructions selected", file=sys.stderr)
        return EXIT_FATAL

    client, config = _build_client(args)
    taxonomy = load_taxonomy()
    skeleton = load_skeleton()
    library = PromptLibrary.bundled()

    base = Path(args.out)
    run_paths = (
        [base] if args.runs == 1
        else [base / f"run_{i:02d}" for i in range(1, args.runs + 1)]
    )
    failures = 0
    produced = 0
    for run_index, run_path in enumerate(run_paths, start=1):
        manifest = RunManifest(
            run_id=run_path.name or str(run_path),
            llm={
                "model_name": config.model_name,
                "endpoint_url": config.endpoint_url,
                "temperature": config.temperature,
                "max_tokens": config.max_tokens,
                "timeout": config.timeout,
                "max_retries": config.max_retries,
            },
            strategies={"high": args.high, "low": "raw" if args.raw else args.low},
            instruction_ids=[i.id for i in instructions],
            versions=data_versions(),
            seed=args.seed,
            notes=args.notes,
        )
        run = RunDirectory.create(run_path, manifest)
        for instruction in instructions:
            try:
                high_session = client.session(
                    config, library.system_prompt,
                    strategy=f"high_{args.high}", motion_id=instruction.id)
                if args.high == "piece_by_piece":
                    high = plan_piece_by_piece(instruction, high_session, library)
                else:
                    high = plan_in_one_go(instruction, high_session, library)
                problems = validate_plan(high)
                if problems:
                    raise ValueError(f"invalid high-level plan: {problems}")
                save_plan(high, run.plan_path(instruction.id))
                record_transcript(high_session, run.subdir("transcripts"))

                if args.raw:
                    raw_session = client.session(
                        config, library.system_prompt,
                        strategy="low_raw", motion_id=instruction.id)
                    raw_plan = plan_raw_parameters(instruction, raw_session, skeleton)
                    path = run.subdir("plans_raw") / f"motion_{instruction.id:02d}.json"
                    path.parent.mkdir(exist_ok=True)
                    path.write_text(json.dumps(raw_plan.to_dict(), indent=2) + "\n")
                    record_transcript(raw_session, run.subdir("transcripts"))
                else:
                    low_sessions = []

                    def low_factory():
                        session = client.session(
                            config, library.system_prompt,
                            strategy=f"low_{args.low}", motion_id=instruction.id)
                        low_sessions.append(session)
                        return session

                    low = build_animation_plan(
                        high, args.low, low_factory, taxonomy, library,
                        reflect=not args.no_reflect)
                    save_animation_plan(low, run.animation_plan_path(instruction.id))
                    for session in low_sessions:
                        record_transcript(session, run.subdir("transcripts"))
                produced += 1
            except Exception as exc:  # per-instruction isolation
                failures += 1
                log.error("run %s instruction %s failed: %s",
                          run_index, instruction.id, exc)
        print(f"run {run_index}/{len(run_paths)}: artifacts in {run_path}")
    if produced == 0:
        return EXIT_FATAL
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_compile(args) -> int:
    rules = load_rules()
    skeleton = load_skeleton()
    failures = 0
    produced = 0
    for run_path in _run_dirs(Path(args.run)):
        run = RunDirectory(run_path)
        for plan_path in sorted((run_path / "plans_low").glob("motion_*.json")):
            try:
                plan = load_animation_plan(plan_path)
                clip = compile_plan(plan, rules, skeleton)
                motion_id = plan.high_level.instruction.id
                export_clip_json(clip, run.clip_path(motion_id), skeleton)
                if args.bvh:
                    export_bvh(clip, skeleton, run.bvh_path(motion_id), fps=args.fps)
                produced += 1
            except Exception as exc:
                failures += 1
                log.error("compile %s failed: %s", plan_path, exc)
        raw_dir = run_path / "plans_raw"
        if raw_dir.exists():
            for plan_path in sorted(raw_dir.glob("motion_*.json")):
                try:
                    raw_plan = RawJointPlan.from_dict(json.loads(plan_path.read_text()))
                    clip = compile_raw(raw_plan, skeleton, clamp=not args.no_clamp)
                    motion_id = raw_plan.instruction.id
                    export_clip_json(clip, run.clip_path(motion_id), skeleton)
                    if args.bvh:
                        export_bvh(clip, skeleton, run.bvh_path(motion_id), fps=args.fps)
                    produced += 1
                except Exception as exc:
                    failures += 1
                    log.error("compile %s failed: %s", plan_path, exc)
    if produced == 0:
        return EXIT_FATAL
    return EXIT_PARTIAL if failures else EXIT_OK


def _run_dirs(root: Path) -> list[Path]:
    if (root / "manifest.json").exists():
        return [root]
    subdirs = sorted(p for p in root.iterdir()
                     if p.is_dir() and (p / "manifest.json").exists())
    if not subdirs:
        raise SystemExit(f"fatal: no run manifest under {root}")
    return subdirs


def cmd_evaluate(args) -> int:
    oracle_dir = Path(args.oracle)
    missing: list[str] = []
    produced = 0
    for run_path in _run_dirs(Path(args.run)):
        eval_dir = run_path / "eval"
        eval_dir.mkdir(exist_ok=True)
        complexity: dict[int, float] = {}
        reflection_pairs = []
        part_counts: dict[str, list[int]] = {}
        per_motion_overall: dict[int, float] = {}
        for plan_path in sorted((run_path / "plans_low").glob("motion_*.json")):
            plan = load_animation_plan(plan_path)
            motion_id = plan.high_level.instruction.id
            complexity[motion_id] = motion_complexity(plan)
            oracle_path = oracle_dir / f"motion_{motion_id:02d}.json"
            if not oracle_path.exists():
                missing.append(f"{run_path.name}: no oracle for motion {motion_id}")
                continue
            oracle = load_oracle(oracle_path)
            report = bppa(plan, oracle)
            (eval_dir / f"bppa_motion_{motion_id:02d}.json").write_text(
                json.dumps(report.to_dict(), indent=2) + "\n")
            per_motion_overall[motion_id] = report.overall
            for kind, (hits, n) in report.by_part_counts.items():
                acc = part_counts.setdefault(kind, [0, 0])
                acc[0] += hits
                acc[1] += n
            reflection_pairs.append((plan.reflections, oracle))
            produced += 1
        if complexity:
            (eval_dir / "complexity.json").write_text(
                json.dumps({str(k): v for k, v in sorted(complexity.items())},
                           indent=2) + "\n")
        if reflection_pairs:
            stats = reflection_stats_pooled(reflection_pairs)
            (eval_dir / "reflection.json").write_text(
                json.dumps(stats.to_dict(), indent=2) + "\n")
            reporting.fig_reflection_stats(
                stats.to_dict(), eval_dir / "figures" / "reflection_stats.png")
        if part_counts:
            pooled = {k: hits / n for k, (hits, n) in part_counts.items()}
            reporting.fig_bppa_by_part(
                pooled, eval_dir / "figures" / "bppa_by_part.png")
        if per_motion_overall:
            reporting.fig_bppa_by_motion(
                per_motion_overall, eval_dir / "figures" / "bppa_by_motion.png")
            reporting.fig_complexity_vs_bppa(
                complexity, per_motion_overall,
                eval_dir / "figures" / "complexity_vs_bppa.png")

    for line in missing:
        log.error("%s", line)
    if produced == 0:
        return EXIT_FATAL

    summary = summarize_run(args.run)
    out_root = Path(args.run)
    (out_root / "eval_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    rows = [
        [c["model"], c["strategy"], c["motion_id"], c["mean"], c["sd"], c["var"], c["n"]]
        for c in summary["bppa"]["cells"]
    ]
    headers = ["model", "strategy", "motion_id", "mean", "sd", "var", "runs"]
    reporting.write_csv(out_root / "eval_summary.csv", headers, rows)
    (out_root / "eval_summary.txt").write_text(reporting.render_table(headers, rows))
    print((out_root / "eval_summary.txt").read_text())
    return EXIT_PARTIAL if missing else EXIT_OK


def _agreement_section(records: list[RatingRecord], kind: str,
                       weighting: str) -> dict | None:
    scores: dict[str, dict[tuple[str, int], int]] = {}
    for r in records:
        if r.target_kind == kind:
            scores.setdefault(r.rater_id, {})[(r.system_tag, r.motion_id)] = r.score
    raters = sorted(scores)
    if len(raters) < 2:
        return None
    matrix = np.full((len(raters), len(raters)), np.nan)
    values = []
    for i, j in combinations(range(len(raters)), 2):
        items = sorted(set(scores[raters[i]]) & set(scores[raters[j]]))
        if not items:
            continue
        a = [scores[raters[i]][it] for it in items]
        b = [scores[raters[j]][it] for it in items]
        kappa = weighted_kappa(a, b, weighting=weighting)
        matrix[i, j] = matrix[j, i] = kappa
        values.append(kappa)
    np.fill_diagonal(matrix, 1.0)
    if not values:
        return None
    mean_kappa = float(np.mean(values))
    return {
        "raters": raters,
        "matrix": matrix.tolist(),
        "mean_kappa": mean_kappa,
        "band": classify_agreement(mean_kappa),
        "weighting": weighting,
    }


def cmd_report(args) -> int:
    root = Path(args.run)
    records: list[RatingRecord] = []
    if args.ratings:
        doc = json.loads(Path(args.ratings).read_text())
        entries = doc["ratings"] if isinstance(doc, dict) else doc
        records = [RatingRecord.from_dict(e) for e in entries]
    else:
        for run_path in _run_dirs(root):
            ratings_path = run_path / "ratings" / "ratings.jsonl"
            if ratings_path.exists():
                for line in ratings_path.read_text().splitlines():
                    if line.strip():
                        records.append(RatingRecord.from_dict(json.loads(line)))
    if not records:
        print("fatal: no ratings found", file=sys.stderr)
        return EXIT_FATAL

    out = Path(args.out) if args.out else root / "report"
    out.mkdir(parents=True, exist_ok=True)
    report: dict = {"weighting": args.weighting}

    for kind, metric in (("animation", "WBS"), ("high_level_plan", "HPS")):
        grouped: dict[tuple[str, int], list[float]] = {}
        for r in records:
            if r.target_kind == kind:
                grouped.setdefault((r.system_tag, r.motion_id), []).append(float(r.score))
        cells = [
            {"system": system, "motion_id": mid, **stat_cell(vals).to_dict()}
            for (system, mid), vals in sorted(grouped.items())
        ]
        report[metric.lower()] = cells
        if cells:
            headers = ["system", "motion_id", "mean", "sd", "var", "n"]
            rows = [[c["system"], c["motion_id"], c["mean"], c["sd"], c["var"], c["n"]]
                    for c in cells]
            reporting.write_csv(out / f"{metric.lower()}_table.csv", headers, rows)
            (out / f"{metric.lower()}_table.txt").write_text(
                reporting.render_table(headers, rows))
            reporting.fig_score_means(cells, out / "figures" / f"{metric.lower()}_means.png",
                                      metric)
        agreement = _agreement_section(records, kind, args.weighting)
        if agreement is None:
            report[f"{metric.lower()}_agreement"] = {"available": False,
                                                     "reason": "fewer than 2 raters"}
        else:
            report[f"{metric.lower()}_agreement"] = {"available": True, **agreement}
            reporting.fig_kappa_heatmap(
                agreement["raters"], np.array(agreement["matrix"]),
                out / "figures" / f"{metric.lower()}_kappa.png",
                title=f"Pairwise weighted kappa ({metric})")

    from .metrics import aggregate_bpq, average_pairwise_agreement

    bpq = aggregate_bpq(records)
    report["bpq"] = bpq
    if bpq:
        headers = ["system", "group", "Good", "PartiallyGood", "Bad"]
        rows = []
        for system in sorted(bpq):
            for group, pct in bpq[system].items():
                rows.append([system, group, pct.get("Good", 0.0),
                             pct.get("PartiallyGood", 0.0), pct.get("Bad", 0.0)])
        reporting.write_csv(out / "bpq_table.csv", headers, rows)
        (out / "bpq_table.txt").write_text(reporting.render_table(headers, rows))
        reporting.fig_bpq_stacked(bpq, out / "figures" / "bpq_stacked.png")

    # per-group average pairwise agreement over BPQ labels
    bpq_labels: dict[str, dict[str, dict[tuple[str, int], str]]] = {}
    for r in records:
        if r.target_kind == "animation" and r.bpq:
            for group, label in r.bpq.items():
                bpq_labels.setdefault(group, {}).setdefault(r.rater_id, {})[
                    (r.system_tag, r.motion_id)] = label
    apa: dict[str, float] = {}
    for group, by_rater in bpq_labels.items():
        raters = sorted(by_rater)
        if len(raters) < 2:
            continue
        common = set.intersection(*(set(by_rater[r]) for r in raters))
        if not common:
            continue
        items = sorted(common)
        apa[group] = average_pairwise_agreement(
            {r: [by_rater[r][it] for it in items] for r in raters})
    report["bpq_agreement"] = apa

    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"report written to {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.run, seed=args.seed, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def cmd_validate(args) -> int:
    taxonomy = load_taxonomy(args.taxonomy)
    violations = validate_taxonomy(taxonomy)
    for v in violations:
        print(f"violation: {v}")
    rules = load_rules(args.rules)
    skeleton = load_skeleton(args.skeleton)
    problems = rules.validate(taxonomy, skeleton)
    for p in problems:
        print(f"rule problem: {p}")
    if violations or problems:
        return EXIT_FATAL
    print(f"taxonomy {taxonomy.version}: {sum(len(taxonomy.positions_for(p)) for p in taxonomy.list_body_parts())} positions, "
          f"{len(rules.rules)} rules, all checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motionlab",
        description="Ground natural-language motion instructions into "
                    "keyframed skeleton animations via chat LLMs; evaluate "
                    "and collect human ratings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="run high+low level planning")
    p.add_argument("--instructions", help="comma/range list of ids (default: full corpus)")
    p.add_argument("--corpus", help="instructions JSON file (default: bundled)")
    p.add_argument("--out", required=True, help="run directory (or batch root with --runs>1)")
    p.add_argument("--high", choices=["piece_by_piece", "in_one_go"],
                   default="piece_by_piece")
    p.add_argument("--low", choices=["hierarchical", "one_by_one", "all"],
                   default="hierarchical")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--raw", action="store_true",
                   help="raw joint-parameter mode instead of taxonomy positions")
    p.add_argument("--no-reflect", action="store_true")
    p.add_argument("--replay", help="JSON file with scripted replies (offline mode)")
    p.add_argument("--replay-strict", action="store_true")
    p.add_argument("--model", default="gpt-4o")
    p.add_argument("--endpoint", default="https://api.openai.com/v1/chat/completions")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--max-tokens", type=int, default=4095)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--api-key-env", default="MOTIONLAB_API_KEY")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--notes", default="")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("compile", help="compile plans into clips")
    p.add_argument("run", help="run directory (or batch root)")
    p.add_argument("--fps", type=float, default=DEFAULT_FPS)
    p.add_argument("--bvh", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--no-clamp", action="store_true",
                   help="keep raw-mode rotations beyond +-180 degrees")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("evaluate", help="score plans against oracle annotations")
    p.add_argument("run")
    p.add_argument("--oracle", required=True, help="directory of oracle motion_XX.json files")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="tables/figures from collected ratings")
    p.add_argument("run")
    p.add_argument("--ratings", help="exported ratings JSON (default: run ratings store)")
    p.add_argument("--out")
    p.add_argument("--weighting", choices=["linear", "quadratic"], default="linear")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="annotation service for human raters")
    p.add_argument("run")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8008)
    p.add_argument("--seed", type=int, default=None,
                   help="task-balancing seed (default: the run manifest's)")
    p.add_argument("--frontend", help="directory of built UI assets to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("validate", help="check bundled or external data files")
    p.add_argument("--taxonomy")
    p.add_argument("--rules")
    p.add_argument("--skeleton")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:
        log.error("fatal: %s", exc)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
