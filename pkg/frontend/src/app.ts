// Task-flow wiring: fetch the rater's blinded task list, play each clip (or
// show each plan), collect the rubric-guided form, submit, advance.
// Completed tasks are skipped on resume; failed submissions queue locally
// and retry before the next task.

import { ApiClient, RubricViolation, SubmissionQueue } from "./api.js";
import {
  BPQ_GROUPS,
  BPQ_LABELS,
  BPQ_LABEL_TEXT,
  LIKERT_MAX,
  LIKERT_MIN,
  RatingFormState,
  emptyForm,
  isComplete,
  toSubmission,
} from "./forms.js";
import { Camera, drawFrame, frontCamera, sideCamera } from "./render.js";
import type { ClipDocument, PlanDocument, TaskInfo } from "./types.js";

interface PlaybackState {
  clip: ClipDocument | null;
  time: number;
  playing: boolean;
  speed: number;
  loop: boolean;
}

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

export class AnnotationApp {
  private api = new ApiClient();
  private queue = new SubmissionQueue(this.api);
  private raterId = "";
  private tasks: TaskInfo[] = [];
  private index = 0;
  private form: RatingFormState = emptyForm("animation");
  private playback: PlaybackState = {
    clip: null, time: 0, playing: false, speed: 1, loop: true,
  };
  private camera: Camera = frontCamera();
  private lastTick = 0;
  private dragging = false;
  private dragStart: [number, number] = [0, 0];

  start(): void {
    el<HTMLButtonElement>("login-button").addEventListener("click", () => {
      void this.login();
    });
    el<HTMLInputElement>("rater-id").addEventListener("keydown", (event) => {
      if (event.key === "Enter") void this.login();
    });
    this.bindPlaybackControls();
    requestAnimationFrame((ts) => this.tick(ts));
  }

  private async login(): Promise<void> {
    const rater = el<HTMLInputElement>("rater-id").value.trim();
    if (!rater) return;
    this.raterId = rater;
    try {
      this.tasks = await this.api.tasks(rater);
    } catch (error) {
      el("login-error").textContent = `could not load tasks: ${error}`;
      return;
    }
    this.index = 0;
    this.show("screen-task");
    await this.advanceToNextOpenTask(true);
  }

  private show(screen: string): void {
    for (const id of ["screen-login", "screen-task", "screen-done"]) {
      el(id).hidden = id !== screen;
    }
  }

  private currentTask(): TaskInfo | null {
    return this.tasks[this.index] ?? null;
  }

  private async advanceToNextOpenTask(includeCurrent = false): Promise<void> {
    if (!includeCurrent) this.index += 1;
    while (this.currentTask()?.completed) {
      this.index += 1;
    }
    const task = this.currentTask();
    if (!task) {
      await this.queue.flush();
      this.show("screen-done");
      el("queue-note").textContent = this.queue.size
        ? `${this.queue.size} rating(s) are still queued; keep this tab open and retry.`
        : "";
      return;
    }
    await this.presentTask(task);
  }

  private async presentTask(task: TaskInfo): Promise<void> {
    const done = this.tasks.filter((t) => t.completed).length;
    el("progress").textContent =
      `task ${done + 1} of ${this.tasks.length} — motion ${task.motion_id}`;
    el("instruction").textContent = task.instruction_text;
    this.form = emptyForm(task.target_kind);
    el("comment").textContent = "";
    (el<HTMLTextAreaElement>("comment")).value = "";

    const rubric = await this.api.rubric(task.rubric_url);
    this.renderRubric(rubric);
    this.renderForm(task);

    const isAnimation = task.target_kind === "animation";
    el("player-panel").hidden = !isAnimation;
    el("plan-panel").hidden = isAnimation;
    if (isAnimation) {
      const clip = await this.api.clip(task.artifact_url);
      this.playback = { clip, time: 0, playing: true, speed: 1, loop: true };
      this.syncScrubber();
    } else {
      this.playback.clip = null;
      this.playback.playing = false;
      const plan = await this.api.plan(task.artifact_url);
      this.renderPlan(plan);
    }
  }

  private renderRubric(rubric: Record<string, unknown>): void {
    const target = el("rubric");
    target.textContent = "";
    const title = document.createElement("h3");
    title.textContent = `${rubric["title"] ?? "Rubric"} (${rubric["metric"] ?? ""})`;
    target.appendChild(title);
    const instruction = document.createElement("p");
    instruction.className = "rubric-instruction";
    instruction.textContent = String(rubric["instruction"] ?? "");
    target.appendChild(instruction);
    const scale = rubric["scale"] as Record<string, string> | undefined;
    if (scale) {
      const list = document.createElement("dl");
      for (const score of ["5", "4", "3", "2", "1"]) {
        const dt = document.createElement("dt");
        dt.textContent = score;
        const dd = document.createElement("dd");
        dd.textContent = scale[score];
        list.append(dt, dd);
      }
      target.appendChild(list);
    }
    const bpq = rubric["body_part_quality"] as
      | { instruction: string; labels: Record<string, string> }
      | undefined;
    if (bpq) {
      const heading = document.createElement("h4");
      heading.textContent = "Body part quality";
      target.appendChild(heading);
      const note = document.createElement("p");
      note.className = "rubric-instruction";
      note.textContent = bpq.instruction;
      target.appendChild(note);
      const list = document.createElement("dl");
      for (const [label, text] of Object.entries(bpq.labels)) {
        const dt = document.createElement("dt");
        dt.textContent = BPQ_LABEL_TEXT[label] ?? label;
        const dd = document.createElement("dd");
        dd.textContent = text;
        list.append(dt, dd);
      }
      target.appendChild(list);
    }
  }

  private renderPlan(plan: PlanDocument): void {
    const target = el("plan-steps");
    target.textContent = "";
    for (const step of plan.steps) {
      const card = document.createElement("div");
      card.className = "plan-step";
      const head = document.createElement("h4");
      head.textContent =
        `Step ${step.step_number} (${step.time_range[0]}s – ${step.time_range[1]}s)`;
      card.appendChild(head);
      for (const [label, text] of [
        ["Movement", step.movement],
        ["Initial state", step.initial_state],
        ["Final state", step.final_state],
      ]) {
        const p = document.createElement("p");
        const b = document.createElement("b");
        b.textContent = `${label}: `;
        p.appendChild(b);
        p.appendChild(document.createTextNode(text));
        card.appendChild(p);
      }
      target.appendChild(card);
    }
  }

  private renderForm(task: TaskInfo): void {
    const scoreRow = el("score-buttons");
    scoreRow.textContent = "";
    el("score-label").textContent =
      task.target_kind === "animation" ? "Whole Body Score" : "High-level Plan Score";
    for (let s = LIKERT_MIN; s <= LIKERT_MAX; s++) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = "score";
      button.textContent = String(s);
      button.addEventListener("click", () => {
        this.form.score = s;
        scoreRow.querySelectorAll("button").forEach((b) =>
          b.classList.toggle("selected", b === button));
        this.refreshSubmit();
      });
      scoreRow.appendChild(button);
    }

    const bpqPanel = el("bpq-panel");
    bpqPanel.hidden = task.target_kind !== "animation";
    const table = el("bpq-rows");
    table.textContent = "";
    if (task.target_kind === "animation") {
      for (const group of BPQ_GROUPS) {
        const row = document.createElement("tr");
        const name = document.createElement("td");
        name.textContent = group;
        row.appendChild(name);
        for (const label of BPQ_LABELS) {
          const cell = document.createElement("td");
          const button = document.createElement("button");
          button.type = "button";
          button.className = "bpq";
          button.textContent = BPQ_LABEL_TEXT[label];
          button.addEventListener("click", () => {
            this.form.bpq[group] = label;
            row.querySelectorAll("button").forEach((b) =>
              b.classList.toggle("selected", b === button));
            this.refreshSubmit();
          });
          cell.appendChild(button);
          row.appendChild(cell);
        }
        table.appendChild(row);
      }
    }

    const submit = el<HTMLButtonElement>("submit-rating");
    submit.onclick = () => void this.submit(task);
    this.refreshSubmit();
  }

  private refreshSubmit(): void {
    this.form.comment = el<HTMLTextAreaElement>("comment").value;
    el<HTMLButtonElement>("submit-rating").disabled = !isComplete(this.form);
  }

  private async submit(task: TaskInfo): Promise<void> {
    this.form.comment = el<HTMLTextAreaElement>("comment").value;
    if (!isComplete(this.form)) return;
    const submission = toSubmission(this.form, task, this.raterId);
    try {
      const delivered = await this.queue.submit(submission);
      el("submit-note").textContent = delivered
        ? "" : "submission queued (service unreachable); it will retry";
    } catch (error) {
      if (error instanceof RubricViolation) {
        el("submit-note").textContent = `rejected by the service: ${error.message}`;
        return;
      }
      throw error;
    }
    task.completed = true;
    await this.queue.flush();
    await this.advanceToNextOpenTask();
  }

  // --- playback --------------------------------------------------------------

  private bindPlaybackControls(): void {
    el<HTMLButtonElement>("play-pause").addEventListener("click", () => {
      this.playback.playing = !this.playback.playing;
    });
    el<HTMLInputElement>("scrubber").addEventListener("input", (event) => {
      const input = event.target as HTMLInputElement;
      this.playback.playing = false;
      this.playback.time = Number(input.value);
    });
    el<HTMLSelectElement>("speed").addEventListener("change", (event) => {
      this.playback.speed = Number((event.target as HTMLSelectElement).value);
    });
    el<HTMLButtonElement>("cam-front").addEventListener("click", () => {
      this.camera = frontCamera();
    });
    el<HTMLButtonElement>("cam-side").addEventListener("click", () => {
      this.camera = sideCamera();
    });
    const canvas = el<HTMLCanvasElement>("viewport");
    canvas.addEventListener("mousedown", (event) => {
      this.dragging = true;
      this.dragStart = [event.clientX, event.clientY];
    });
    window.addEventListener("mouseup", () => (this.dragging = false));
    window.addEventListener("mousemove", (event) => {
      if (!this.dragging) return;
      const [x0, y0] = this.dragStart;
      this.camera.yawDeg += (event.clientX - x0) * 0.5;
      this.camera.pitchDeg = Math.max(-80, Math.min(
        80, this.camera.pitchDeg + (event.clientY - y0) * 0.3));
      this.dragStart = [event.clientX, event.clientY];
    });
  }

  private syncScrubber(): void {
    const clip = this.playback.clip;
    if (!clip) return;
    const scrubber = el<HTMLInputElement>("scrubber");
    scrubber.max = String(clip.duration);
    scrubber.step = "0.01";
    scrubber.value = String(this.playback.time);
  }

  private tick(timestamp: number): void {
    const dt = this.lastTick ? (timestamp - this.lastTick) / 1000 : 0;
    this.lastTick = timestamp;
    const state = this.playback;
    if (state.clip) {
      if (state.playing && state.clip.duration > 0) {
        state.time += dt * state.speed;
        if (state.time > state.clip.duration) {
          state.time = state.loop ? 0 : state.clip.duration;
        }
      }
      const canvas = el<HTMLCanvasElement>("viewport");
      const ctx = canvas.getContext("2d");
      if (ctx) {
        drawFrame(ctx, state.clip, Math.min(state.time, state.clip.duration), this.camera);
      }
      el<HTMLInputElement>("scrubber").value = String(state.time);
      el("time-label").textContent =
        `${state.time.toFixed(2)}s / ${state.clip.duration.toFixed(2)}s`;
    }
    requestAnimationFrame((ts) => this.tick(ts));
  }
}

if (typeof document !== "undefined" && document.getElementById("screen-login")) {
  new AnnotationApp().start();
}
