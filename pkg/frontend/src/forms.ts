// Rating form state and validation, mirroring the service's rules: Likert
// scores within 1..5, animation ratings require all six BPQ groups.

import type { RatingSubmission, TargetKind, TaskInfo } from "./types.js";

export const LIKERT_MIN = 1;
export const LIKERT_MAX = 5;
export const BPQ_GROUPS = [
  "Head", "Torso", "Left Arm", "Right Arm", "Left Leg", "Right Leg",
] as const;
export const BPQ_LABELS = ["Good", "PartiallyGood", "Bad", "NotRelevant"] as const;
export const BPQ_LABEL_TEXT: Record<string, string> = {
  Good: "Good",
  PartiallyGood: "Partially Good",
  Bad: "Bad",
  NotRelevant: "Not Relevant",
};

export interface RatingFormState {
  kind: TargetKind;
  score: number | null;
  bpq: Record<string, string | null>;
  comment: string;
}

export function emptyForm(kind: TargetKind): RatingFormState {
  const bpq: Record<string, string | null> = {};
  if (kind === "animation") {
    for (const group of BPQ_GROUPS) {
      bpq[group] = null;
    }
  }
  return { kind, score: null, bpq, comment: "" };
}

export function isComplete(form: RatingFormState): boolean {
  if (
    form.score === null ||
    !Number.isInteger(form.score) ||
    form.score < LIKERT_MIN ||
    form.score > LIKERT_MAX
  ) {
    return false;
  }
  if (form.kind === "animation") {
    for (const group of BPQ_GROUPS) {
      if (!form.bpq[group]) {
        return false;
      }
    }
  }
  return true;
}

export function validateSubmission(submission: RatingSubmission,
                                   kind: TargetKind): string[] {
  const problems: string[] = [];
  if (
    !Number.isInteger(submission.score) ||
    submission.score < LIKERT_MIN ||
    submission.score > LIKERT_MAX
  ) {
    problems.push(`score ${submission.score} outside ${LIKERT_MIN}..${LIKERT_MAX}`);
  }
  if (kind === "animation") {
    if (!submission.bpq) {
      problems.push("animation rating requires BPQ labels");
    } else {
      for (const group of BPQ_GROUPS) {
        if (!(group in submission.bpq)) {
          problems.push(`missing BPQ group: ${group}`);
        }
      }
      for (const [group, label] of Object.entries(submission.bpq)) {
        if (!(BPQ_LABELS as readonly string[]).includes(label)) {
          problems.push(`unknown BPQ label for ${group}: ${label}`);
        }
      }
    }
  } else if (submission.bpq) {
    problems.push("plan rating must not carry BPQ labels");
  }
  return problems;
}

export function toSubmission(form: RatingFormState, task: TaskInfo,
                             raterId: string): RatingSubmission {
  if (!isComplete(form)) {
    throw new Error("form incomplete");
  }
  return {
    task_id: task.task_id,
    rater_id: raterId,
    score: form.score as number,
    bpq: form.kind === "animation" ? ({ ...form.bpq } as Record<string, string>) : null,
    comment: form.comment,
  };
}
