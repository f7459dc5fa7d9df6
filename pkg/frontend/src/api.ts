// REST client for the annotation service plus an optimistic local queue:
// failed submissions are kept and retried so a flaky network never loses a
// rating.

import { assertBlinded } from "./blinding.js";
import type {
  ClipDocument,
  PlanDocument,
  RatingSubmission,
  TaskInfo,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    if (!response.ok) {
      throw new Error(`GET ${path} failed: ${response.status}`);
    }
    return (await response.json()) as T;
  }

  async tasks(raterId: string): Promise<TaskInfo[]> {
    const doc = await this.getJson<{ tasks: TaskInfo[] }>(
      `/tasks?rater=${encodeURIComponent(raterId)}`);
    return assertBlinded(doc.tasks, "task list");
  }

  async clip(url: string): Promise<ClipDocument> {
    return assertBlinded(await this.getJson<ClipDocument>(url), "clip");
  }

  async plan(url: string): Promise<PlanDocument> {
    return assertBlinded(await this.getJson<PlanDocument>(url), "plan");
  }

  async rubric(url: string): Promise<Record<string, unknown>> {
    return this.getJson(url);
  }

  async submit(rating: RatingSubmission): Promise<void> {
    const response = await this.fetchFn(this.baseUrl + "/ratings", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(rating),
    });
    if (response.status === 422) {
      const detail = await response.text();
      throw new RubricViolation(detail);
    }
    if (!response.ok) {
      throw new Error(`POST /ratings failed: ${response.status}`);
    }
  }
}

export class RubricViolation extends Error {}

export class SubmissionQueue {
  private pending: RatingSubmission[] = [];

  constructor(private readonly client: ApiClient) {}

  get size(): number {
    return this.pending.length;
  }

  /** Submit now; on transport failure keep the rating for a later flush.
      Rubric violations are the caller's bug and are re-thrown. */
  async submit(rating: RatingSubmission): Promise<boolean> {
    try {
      await this.client.submit(rating);
      return true;
    } catch (error) {
      if (error instanceof RubricViolation) {
        throw error;
      }
      this.pending.push(rating);
      return false;
    }
  }

  /** Retry everything queued; items that fail again stay queued. */
  async flush(): Promise<number> {
    const retrying = this.pending;
    this.pending = [];
    let delivered = 0;
    for (const rating of retrying) {
      if (await this.submit(rating)) {
        delivered += 1;
      }
    }
    return delivered;
  }
}
