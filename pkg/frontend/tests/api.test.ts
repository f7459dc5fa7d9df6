// Submission queue semantics: transport failures queue locally and retry;
// rubric violations surface immediately; blinded fetch helpers reject
// leaky payloads.

import { describe, expect, it } from "vitest";

import { ApiClient, RubricViolation, SubmissionQueue } from "../src/api.js";
import type { RatingSubmission } from "../src/types.js";

function response(status: number, body: unknown = {}): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function rating(id: string): RatingSubmission {
  return { task_id: id, rater_id: "r1", score: 3, bpq: null, comment: "" };
}

describe("submission queue", () => {
  it("queues on transport failure and flushes later", async () => {
    let failing = true;
    const posted: string[] = [];
    const client = new ApiClient("", async (url, init) => {
      if (failing) throw new TypeError("network down");
      posted.push(String(init?.body));
      return response(200, { status: "ok" });
    });
    const queue = new SubmissionQueue(client);

    expect(await queue.submit(rating("a"))).toBe(false);
    expect(await queue.submit(rating("b"))).toBe(false);
    expect(queue.size).toBe(2);

    failing = false;
    expect(await queue.flush()).toBe(2);
    expect(queue.size).toBe(0);
    expect(posted.length).toBe(2);
  });

  it("keeps items that fail again on flush", async () => {
    const client = new ApiClient("", async () => {
      throw new TypeError("still down");
    });
    const queue = new SubmissionQueue(client);
    await queue.submit(rating("a"));
    expect(await queue.flush()).toBe(0);
    expect(queue.size).toBe(1);
  });

  it("re-throws rubric violations instead of queueing", async () => {
    const client = new ApiClient("", async () => response(422, { detail: ["bad"] }));
    const queue = new SubmissionQueue(client);
    await expect(queue.submit(rating("a"))).rejects.toBeInstanceOf(RubricViolation);
    expect(queue.size).toBe(0);
  });
});

describe("api client", () => {
  it("fetches and returns the blinded task list", async () => {
    const tasks = [{
      task_id: "t1", target_kind: "animation", motion_id: 1,
      instruction_text: "x", artifact_url: "/clip/t1",
      rubric_url: "/rubric/animation", completed: false,
    }];
    const client = new ApiClient("", async (url) => {
      expect(url).toBe("/tasks?rater=r%201");
      return response(200, { tasks });
    });
    expect(await client.tasks("r 1")).toEqual(tasks);
  });

  it("rejects clip payloads that leak identity", async () => {
    const client = new ApiClient("", async () =>
      response(200, { format: "clip-json", metadata: { source: "x" }, keyframes: [] }));
    await expect(client.clip("/clip/t1")).rejects.toThrow(/system identity/);
  });

  it("propagates http errors", async () => {
    const client = new ApiClient("", async () => response(404, {}));
    await expect(client.plan("/plan/nope")).rejects.toThrow(/404/);
  });
});
