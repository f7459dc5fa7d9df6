// Blinding: nothing delivered to the rating screens may identify the system
// that produced an artifact.  The fixtures are exported through the same
// blinding filter the service applies, and the client refuses to render
// payloads where identity leaked through.

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { assertBlinded, blindingViolations } from "../src/blinding.js";

const fixturePath = fileURLToPath(new URL("./fixtures/clips.json", import.meta.url));
const fixtures = JSON.parse(readFileSync(fixturePath, "utf8")).fixtures as {
  name: string;
  clip: unknown;
}[];

describe("blinding", () => {
  it("fixture clip payloads carry no system identity", () => {
    for (const fixture of fixtures) {
      expect(blindingViolations(fixture.clip)).toEqual([]);
      const text = JSON.stringify(fixture.clip);
      for (const needle of ["system_tag", "model_name", "strategy", "metadata"]) {
        expect(text.includes(`"${needle}"`)).toBe(false);
      }
    }
  });

  it("flags planted identity keys at any depth", () => {
    const leaky = {
      keyframes: [{ time: 0, nested: { system_tag: "model-x" } }],
    };
    const violations = blindingViolations(leaky);
    expect(violations).toEqual(["keyframes[0].nested.system_tag"]);
    expect(() => assertBlinded(leaky, "clip")).toThrow(/system identity/);
  });

  it("flags metadata and strategy keys", () => {
    expect(blindingViolations({ metadata: {} })).toEqual(["metadata"]);
    expect(blindingViolations({ steps: [{ strategy: "hier" }] }))
      .toEqual(["steps[0].strategy"]);
  });

  it("passes clean payloads through unchanged", () => {
    const clean = { instruction: { id: 1, text: "t" }, steps: [] };
    expect(assertBlinded(clean, "plan")).toBe(clean);
  });
});
