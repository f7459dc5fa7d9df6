// Client/server sampler agreement: every probe in the exported fixtures must
// match the backend sampler within 1e-4 degrees per channel.

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { samplePose } from "../src/sampler.js";
import type { ClipDocument, Vec3 } from "../src/types.js";

interface SampleProbe {
  t: number;
  rotations: Record<string, Vec3>;
  root_translation: Vec3;
}

interface Fixture {
  name: string;
  clip: ClipDocument;
  samples: SampleProbe[];
}

const fixturePath = fileURLToPath(new URL("./fixtures/clips.json", import.meta.url));
const fixtures: Fixture[] = JSON.parse(readFileSync(fixturePath, "utf8")).fixtures;

const TOLERANCE_DEG = 1e-4;

describe("sampler agreement with the service", () => {
  it("covers ten fixture clips", () => {
    expect(fixtures.length).toBe(10);
  });

  for (const fixture of fixtures) {
    it(`agrees within 1e-4 deg on ${fixture.name}`, () => {
      expect(fixture.samples.length).toBeGreaterThanOrEqual(10);
      for (const probe of fixture.samples) {
        const pose = samplePose(fixture.clip, probe.t);
        for (const [joint, expected] of Object.entries(probe.rotations)) {
          const got = pose.rotations[joint];
          for (let c = 0; c < 3; c++) {
            expect(Math.abs(got[c] - expected[c])).toBeLessThanOrEqual(TOLERANCE_DEG);
          }
        }
        for (let c = 0; c < 3; c++) {
          expect(Math.abs(pose.rootTranslation[c] - probe.root_translation[c]))
            .toBeLessThanOrEqual(TOLERANCE_DEG);
        }
      }
    });
  }

  it("is exact at keyframe times", () => {
    const clip = fixtures[0].clip;
    for (const kf of clip.keyframes) {
      const pose = samplePose(clip, kf.time);
      expect(pose.rotations).toEqual(kf.rotations);
    }
  });

  it("rejects out-of-range times", () => {
    const clip = fixtures[0].clip;
    expect(() => samplePose(clip, -0.001)).toThrow();
    expect(() => samplePose(clip, clip.duration + 0.001)).toThrow();
  });

  it("interpolates the elbow bend linearly", () => {
    const elbow = fixtures.find((f) => f.name === "elbow_bend");
    expect(elbow).toBeDefined();
    const mid = samplePose(elbow!.clip, 1.0);
    expect(mid.rotations["m_avg_L_Elbow"][1]).toBeCloseTo(45, 9);
  });
});
