// The client forward kinematics must reproduce the service's world-space
// joint positions on the fixture probe grids.

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { eulerToMatrix, forwardKinematics, matMul, transpose } from "../src/fk.js";
import { samplePose } from "../src/sampler.js";
import type { ClipDocument, ClipSkeleton, Vec3 } from "../src/types.js";

interface FkProbe {
  t: number;
  positions: Record<string, Vec3>;
}

interface Fixture {
  name: string;
  clip: ClipDocument;
  fk: FkProbe[];
}

const fixturePath = fileURLToPath(new URL("./fixtures/clips.json", import.meta.url));
const fixtures: Fixture[] = JSON.parse(readFileSync(fixturePath, "utf8")).fixtures;

const TOLERANCE_M = 1e-6;

describe("forward kinematics agreement with the service", () => {
  for (const fixture of fixtures) {
    it(`matches world positions on ${fixture.name}`, () => {
      const skeleton = fixture.clip.skeleton as ClipSkeleton;
      for (const probe of fixture.fk) {
        const pose = samplePose(fixture.clip, probe.t);
        const fk = forwardKinematics(skeleton, pose);
        for (const [joint, expected] of Object.entries(probe.positions)) {
          const got = fk.positions[joint];
          for (let c = 0; c < 3; c++) {
            expect(Math.abs(got[c] - expected[c])).toBeLessThanOrEqual(TOLERANCE_M);
          }
        }
      }
    });
  }

  it("euler matrices are orthonormal", () => {
    const angles: Vec3[] = [
      [0, 0, 0], [90, 0, 0], [0, 90, 0], [0, 0, 90],
      [12.5, -33.3, 127], [-180, 45, -90],
    ];
    for (const a of angles) {
      const m = eulerToMatrix(a);
      const shouldBeIdentity = matMul(m, transpose(m));
      const identity = [1, 0, 0, 0, 1, 0, 0, 0, 1];
      for (let i = 0; i < 9; i++) {
        expect(Math.abs(shouldBeIdentity[i] - identity[i])).toBeLessThan(1e-12);
      }
    }
  });

  it("neutral pose stands on the ground plane", () => {
    const skeleton = fixtures[0].clip.skeleton as ClipSkeleton;
    const pose = samplePose(fixtures[0].clip, 0);
    const fk = forwardKinematics(skeleton, pose);
    const ys = Object.values(fk.positions).map((p) => p[1]);
    expect(Math.min(...ys)).toBeGreaterThanOrEqual(-0.05);
    expect(fk.positions["m_avg_Head"][1]).toBeGreaterThan(
      fk.positions["m_avg_Pelvis"][1]);
  });
});
