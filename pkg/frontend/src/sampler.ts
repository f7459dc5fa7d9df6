// Client-side re-implementation of clip sampling: exact keyframe poses at
// keyframe times, componentwise linear interpolation between them.  Must
// agree with the service's sampler within 1e-4 degrees on every channel.

import type { ClipDocument, Pose, Vec3 } from "./types.js";

function lerp3(a: Vec3, b: Vec3, alpha: number): Vec3 {
  return [
    a[0] + (b[0] - a[0]) * alpha,
    a[1] + (b[1] - a[1]) * alpha,
    a[2] + (b[2] - a[2]) * alpha,
  ];
}

export function samplePose(clip: ClipDocument, t: number): Pose {
  const frames = clip.keyframes;
  if (frames.length === 0) {
    throw new Error("clip has no keyframes");
  }
  const duration = frames[frames.length - 1].time;
  if (t < 0 || t > duration) {
    throw new Error(`t=${t} outside [0, ${duration}]`);
  }
  // index of the last keyframe with time <= t
  let lo = 0;
  let hi = frames.length - 1;
  while (lo < hi) {
    const mid = (lo + hi + 1) >> 1;
    if (frames[mid].time <= t) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  const kf = frames[lo];
  if (kf.time === t || lo === frames.length - 1) {
    return {
      rotations: { ...kf.rotations },
      rootTranslation: [...kf.root_translation] as Vec3,
    };
  }
  const next = frames[lo + 1];
  const alpha = (t - kf.time) / (next.time - kf.time);
  const rotations: Record<string, Vec3> = {};
  for (const joint of Object.keys(kf.rotations)) {
    rotations[joint] = lerp3(kf.rotations[joint], next.rotations[joint], alpha);
  }
  return {
    rotations,
    rootTranslation: lerp3(kf.root_translation, next.root_translation, alpha),
  };
}
