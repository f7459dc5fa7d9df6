// Stick-figure rendering: orthographic orbit camera, ground grid for
// spatial reference, bones as segments and joints as dots.  Everything up
// to the 2D canvas calls is pure math so it can be tested headlessly.

import { forwardKinematics } from "./fk.js";
import { samplePose } from "./sampler.js";
import type { ClipDocument, Vec3 } from "./types.js";

export interface Camera {
  yawDeg: number;   // orbit around +Y
  pitchDeg: number; // tilt toward the viewer
  zoom: number;     // pixels per meter
  center: Vec3;     // world point mapped to the canvas centre
}

export function frontCamera(): Camera {
  return { yawDeg: 0, pitchDeg: 8, zoom: 180, center: [0, 0.9, 0] };
}

export function sideCamera(): Camera {
  return { ...frontCamera(), yawDeg: 90 };
}

const DEG = Math.PI / 180;

/** Orthographic projection of a world point to canvas pixels. */
export function project(point: Vec3, camera: Camera,
                        width: number, height: number): [number, number] {
  const yaw = camera.yawDeg * DEG;
  const pitch = camera.pitchDeg * DEG;
  const px = point[0] - camera.center[0];
  const py = point[1] - camera.center[1];
  const pz = point[2] - camera.center[2];
  // rotate by -yaw about Y, then -pitch about X, then drop depth
  const x1 = px * Math.cos(yaw) - pz * Math.sin(yaw);
  const z1 = px * Math.sin(yaw) + pz * Math.cos(yaw);
  const y2 = py * Math.cos(pitch) - z1 * Math.sin(pitch);
  return [
    width / 2 + x1 * camera.zoom,
    height / 2 - y2 * camera.zoom,
  ];
}

export interface StickFigure {
  joints: [number, number][];
  bones: [[number, number], [number, number]][];
}

export function poseToFigure(clip: ClipDocument, t: number, camera: Camera,
                             width: number, height: number): StickFigure {
  const skeleton = clip.skeleton;
  if (!skeleton) {
    throw new Error("clip document carries no skeleton");
  }
  const pose = samplePose(clip, t);
  const fk = forwardKinematics(skeleton, pose);
  const joints: [number, number][] = [];
  const bones: [[number, number], [number, number]][] = [];
  const projected: Record<string, [number, number]> = {};
  for (const joint of skeleton.joints) {
    projected[joint.name] = project(fk.positions[joint.name], camera, width, height);
    joints.push(projected[joint.name]);
  }
  for (const joint of skeleton.joints) {
    if (joint.parent !== null) {
      bones.push([projected[joint.parent], projected[joint.name]]);
    }
  }
  for (const [joint, end] of Object.entries(fk.endSites)) {
    bones.push([projected[joint], project(end, camera, width, height)]);
  }
  return { joints, bones };
}

export function drawGround(ctx: CanvasRenderingContext2D, camera: Camera,
                           width: number, height: number, extent = 1.5,
                           lines = 7): void {
  ctx.strokeStyle = "#d5d9e0";
  ctx.lineWidth = 1;
  for (let i = 0; i < lines; i++) {
    const offset = -extent + (2 * extent * i) / (lines - 1);
    const a = project([-extent, 0, offset], camera, width, height);
    const b = project([extent, 0, offset], camera, width, height);
    const c = project([offset, 0, -extent], camera, width, height);
    const d = project([offset, 0, extent], camera, width, height);
    ctx.beginPath();
    ctx.moveTo(a[0], a[1]);
    ctx.lineTo(b[0], b[1]);
    ctx.moveTo(c[0], c[1]);
    ctx.lineTo(d[0], d[1]);
    ctx.stroke();
  }
}

export function drawFrame(ctx: CanvasRenderingContext2D, clip: ClipDocument,
                          t: number, camera: Camera): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  try {
    drawGround(ctx, camera, width, height);
    const figure = poseToFigure(clip, t, camera, width, height);
    ctx.strokeStyle = "#2b4a6f";
    ctx.lineWidth = 3;
    ctx.lineCap = "round";
    for (const [[x1, y1], [x2, y2]] of figure.bones) {
      ctx.beginPath();
      ctx.moveTo(x1, y1);
      ctx.lineTo(x2, y2);
      ctx.stroke();
    }
    ctx.fillStyle = "#c0504d";
    for (const [x, y] of figure.joints) {
      ctx.beginPath();
      ctx.arc(x, y, 3.2, 0, Math.PI * 2);
      ctx.fill();
    }
  } catch (error) {
    // malformed clip: placeholder rather than a crash loop
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#888";
    ctx.font = "14px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("clip could not be rendered", width / 2, height / 2);
    console.error(error);
  }
}
