// Forward kinematics matching the service: rotation matrices composed as
// R = Rz * Ry * Rx (degrees), per-joint rest orientations applied by
// conjugation (O * R * O^-1), offsets chained from the root.

import type { ClipSkeleton, Pose, Vec3 } from "./types.js";

export type Mat3 = [number, number, number, number, number, number, number, number, number];

const DEG = Math.PI / 180;

export function eulerToMatrix(angles: Vec3): Mat3 {
  const [x, y, z] = [angles[0] * DEG, angles[1] * DEG, angles[2] * DEG];
  const cx = Math.cos(x), sx = Math.sin(x);
  const cy = Math.cos(y), sy = Math.sin(y);
  const cz = Math.cos(z), sz = Math.sin(z);
  // Rz * Ry * Rx, row-major
  return [
    cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx,
    sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx,
    -sy, cy * sx, cy * cx,
  ];
}

export function matMul(a: Mat3, b: Mat3): Mat3 {
  const out = new Array(9) as Mat3;
  for (let r = 0; r < 3; r++) {
    for (let c = 0; c < 3; c++) {
      out[r * 3 + c] =
        a[r * 3] * b[c] + a[r * 3 + 1] * b[3 + c] + a[r * 3 + 2] * b[6 + c];
    }
  }
  return out;
}

export function matVec(m: Mat3, v: Vec3): Vec3 {
  return [
    m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
    m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
    m[6] * v[0] + m[7] * v[1] + m[8] * v[2],
  ];
}

export function transpose(m: Mat3): Mat3 {
  return [m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]];
}

const IDENTITY: Mat3 = [1, 0, 0, 0, 1, 0, 0, 0, 1];

function isIdentityOrientation(o: Vec3): boolean {
  return o[0] === 0 && o[1] === 0 && o[2] === 0;
}

export function localRotation(orientation: Vec3, angles: Vec3): Mat3 {
  const rot = eulerToMatrix(angles);
  if (isIdentityOrientation(orientation)) {
    return rot;
  }
  const o = eulerToMatrix(orientation);
  return matMul(matMul(o, rot), transpose(o));
}

export interface FkResult {
  positions: Record<string, Vec3>;
  endSites: Record<string, Vec3>;
}

export function forwardKinematics(skeleton: ClipSkeleton, pose: Pose): FkResult {
  const positions: Record<string, Vec3> = {};
  const worldRot: Record<string, Mat3> = {};
  const byName = new Map(skeleton.joints.map((j) => [j.name, j]));
  const children = new Map<string | null, string[]>();
  for (const joint of skeleton.joints) {
    const siblings = children.get(joint.parent) ?? [];
    siblings.push(joint.name);
    children.set(joint.parent, siblings);
  }
  const roots = children.get(null) ?? [];
  if (roots.length !== 1) {
    throw new Error("skeleton must have exactly one root");
  }
  const queue = [roots[0]];
  while (queue.length > 0) {
    const name = queue.shift() as string;
    const joint = byName.get(name);
    if (!joint) continue;
    const angles = pose.rotations[name] ?? ([0, 0, 0] as Vec3);
    const local = localRotation(joint.orientation, angles);
    if (joint.parent === null) {
      positions[name] = [
        pose.rootTranslation[0] + joint.offset[0],
        pose.rootTranslation[1] + joint.offset[1],
        pose.rootTranslation[2] + joint.offset[2],
      ];
      worldRot[name] = local;
    } else {
      const parentPos = positions[joint.parent];
      const parentRot = worldRot[joint.parent];
      const moved = matVec(parentRot, joint.offset);
      positions[name] = [
        parentPos[0] + moved[0],
        parentPos[1] + moved[1],
        parentPos[2] + moved[2],
      ];
      worldRot[name] = matMul(parentRot, local);
    }
    for (const child of children.get(name) ?? []) {
      queue.push(child);
    }
  }
  const endSites: Record<string, Vec3> = {};
  for (const [joint, offset] of Object.entries(skeleton.end_sites)) {
    const moved = matVec(worldRot[joint] ?? IDENTITY, offset);
    const base = positions[joint];
    endSites[joint] = [base[0] + moved[0], base[1] + moved[1], base[2] + moved[2]];
  }
  return { positions, endSites };
}
