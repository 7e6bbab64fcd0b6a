// Small vector kit plus the plane parameterization the controls use.
// The slider UI exposes two rotation angles; converting them to (u, v)
// here keeps every outgoing basis orthonormal by construction.

import type { PlaneGeometry, Vec3 } from "./protocol.js";

export function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function norm(a: Vec3): number {
  return Math.hypot(a[0], a[1], a[2]);
}

export function scale(a: Vec3, s: number): Vec3 {
  return [a[0] * s, a[1] * s, a[2] * s];
}

export function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function normalize(a: Vec3): Vec3 {
  const n = norm(a);
  if (n === 0) throw new Error("cannot normalize a zero vector");
  return scale(a, 1 / n);
}

/** Gram-Schmidt: returns an exactly orthonormal pair spanning (u, v). */
export function orthonormalize(u: Vec3, v: Vec3): [Vec3, Vec3] {
  const uu = normalize(u);
  const w = sub(v, scale(uu, dot(v, uu)));
  return [uu, normalize(w)];
}

export interface PlaneBasis {
  u: Vec3;
  v: Vec3;
  n: Vec3;
}

/**
 * Two-angle plane orientation: yaw rotates the normal in the xy plane,
 * pitch tilts it toward +z. yaw=0, pitch=90deg gives an axial plane with
 * u=+x, v=+y.
 */
export function anglesToBasis(yawDeg: number, pitchDeg: number): PlaneBasis {
  const yaw = (yawDeg * Math.PI) / 180;
  const pitch = (pitchDeg * Math.PI) / 180;
  const n: Vec3 = [
    Math.cos(pitch) * Math.cos(yaw),
    Math.cos(pitch) * Math.sin(yaw),
    Math.sin(pitch),
  ];
  // u: horizontal direction in the plane (n x z), falling back near the poles
  let u: Vec3;
  if (Math.abs(n[2]) > 0.999999) {
    u = [Math.cos(yaw), Math.sin(yaw), 0];
  } else {
    u = normalize(cross([0, 0, 1], n));
  }
  const v = cross(n, u);
  return { u, v, n };
}

/** Recover (yaw, pitch) in degrees from a plane basis; inverse of the above. */
export function basisToAngles(u: Vec3, v: Vec3): { yaw: number; pitch: number } {
  const n = cross(u, v);
  const pitch = (Math.asin(Math.max(-1, Math.min(1, n[2]))) * 180) / Math.PI;
  let yaw = (Math.atan2(n[1], n[0]) * 180) / Math.PI;
  if (Math.abs(n[2]) > 0.999999) {
    // normal is vertical: the yaw lives in u instead
    yaw = (Math.atan2(u[1], u[0]) * 180) / Math.PI;
  }
  return { yaw, pitch };
}

/** World position of the center of pixel (i, j) in a rendered frame. */
export function pixelToWorld(g: PlaneGeometry, i: number, j: number,
                             w: number, h: number): Vec3 {
  const a = ((i + 0.5) / w - 0.5) * 2 * g.hu;
  const b = (0.5 - (j + 0.5) / h) * 2 * g.hv;
  return add(g.center, add(scale(g.u, a), scale(g.v, b)));
}

export interface Ray {
  origin: Vec3;
  dir: Vec3;
}

/**
 * Pick ray for a canvas click: start a little in front of the pixel's
 * world point along the plane normal and aim back at it.
 */
export function pickRay(g: PlaneGeometry, i: number, j: number,
                        w: number, h: number, offset = 10): Ray {
  const p = pixelToWorld(g, i, j, w, h);
  const n = normalize(cross(g.u, g.v));
  return { origin: add(p, scale(n, offset)), dir: scale(n, -1) };
}
