/**
 * Client-side snapping, mirroring the server's semantics so a preview
 * drawn during a drag lands exactly where the saved scenario will.
 */

import type { ScenarioDoc, Vec2 } from "./types.js";

export const GRID_PITCH = 0.5;
export const SNAP_TOLERANCE = 0.25;

/** Round each coordinate to the nearest pitch multiple (half rounds up). */
export function gridSnap(p: Vec2, pitch: number = GRID_PITCH): Vec2 {
  return [
    Math.floor(p[0] / pitch + 0.5) * pitch,
    Math.floor(p[1] / pitch + 0.5) * pitch,
  ];
}

/** Closest point on segment ab to p, plus the distance to it. */
export function projectPointSegment(p: Vec2, a: Vec2, b: Vec2): { q: Vec2; dist: number } {
  const abx = b[0] - a[0];
  const abz = b[1] - a[1];
  const len2 = abx * abx + abz * abz;
  let t = 0;
  if (len2 > 0) {
    t = ((p[0] - a[0]) * abx + (p[1] - a[1]) * abz) / len2;
    t = Math.max(0, Math.min(1, t));
  }
  const q: Vec2 = [a[0] + t * abx, a[1] + t * abz];
  return { q, dist: Math.hypot(p[0] - q[0], p[1] - q[1]) };
}

/**
 * Project p onto the nearest wall centerline or obstacle boundary.
 * Returns p unchanged when no edge lies within tolerance.
 */
export function edgeSnap(
  p: Vec2,
  doc: ScenarioDoc,
  tolerance: number = SNAP_TOLERANCE,
): Vec2 {
  let best: Vec2 | null = null;
  let bestDist = tolerance;
  for (const w of doc.walls) {
    const { q, dist } = projectPointSegment(p, w.a, w.b);
    if (dist <= bestDist) {
      best = q;
      bestDist = dist;
    }
  }
  for (const o of doc.obstacles) {
    if (o.rect) {
      const [x0, z0, x1, z1] = o.rect;
      const edges: [Vec2, Vec2][] = [
        [[x0, z0], [x1, z0]],
        [[x1, z0], [x1, z1]],
        [[x1, z1], [x0, z1]],
        [[x0, z1], [x0, z0]],
      ];
      for (const [a, b] of edges) {
        const { q, dist } = projectPointSegment(p, a, b);
        if (dist <= bestDist) {
          best = q;
          bestDist = dist;
        }
      }
    } else if (o.circle) {
      const [cx, cz, r] = o.circle;
      const d = Math.hypot(p[0] - cx, p[1] - cz);
      const dist = Math.abs(d - r);
      if (dist <= bestDist && d > 1e-12) {
        best = [cx + ((p[0] - cx) * r) / d, cz + ((p[1] - cz) * r) / d];
        bestDist = dist;
      }
    }
  }
  return best ?? [p[0], p[1]];
}
