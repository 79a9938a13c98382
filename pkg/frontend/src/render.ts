/**
 * Top-down 2D painter for the plan view and the live run overlay.
 *
 * Everything here is a pure function of (drawing surface, data, view), so
 * the suite can render into a recording fake. None of the live-run
 * drawing derives state: agents, discs, and totals come straight off the
 * last gateway frame.
 */

import type { Hit, StrokePreview } from "./editor.js";
import type { ScenarioDoc, StreamFrame, Vec2 } from "./types.js";

/** Structural subset of CanvasRenderingContext2D the painter needs. */
export interface Draw2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  fill(): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
}

/** World-to-screen mapping: scale in px per meter, offsets in px. */
export interface View {
  scale: number;
  ox: number;
  oz: number;
  widthPx: number;
  heightPx: number;
}

export function worldToScreen(view: View, p: Vec2): Vec2 {
  return [view.ox + p[0] * view.scale, view.oz + p[1] * view.scale];
}

export function screenToWorld(view: View, p: Vec2): Vec2 {
  return [(p[0] - view.ox) / view.scale, (p[1] - view.oz) / view.scale];
}

/** View that fits the scenario's extent into a pixel rectangle. */
export function fitView(doc: ScenarioDoc, widthPx: number, heightPx: number): View {
  let lo: Vec2 = [Infinity, Infinity];
  let hi: Vec2 = [-Infinity, -Infinity];
  const grow = (x: number, z: number) => {
    lo = [Math.min(lo[0], x), Math.min(lo[1], z)];
    hi = [Math.max(hi[0], x), Math.max(hi[1], z)];
  };
  for (const w of doc.walls) {
    grow(w.a[0], w.a[1]);
    grow(w.b[0], w.b[1]);
  }
  for (const a of [...doc.safe_areas, ...doc.spawn_areas]) {
    grow(a.region[0], a.region[1]);
    grow(a.region[2], a.region[3]);
  }
  for (const o of doc.obstacles) {
    if (o.rect) {
      grow(o.rect[0], o.rect[1]);
      grow(o.rect[2], o.rect[3]);
    } else if (o.circle) {
      grow(o.circle[0] - o.circle[2], o.circle[1] - o.circle[2]);
      grow(o.circle[0] + o.circle[2], o.circle[1] + o.circle[2]);
    }
  }
  for (const p of doc.pedestrians) grow(p.position[0], p.position[1]);
  for (const f of doc.fire_sources) grow(f.origin[0], f.origin[1]);
  if (!Number.isFinite(lo[0])) {
    lo = [0, 0];
    hi = [10, 10];
  }
  const pad = 1.0;
  const w = hi[0] - lo[0] + 2 * pad;
  const h = hi[1] - lo[1] + 2 * pad;
  const scale = Math.min(widthPx / w, heightPx / h);
  return {
    scale,
    ox: (widthPx - (hi[0] + lo[0]) * scale) / 2,
    oz: (heightPx - (hi[1] + lo[1]) * scale) / 2,
    widthPx,
    heightPx,
  };
}

const COLORS = {
  background: "#FAFAF7",
  grid: "#E4E4DC",
  wall: "#3B3B3B",
  doorOpen: "#7A5C36",
  doorClosed: "#4A4A42",
  exit: "#C83232",
  obstacle: "#8A8A82",
  plant: "#3F7A3F",
  safe: "#2E8B57",
  spawn: "#3A6EA5",
  fireSource: "#D9641E",
  preview: "#888888",
  selection: "#1E66D0",
  agentActive: "#3A7BD5",
  agentSafe: "#2E8B57",
  agentDead: "#2B2B2B",
  fire: "#E85D1F",
};

function disc(ctx: Draw2D, view: View, center: Vec2, radiusM: number): void {
  const [x, y] = worldToScreen(view, center);
  ctx.beginPath();
  ctx.arc(x, y, Math.max(1, radiusM * view.scale), 0, Math.PI * 2);
}

function rectPath(ctx: Draw2D, view: View, r: [number, number, number, number]): void {
  const [x0, y0] = worldToScreen(view, [r[0], r[1]]);
  const [x1, y1] = worldToScreen(view, [r[2], r[3]]);
  ctx.beginPath();
  ctx.rect(x0, y0, x1 - x0, y1 - y0);
}

export function drawScenario(
  ctx: Draw2D,
  doc: ScenarioDoc,
  view: View,
  opts: { preview?: StrokePreview; selection?: Hit | null } = {},
): void {
  ctx.globalAlpha = 1;
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, view.widthPx, view.heightPx);

  // half-meter grid, matching the snap pitch
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  const topLeft = screenToWorld(view, [0, 0]);
  const bottomRight = screenToWorld(view, [view.widthPx, view.heightPx]);
  for (let x = Math.ceil(topLeft[0] / 0.5) * 0.5; x <= bottomRight[0]; x += 0.5) {
    const [sx] = worldToScreen(view, [x, 0]);
    ctx.beginPath();
    ctx.moveTo(sx, 0);
    ctx.lineTo(sx, view.heightPx);
    ctx.stroke();
  }
  for (let z = Math.ceil(topLeft[1] / 0.5) * 0.5; z <= bottomRight[1]; z += 0.5) {
    const [, sz] = worldToScreen(view, [0, z]);
    ctx.beginPath();
    ctx.moveTo(0, sz);
    ctx.lineTo(view.widthPx, sz);
    ctx.stroke();
  }

  ctx.globalAlpha = 0.25;
  ctx.fillStyle = COLORS.safe;
  for (const a of doc.safe_areas) {
    rectPath(ctx, view, a.region);
    ctx.fill();
  }
  ctx.fillStyle = COLORS.spawn;
  for (const a of doc.spawn_areas) {
    rectPath(ctx, view, a.region);
    ctx.fill();
  }
  ctx.globalAlpha = 1;
  ctx.fillStyle = COLORS.spawn;
  for (const a of doc.spawn_areas) {
    const [x, y] = worldToScreen(view, [a.region[0], a.region[1]]);
    ctx.font = "12px sans-serif";
    ctx.fillText(String(a.order), x + 4, y + 14);
  }

  for (const o of doc.obstacles) {
    ctx.fillStyle = o.kind === "plant" ? COLORS.plant : COLORS.obstacle;
    if (o.rect) {
      rectPath(ctx, view, o.rect);
      ctx.fill();
    } else if (o.circle) {
      disc(ctx, view, [o.circle[0], o.circle[1]], o.circle[2]);
      ctx.fill();
    }
  }

  ctx.strokeStyle = COLORS.wall;
  for (const w of doc.walls) {
    ctx.lineWidth = Math.max(2, w.thickness * view.scale);
    const [ax, ay] = worldToScreen(view, w.a);
    const [bx, by] = worldToScreen(view, w.b);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
  }

  for (const d of doc.doors) {
    ctx.fillStyle = d.exit ? COLORS.exit : d.open ? COLORS.doorOpen : COLORS.doorClosed;
    disc(ctx, view, d.center, Math.max(0.25, d.width / 2) * 0.6);
    ctx.fill();
  }

  const typeColor = new Map(doc.pedestrian_types.map((t) => [t.name, t.color]));
  for (const p of doc.pedestrians) {
    ctx.fillStyle = typeColor.get(p.type) ?? COLORS.agentActive;
    disc(ctx, view, p.position, 0.25);
    ctx.fill();
  }

  for (const f of doc.fire_sources) {
    ctx.fillStyle = COLORS.fireSource;
    disc(ctx, view, f.origin, 0.3);
    ctx.fill();
    ctx.globalAlpha = 0.3;
    ctx.strokeStyle = COLORS.fireSource;
    ctx.lineWidth = 1;
    disc(ctx, view, f.origin, f.max_radius);
    ctx.stroke();
    ctx.globalAlpha = 1;
  }

  const preview = opts.preview;
  if (preview) {
    ctx.strokeStyle = COLORS.preview;
    if (preview.kind === "wall") {
      ctx.lineWidth = Math.max(2, 0.2 * view.scale);
      const [ax, ay] = worldToScreen(view, preview.a);
      const [bx, by] = worldToScreen(view, preview.b);
      ctx.beginPath();
      ctx.moveTo(ax, ay);
      ctx.lineTo(bx, by);
      ctx.stroke();
    } else {
      ctx.lineWidth = 1;
      rectPath(ctx, view, preview.rect);
      ctx.stroke();
    }
  }

  const sel = opts.selection;
  if (sel) {
    const marker = selectionMarker(doc, sel);
    if (marker) {
      ctx.strokeStyle = COLORS.selection;
      ctx.lineWidth = 2;
      disc(ctx, view, marker, 0.45);
      ctx.stroke();
    }
  }
}

function selectionMarker(doc: ScenarioDoc, hit: Hit): Vec2 | null {
  switch (hit.kind) {
    case "pedestrian":
      return doc.pedestrians[hit.index]?.position ?? null;
    case "fire":
      return doc.fire_sources[hit.index]?.origin ?? null;
    case "door":
      return doc.doors[hit.index]?.center ?? null;
    case "obstacle": {
      const o = doc.obstacles[hit.index];
      if (!o) return null;
      if (o.rect) return [(o.rect[0] + o.rect[2]) / 2, (o.rect[1] + o.rect[3]) / 2];
      if (o.circle) return [o.circle[0], o.circle[1]];
      return null;
    }
    case "wall": {
      const w = doc.walls[hit.index];
      return w ? [(w.a[0] + w.b[0]) / 2, (w.a[1] + w.b[1]) / 2] : null;
    }
    case "safe_area": {
      const r = doc.safe_areas[hit.index]?.region;
      return r ? [(r[0] + r[2]) / 2, (r[1] + r[3]) / 2] : null;
    }
    case "spawn_area": {
      const r = doc.spawn_areas[hit.index]?.region;
      return r ? [(r[0] + r[2]) / 2, (r[1] + r[3]) / 2] : null;
    }
  }
}

const AGENT_COLOR: Record<string, string> = {
  active: COLORS.agentActive,
  safe: COLORS.agentSafe,
  dead: COLORS.agentDead,
};

/** Overlay one live frame: fire discs, agents by status, totals readout. */
export function drawFrame(ctx: Draw2D, frame: StreamFrame, view: View): void {
  ctx.globalAlpha = 0.45;
  ctx.fillStyle = COLORS.fire;
  for (const f of frame.fires) {
    disc(ctx, view, [f.x, f.z], f.r);
    ctx.fill();
  }
  ctx.globalAlpha = 1;
  for (const a of frame.agents) {
    ctx.fillStyle = AGENT_COLOR[a.status] ?? COLORS.agentActive;
    disc(ctx, view, [a.x, a.z], 0.25);
    ctx.fill();
  }
  ctx.fillStyle = "#222";
  ctx.font = "13px sans-serif";
  const t = frame.totals;
  ctx.fillText(
    `tick ${frame.tick}  safe ${t.safe}  dead ${t.dead}  active ${t.active}`,
    8,
    18,
  );
}
