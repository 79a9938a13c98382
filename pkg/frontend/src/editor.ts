/**
 * In-browser scenario editing session.
 *
 * Holds a working mirror of the canonical scenario document plus tool
 * state, an undo history, and a dirty flag. All geometry edits snap with
 * the same rules the server uses, so what the preview shows is what the
 * stored scenario will contain.
 *
 * The session never talks to a socket and touches the gateway only in
 * save/reload, which keeps every gesture unit-testable.
 */

import { GatewayClient } from "./api.js";
import { edgeSnap, gridSnap, projectPointSegment } from "./snap.js";
import type {
  DoorDoc,
  ObstacleDoc,
  Rect,
  ScenarioDoc,
  ValidationIssue,
  Vec2,
} from "./types.js";
import { OBSTACLE_KINDS, SCENARIO_SCHEMA_VERSION } from "./types.js";

export type SnapMode = "grid" | "edge";

export type Tool =
  | { kind: "select" }
  | { kind: "wall" }
  | { kind: "door" }
  | { kind: "object"; object: string }
  | { kind: "pedestrian"; type: string }
  | { kind: "fire" }
  | { kind: "safe_area" }
  | { kind: "spawn_area" }
  | { kind: "grab" };

export type EntityKind =
  | "wall"
  | "door"
  | "obstacle"
  | "pedestrian"
  | "fire"
  | "safe_area"
  | "spawn_area";

export interface Hit {
  kind: EntityKind;
  index: number;
}

export interface PlaceResult {
  ok: boolean;
  reason?: string;
}

export interface SaveResult {
  ok: boolean;
  issues: ValidationIssue[];
}

export type StrokePreview =
  | { kind: "wall"; a: Vec2; b: Vec2 }
  | { kind: "region"; tool: "safe_area" | "spawn_area"; rect: Rect }
  | null;

export const WALL_THICKNESS = 0.2;
export const DOOR_WIDTH = 1.2;
/** How far a door-tool click may land from a wall and still attach. */
export const DOOR_ATTACH_TOLERANCE = 0.5;
export const UNDO_LIMIT = 100;

const RECT_FOOTPRINTS: Record<string, [number, number]> = {
  desk: [1.5, 0.8],
  cabinet: [0.9, 0.5],
  shelf: [1.8, 0.4],
  generic: [1.0, 1.0],
};
const PLANT_RADIUS = 0.35;

const FIRE_DEFAULTS = {
  max_radius: 3.0,
  growth_rate: 0.25,
  patch_rate: 3,
  ignition_tick: 0,
};

type Stroke =
  | { kind: "wall"; start: Vec2; end: Vec2 }
  | { kind: "region"; tool: "safe_area" | "spawn_area"; start: Vec2; end: Vec2 }
  | { kind: "grab"; hit: Hit; last: Vec2; snapshot: string };

/** Fresh document with one default pedestrian type and stock fire physics. */
export function emptyScenario(id: string, name: string = id): ScenarioDoc {
  return {
    metis_scenario_version: SCENARIO_SCHEMA_VERSION,
    id,
    name,
    walls: [],
    doors: [],
    obstacles: [],
    safe_areas: [],
    spawn_areas: [],
    pedestrian_types: [
      { name: "adult", speed: 3.0, radius: 0.25, color: "#3A7BD5", health: 100.0 },
    ],
    pedestrians: [],
    fire_sources: [],
    fire: { growth_interval: 1.0, patch_radius: 0.5, damage_rate: 50.0 },
  };
}

/** Case-insensitive substring filter over the obstacle palette. */
export function filterObstacleKinds(query: string): string[] {
  const q = query.trim().toLowerCase();
  return OBSTACLE_KINDS.filter((k) => k.includes(q));
}

export class EditorSession {
  doc: ScenarioDoc;
  tool: Tool = { kind: "select" };
  snapMode: SnapMode = "grid";
  dirty = false;
  selection: Hit | null = null;
  private undoStack: string[] = [];
  private stroke: Stroke | null = null;

  constructor(doc: ScenarioDoc) {
    this.doc = doc;
  }

  static async open(client: GatewayClient, sid: string): Promise<EditorSession> {
    return new EditorSession(
      JSON.parse(await client.getScenarioText(sid)) as ScenarioDoc,
    );
  }

  setTool(tool: Tool): void {
    this.stroke = null;
    this.tool = tool;
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  snapPoint(p: Vec2): Vec2 {
    return this.snapMode === "edge" ? edgeSnap(p, this.doc) : gridSnap(p);
  }

  private pushUndo(snapshot?: string): void {
    this.undoStack.push(snapshot ?? JSON.stringify(this.doc));
    if (this.undoStack.length > UNDO_LIMIT) this.undoStack.shift();
    this.dirty = true;
  }

  /** Restore the previous committed state. Returns false on empty history. */
  undo(): boolean {
    const snapshot = this.undoStack.pop();
    if (snapshot === undefined) return false;
    this.doc = JSON.parse(snapshot) as ScenarioDoc;
    this.selection = null;
    this.dirty = true;
    return true;
  }

  // -- drag gestures (wall, regions, grab) --------------------------------

  beginStroke(p: Vec2): void {
    const t = this.tool.kind;
    if (t === "wall") {
      const start = this.snapPoint(p);
      this.stroke = { kind: "wall", start, end: start };
    } else if (t === "safe_area" || t === "spawn_area") {
      const start = this.snapPoint(p);
      this.stroke = { kind: "region", tool: t, start, end: start };
    } else if (t === "grab") {
      const hit = this.hitTest(p);
      if (hit) {
        this.stroke = { kind: "grab", hit, last: p, snapshot: JSON.stringify(this.doc) };
        this.selection = hit;
      }
    }
  }

  updateStroke(p: Vec2): void {
    const s = this.stroke;
    if (!s) return;
    if (s.kind === "wall" || s.kind === "region") {
      s.end = this.snapPoint(p);
    } else {
      // grab drags live, unsnapped; the commit snaps once at the end
      this.translateEntity(s.hit, [p[0] - s.last[0], p[1] - s.last[1]]);
      s.last = p;
    }
  }

  endStroke(p: Vec2): PlaceResult {
    const s = this.stroke;
    this.stroke = null;
    if (!s) return { ok: false, reason: "no stroke in progress" };
    if (s.kind === "wall") {
      const end = this.snapPoint(p);
      if (Math.hypot(end[0] - s.start[0], end[1] - s.start[1]) < 1e-9) {
        return { ok: false, reason: "zero-length wall" };
      }
      this.pushUndo();
      this.doc.walls.push({ a: s.start, b: end, thickness: WALL_THICKNESS });
      return { ok: true };
    }
    if (s.kind === "region") {
      const end = this.snapPoint(p);
      const rect = normalizeRect(s.start, end);
      if (rect[2] - rect[0] < 1e-9 || rect[3] - rect[1] < 1e-9) {
        return { ok: false, reason: "zero-area region" };
      }
      this.pushUndo();
      if (s.tool === "safe_area") {
        this.doc.safe_areas.push({ region: rect });
      } else {
        const next = this.doc.spawn_areas.reduce((m, a) => Math.max(m, a.order), 0) + 1;
        this.doc.spawn_areas.push({ region: rect, order: next });
      }
      return { ok: true };
    }
    this.updateStroke(p);
    this.snapEntity(s.hit);
    this.pushUndo(s.snapshot);
    return { ok: true };
  }

  /** The in-flight wall or region, for the canvas to draw as a ghost. */
  previewStroke(): StrokePreview {
    const s = this.stroke;
    if (!s) return null;
    if (s.kind === "wall") return { kind: "wall", a: s.start, b: s.end };
    if (s.kind === "region") {
      return { kind: "region", tool: s.tool, rect: normalizeRect(s.start, s.end) };
    }
    return null;
  }

  // -- click placement ----------------------------------------------------

  click(p: Vec2): PlaceResult {
    const tool = this.tool;
    switch (tool.kind) {
      case "door":
        return this.placeDoor(p);
      case "object":
        return this.placeObject(p, tool.object);
      case "pedestrian":
        return this.placePedestrian(p, tool.type);
      case "fire":
        return this.placeFire(p);
      case "select": {
        this.selection = this.hitTest(p);
        return { ok: this.selection !== null };
      }
      default:
        return { ok: false, reason: `tool ${tool.kind} does not place on click` };
    }
  }

  /** Attach a door to the nearest wall; off-wall clicks commit nothing. */
  placeDoor(p: Vec2, width: number = DOOR_WIDTH): PlaceResult {
    let best: { wallIndex: number; center: Vec2 } | null = null;
    let bestDist = DOOR_ATTACH_TOLERANCE;
    for (let i = 0; i < this.doc.walls.length; i++) {
      const w = this.doc.walls[i];
      const { q, dist } = projectPointSegment(p, w.a, w.b);
      if (dist <= bestDist) {
        best = { wallIndex: i, center: q };
        bestDist = dist;
      }
    }
    if (!best) {
      return { ok: false, reason: `no wall within ${DOOR_ATTACH_TOLERANCE} m` };
    }
    this.pushUndo();
    this.doc.doors.push({
      wall_index: best.wallIndex,
      center: best.center,
      width,
      exit: false,
      open: true,
    });
    return { ok: true };
  }

  placeObject(p: Vec2, kind: string): PlaceResult {
    const c = this.snapPoint(p);
    let obstacle: ObstacleDoc;
    if (kind === "plant") {
      obstacle = { kind, circle: [c[0], c[1], PLANT_RADIUS] };
    } else {
      const [w, h] = RECT_FOOTPRINTS[kind] ?? RECT_FOOTPRINTS.generic;
      obstacle = {
        kind,
        rect: [c[0] - w / 2, c[1] - h / 2, c[0] + w / 2, c[1] + h / 2],
      };
    }
    this.pushUndo();
    this.doc.obstacles.push(obstacle);
    return { ok: true };
  }

  placePedestrian(p: Vec2, type: string): PlaceResult {
    this.pushUndo();
    if (!this.doc.pedestrian_types.some((t) => t.name === type)) {
      this.doc.pedestrian_types.push({
        name: type,
        speed: 3.0,
        radius: 0.25,
        color: "#3A7BD5",
        health: 100.0,
      });
    }
    this.doc.pedestrians.push({ type, position: this.snapPoint(p) });
    return { ok: true };
  }

  placeFire(p: Vec2): PlaceResult {
    this.pushUndo();
    this.doc.fire_sources.push({ origin: this.snapPoint(p), ...FIRE_DEFAULTS });
    return { ok: true };
  }

  /** Right-click handler: flips the exit flag of the door under the cursor. */
  toggleExitAt(p: Vec2): boolean {
    const hit = this.hitDoor(p);
    if (hit === null) return false;
    this.pushUndo();
    this.doc.doors[hit].exit = !this.doc.doors[hit].exit;
    return true;
  }

  deleteAt(p: Vec2): boolean {
    const hit = this.hitTest(p);
    if (!hit) return false;
    this.pushUndo();
    this.removeEntity(hit);
    this.selection = null;
    return true;
  }

  // -- hit testing --------------------------------------------------------

  hitTest(p: Vec2): Hit | null {
    for (let i = this.doc.pedestrians.length - 1; i >= 0; i--) {
      const q = this.doc.pedestrians[i].position;
      if (Math.hypot(p[0] - q[0], p[1] - q[1]) <= 0.35) {
        return { kind: "pedestrian", index: i };
      }
    }
    for (let i = this.doc.fire_sources.length - 1; i >= 0; i--) {
      const q = this.doc.fire_sources[i].origin;
      if (Math.hypot(p[0] - q[0], p[1] - q[1]) <= 0.45) {
        return { kind: "fire", index: i };
      }
    }
    const door = this.hitDoor(p);
    if (door !== null) return { kind: "door", index: door };
    for (let i = this.doc.obstacles.length - 1; i >= 0; i--) {
      const o = this.doc.obstacles[i];
      if (o.rect) {
        const [x0, z0, x1, z1] = o.rect;
        if (p[0] >= x0 - 0.1 && p[0] <= x1 + 0.1 && p[1] >= z0 - 0.1 && p[1] <= z1 + 0.1) {
          return { kind: "obstacle", index: i };
        }
      } else if (o.circle) {
        const [cx, cz, r] = o.circle;
        if (Math.hypot(p[0] - cx, p[1] - cz) <= r + 0.1) {
          return { kind: "obstacle", index: i };
        }
      }
    }
    for (let i = this.doc.spawn_areas.length - 1; i >= 0; i--) {
      if (inRect(p, this.doc.spawn_areas[i].region)) return { kind: "spawn_area", index: i };
    }
    for (let i = this.doc.safe_areas.length - 1; i >= 0; i--) {
      if (inRect(p, this.doc.safe_areas[i].region)) return { kind: "safe_area", index: i };
    }
    for (let i = this.doc.walls.length - 1; i >= 0; i--) {
      const w = this.doc.walls[i];
      const { dist } = projectPointSegment(p, w.a, w.b);
      if (dist <= w.thickness / 2 + 0.15) return { kind: "wall", index: i };
    }
    return null;
  }

  private hitDoor(p: Vec2): number | null {
    for (let i = this.doc.doors.length - 1; i >= 0; i--) {
      const d = this.doc.doors[i];
      const radius = Math.max(0.4, d.width / 2);
      if (Math.hypot(p[0] - d.center[0], p[1] - d.center[1]) <= radius) return i;
    }
    return null;
  }

  // -- entity movement ----------------------------------------------------

  private translateEntity(hit: Hit, delta: Vec2): void {
    const [dx, dz] = delta;
    const doc = this.doc;
    switch (hit.kind) {
      case "pedestrian": {
        const q = doc.pedestrians[hit.index].position;
        doc.pedestrians[hit.index].position = [q[0] + dx, q[1] + dz];
        break;
      }
      case "fire": {
        const q = doc.fire_sources[hit.index].origin;
        doc.fire_sources[hit.index].origin = [q[0] + dx, q[1] + dz];
        break;
      }
      case "door": {
        // doors slide along their wall, never off it
        const d = doc.doors[hit.index];
        const w = doc.walls[d.wall_index];
        if (!w) break;
        const target: Vec2 = [d.center[0] + dx, d.center[1] + dz];
        d.center = projectPointSegment(target, w.a, w.b).q;
        break;
      }
      case "obstacle": {
        const o = doc.obstacles[hit.index];
        if (o.rect) {
          o.rect = [o.rect[0] + dx, o.rect[1] + dz, o.rect[2] + dx, o.rect[3] + dz];
        } else if (o.circle) {
          o.circle = [o.circle[0] + dx, o.circle[1] + dz, o.circle[2]];
        }
        break;
      }
      case "wall": {
        const w = doc.walls[hit.index];
        w.a = [w.a[0] + dx, w.a[1] + dz];
        w.b = [w.b[0] + dx, w.b[1] + dz];
        for (const d of doc.doors) {
          if (d.wall_index === hit.index) {
            d.center = [d.center[0] + dx, d.center[1] + dz];
          }
        }
        break;
      }
      case "safe_area": {
        const r = doc.safe_areas[hit.index].region;
        doc.safe_areas[hit.index].region = [r[0] + dx, r[1] + dz, r[2] + dx, r[3] + dz];
        break;
      }
      case "spawn_area": {
        const r = doc.spawn_areas[hit.index].region;
        doc.spawn_areas[hit.index].region = [r[0] + dx, r[1] + dz, r[2] + dx, r[3] + dz];
        break;
      }
    }
  }

  /** Settle a grabbed entity onto the grid without distorting its shape. */
  private snapEntity(hit: Hit): void {
    const doc = this.doc;
    switch (hit.kind) {
      case "pedestrian": {
        const q = doc.pedestrians[hit.index].position;
        doc.pedestrians[hit.index].position = this.snapPoint(q);
        break;
      }
      case "fire": {
        const q = doc.fire_sources[hit.index].origin;
        doc.fire_sources[hit.index].origin = this.snapPoint(q);
        break;
      }
      case "door":
        // already projected onto its wall during the drag
        break;
      case "obstacle": {
        const o = doc.obstacles[hit.index];
        if (o.rect) {
          const snapped = gridSnap([o.rect[0], o.rect[1]]);
          const dx = snapped[0] - o.rect[0];
          const dz = snapped[1] - o.rect[1];
          o.rect = [o.rect[0] + dx, o.rect[1] + dz, o.rect[2] + dx, o.rect[3] + dz];
        } else if (o.circle) {
          const c = gridSnap([o.circle[0], o.circle[1]]);
          o.circle = [c[0], c[1], o.circle[2]];
        }
        break;
      }
      case "wall": {
        const w = doc.walls[hit.index];
        const snapped = gridSnap(w.a);
        const dx = snapped[0] - w.a[0];
        const dz = snapped[1] - w.a[1];
        this.translateEntity(hit, [dx, dz]);
        break;
      }
      case "safe_area":
      case "spawn_area": {
        const r =
          hit.kind === "safe_area"
            ? doc.safe_areas[hit.index].region
            : doc.spawn_areas[hit.index].region;
        const snapped = gridSnap([r[0], r[1]]);
        this.translateEntity(hit, [snapped[0] - r[0], snapped[1] - r[1]]);
        break;
      }
    }
  }

  private removeEntity(hit: Hit): void {
    const doc = this.doc;
    switch (hit.kind) {
      case "pedestrian":
        doc.pedestrians.splice(hit.index, 1);
        break;
      case "fire":
        doc.fire_sources.splice(hit.index, 1);
        break;
      case "door":
        doc.doors.splice(hit.index, 1);
        break;
      case "obstacle":
        doc.obstacles.splice(hit.index, 1);
        break;
      case "safe_area":
        doc.safe_areas.splice(hit.index, 1);
        break;
      case "spawn_area":
        doc.spawn_areas.splice(hit.index, 1);
        break;
      case "wall": {
        // doors referencing later walls shift down one index
        doc.walls.splice(hit.index, 1);
        doc.doors = doc.doors.filter((d) => d.wall_index !== hit.index);
        for (const d of doc.doors) {
          if (d.wall_index > hit.index) d.wall_index -= 1;
        }
        break;
      }
    }
  }

  // -- persistence --------------------------------------------------------

  /**
   * Store the working document through the gateway.
   *
   * The doc is first written under a scratch id and validated there, so a
   * failing save never replaces the stored scenario. With issues present
   * the save is refused unless override is set. On success the mirror is
   * replaced by the server's canonical form and the dirty flag clears.
   */
  async save(client: GatewayClient, opts: { override?: boolean } = {}): Promise<SaveResult> {
    const draftId = this.doc.id.length <= 58 ? `${this.doc.id}.draft` : "editor.draft";
    await client.putScenario(draftId, this.doc);
    let issues: ValidationIssue[];
    try {
      issues = await client.validateScenario(draftId);
    } finally {
      await client.deleteScenario(draftId).catch(() => undefined);
    }
    if (issues.length > 0 && !opts.override) {
      return { ok: false, issues };
    }
    await client.putScenario(this.doc.id, this.doc);
    this.doc = JSON.parse(await client.getScenarioText(this.doc.id)) as ScenarioDoc;
    this.dirty = false;
    return { ok: true, issues };
  }

  /** Discard local state and re-read the stored scenario. */
  async reload(client: GatewayClient): Promise<void> {
    this.doc = JSON.parse(await client.getScenarioText(this.doc.id)) as ScenarioDoc;
    this.selection = null;
    this.dirty = false;
  }
}

// -- helpers --------------------------------------------------------------

function normalizeRect(a: Vec2, b: Vec2): Rect {
  return [
    Math.min(a[0], b[0]),
    Math.min(a[1], b[1]),
    Math.max(a[0], b[0]),
    Math.max(a[1], b[1]),
  ];
}

function inRect(p: Vec2, r: Rect): boolean {
  return p[0] >= r[0] && p[0] <= r[2] && p[1] >= r[1] && p[1] <= r[3];
}

function round9(x: number): number {
  return Math.round(x * 1e9) / 1e9;
}

function canon(value: unknown): unknown {
  if (typeof value === "number") return round9(value);
  if (Array.isArray(value)) return value.map(canon);
  if (value && typeof value === "object") {
    const out: Record<string, unknown> = {};
    for (const k of Object.keys(value as object).sort()) {
      out[k] = canon((value as Record<string, unknown>)[k]);
    }
    return out;
  }
  return value;
}

function entityKey(e: unknown): string {
  return JSON.stringify(canon(e));
}

function sameSet(a: unknown[], b: unknown[]): boolean {
  if (a.length !== b.length) return false;
  const ka = a.map(entityKey).sort();
  const kb = b.map(entityKey).sort();
  return ka.every((k, i) => k === kb[i]);
}

/**
 * Order-insensitive structural equality between two scenario documents.
 *
 * Doors compare by the wall they sit on rather than the raw index, so two
 * docs whose walls were recorded in different orders still match when the
 * geometry agrees. Numbers are rounded to 9 decimals.
 */
export function scenariosEqual(
  a: ScenarioDoc,
  b: ScenarioDoc,
  opts: { ignoreIdentity?: boolean } = {},
): boolean {
  if (!opts.ignoreIdentity && (a.id !== b.id || a.name !== b.name)) return false;
  if (a.metis_scenario_version !== b.metis_scenario_version) return false;
  const doorKeys = (doc: ScenarioDoc) =>
    doc.doors.map((d: DoorDoc) =>
      JSON.stringify([
        canon(doc.walls[d.wall_index] ?? d.wall_index),
        canon([d.center, d.width, d.exit, d.open]),
      ]),
    );
  return (
    sameSet(a.walls, b.walls) &&
    sameSet(doorKeys(a), doorKeys(b)) &&
    sameSet(a.obstacles, b.obstacles) &&
    sameSet(a.safe_areas, b.safe_areas) &&
    sameSet(a.spawn_areas, b.spawn_areas) &&
    sameSet(a.pedestrian_types, b.pedestrian_types) &&
    sameSet(a.pedestrians, b.pedestrians) &&
    sameSet(a.fire_sources, b.fire_sources) &&
    entityKey(a.fire) === entityKey(b.fire)
  );
}
