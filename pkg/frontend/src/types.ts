/**
 * Wire types shared with the metis service.
 *
 * ScenarioDoc mirrors the canonical JSON the server emits: same field
 * names, same nesting. The editor keeps a working copy of this shape so
 * a save/reload round trip is a structural no-op.
 */

export type Vec2 = [number, number];

/** Axis-aligned rectangle as [x0, z0, x1, z1], corners unordered. */
export type Rect = [number, number, number, number];

export interface WallDoc {
  a: Vec2;
  b: Vec2;
  thickness: number;
}

export interface DoorDoc {
  wall_index: number;
  center: Vec2;
  width: number;
  exit: boolean;
  open: boolean;
}

export interface ObstacleDoc {
  kind: string;
  rect?: Rect;
  /** [cx, cz, radius] */
  circle?: [number, number, number];
}

export interface SafeAreaDoc {
  region: Rect;
}

export interface SpawnAreaDoc {
  region: Rect;
  order: number;
}

export interface PedestrianTypeDoc {
  name: string;
  speed: number;
  radius: number;
  color: string;
  health: number;
}

export interface PedestrianDoc {
  type: string;
  position: Vec2;
}

export interface FireSourceDoc {
  origin: Vec2;
  max_radius: number;
  growth_rate: number;
  patch_rate: number;
  ignition_tick: number;
}

export interface FireConfigDoc {
  growth_interval: number;
  patch_radius: number;
  damage_rate: number;
}

export interface ScenarioDoc {
  metis_scenario_version: number;
  id: string;
  name: string;
  walls: WallDoc[];
  doors: DoorDoc[];
  obstacles: ObstacleDoc[];
  safe_areas: SafeAreaDoc[];
  spawn_areas: SpawnAreaDoc[];
  pedestrian_types: PedestrianTypeDoc[];
  pedestrians: PedestrianDoc[];
  fire_sources: FireSourceDoc[];
  fire: FireConfigDoc;
}

export const SCENARIO_SCHEMA_VERSION = 1;

export const OBSTACLE_KINDS = ["desk", "cabinet", "shelf", "plant", "generic"] as const;

/** One finding from server-side scenario validation. */
export interface ValidationIssue {
  code: string;
  entity: string;
  detail: string;
}

// --- simulation wire types ---

export type AgentStatus = "active" | "safe" | "dead";

export interface FrameAgent {
  id: number;
  x: number;
  z: number;
  status: AgentStatus;
}

export interface FireDisc {
  x: number;
  z: number;
  r: number;
}

export interface StreamFrame {
  tick: number;
  agents: FrameAgent[];
  fires: FireDisc[];
  totals: { safe: number; dead: number; active: number };
}

export interface SimResults {
  total: number;
  survived: number;
  died: number;
  unresolved: number;
  elapsed_ticks: number;
  end_reason: string;
}

export interface EndedMessage {
  event: "ended";
  results: SimResults;
}

export interface CreateSimulationRequest {
  scenario_id: string;
  seed?: number;
  speed?: number;
  end_conditions?: string[];
  policy?: string;
}

export interface InjectFireRequest {
  origin: Vec2;
  max_radius?: number;
  growth_rate?: number;
  patch_rate?: number;
}

export type ControlAction = "start" | "pause" | "resume" | "stop";

/** End-condition kinds understood by the service, for the settings dialog. */
export const END_CONDITION_KINDS = [
  "all_resolved",
  "count_safe",
  "count_dead",
  "time_limit",
] as const;
