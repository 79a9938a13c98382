/**
 * Live run orchestration: create a simulation from the current scenario,
 * start it, subscribe to the frame stream, and forward user actions
 * (pause, resume, stop, click-to-inject) to the gateway.
 *
 * The console owns no simulation logic. It records what the service
 * says: the latest frame, the final results, acks and rejections for
 * injections. Injections are tracked until a streamed frame at or after
 * their effective tick shows a disc at the injected origin, which gives
 * the UI its "fire landed" confirmation and its latency readout.
 */

import { GatewayClient, GatewayError } from "./api.js";
import { StreamClient, type SocketFactory } from "./ws.js";
import type {
  SimResults,
  StreamFrame,
  ValidationIssue,
  Vec2,
} from "./types.js";

export type ConsoleStatus =
  | "idle"
  | "creating"
  | "running"
  | "paused"
  | "stopping"
  | "ended"
  | "error";

export interface PlayOptions {
  seed?: number;
  speed?: number;
  end_conditions?: string[];
  policy?: string;
}

export interface InjectionRecord {
  origin: Vec2;
  effectiveTick: number;
  /** Tick of the first frame whose fires include this origin; null until seen. */
  confirmedTick: number | null;
}

export interface ConsoleEvents {
  onFrame?: (frame: StreamFrame) => void;
  onEnded?: (results: SimResults) => void;
  onStatus?: (status: ConsoleStatus) => void;
}

export class RunConsole {
  status: ConsoleStatus = "idle";
  simId: string | null = null;
  lastFrame: StreamFrame | null = null;
  results: SimResults | null = null;
  /** Banner text when the gateway cannot be reached; null otherwise. */
  bannerError: string | null = null;
  /** Issues from the most recent rejected injection, for inline display. */
  injectionIssues: ValidationIssue[] = [];
  injections: InjectionRecord[] = [];
  private stream: StreamClient | null = null;

  constructor(
    private client: GatewayClient,
    private events: ConsoleEvents = {},
    private socketFactory?: SocketFactory,
  ) {}

  private setStatus(status: ConsoleStatus): void {
    this.status = status;
    this.events.onStatus?.(status);
  }

  private fail(e: unknown): void {
    this.bannerError =
      e instanceof GatewayError && e.unreachable
        ? "gateway unreachable"
        : String(e instanceof Error ? e.message : e);
    this.setStatus("error");
  }

  /** Probe /health again after a failure; clears the banner on success. */
  async retry(): Promise<boolean> {
    try {
      await this.client.health();
    } catch {
      return false;
    }
    this.bannerError = null;
    if (this.status === "error") this.setStatus("idle");
    return true;
  }

  /** Create, start, and subscribe. Resolves false with the banner set on failure. */
  async play(scenarioId: string, opts: PlayOptions = {}): Promise<boolean> {
    this.setStatus("creating");
    this.lastFrame = null;
    this.results = null;
    this.injections = [];
    this.injectionIssues = [];
    try {
      const sim = await this.client.createSimulation({
        scenario_id: scenarioId,
        ...opts,
      });
      this.simId = sim.id;
      this.stream = new StreamClient(
        this.client.streamUrl(sim.id),
        {
          onFrame: (f) => this.handleFrame(f),
          onEnded: (r) => {
            this.results = r;
            this.setStatus("ended");
            this.events.onEnded?.(r);
          },
        },
        this.socketFactory,
      );
      this.stream.connect();
      await this.client.control(sim.id, "start");
      this.setStatus("running");
      return true;
    } catch (e) {
      this.fail(e);
      return false;
    }
  }

  private handleFrame(frame: StreamFrame): void {
    this.lastFrame = frame;
    for (const inj of this.injections) {
      if (inj.confirmedTick !== null || frame.tick < inj.effectiveTick) continue;
      const seen = frame.fires.some(
        (d) => Math.hypot(d.x - inj.origin[0], d.z - inj.origin[1]) < 1e-6,
      );
      if (seen) inj.confirmedTick = frame.tick;
    }
    this.events.onFrame?.(frame);
  }

  async pause(): Promise<void> {
    if (!this.simId) return;
    try {
      await this.client.control(this.simId, "pause");
      this.setStatus("paused");
    } catch (e) {
      if (e instanceof GatewayError && !e.unreachable) return; // stale state, keep going
      this.fail(e);
    }
  }

  async resume(): Promise<void> {
    if (!this.simId) return;
    try {
      await this.client.control(this.simId, "resume");
      this.setStatus("running");
    } catch (e) {
      if (e instanceof GatewayError && !e.unreachable) return;
      this.fail(e);
    }
  }

  /** Request an end; the terminal stream message moves status to ended. */
  async stop(): Promise<void> {
    if (!this.simId) return;
    try {
      await this.client.control(this.simId, "stop");
      if (this.status !== "ended") this.setStatus("stopping");
    } catch (e) {
      if (e instanceof GatewayError && !e.unreachable) return;
      this.fail(e);
    }
  }

  /**
   * Click-to-inject. Returns the acked effective tick, or null when the
   * service rejected the fire (issues land in injectionIssues).
   */
  async inject(
    origin: Vec2,
    params: { max_radius?: number; growth_rate?: number; patch_rate?: number } = {},
  ): Promise<number | null> {
    if (!this.simId) return null;
    this.injectionIssues = [];
    try {
      const ack = await this.client.injectFire(this.simId, { origin, ...params });
      this.injections.push({
        origin,
        effectiveTick: ack.effective_tick,
        confirmedTick: null,
      });
      return ack.effective_tick;
    } catch (e) {
      if (e instanceof GatewayError) {
        if (e.unreachable) {
          this.fail(e);
        } else {
          this.injectionIssues = e.issues.length
            ? e.issues
            : [{ code: "Rejected", entity: "fire", detail: e.message }];
        }
        return null;
      }
      throw e;
    }
  }

  /** Frames-after-effective-tick delay for each confirmed injection. */
  injectionLatencies(): number[] {
    return this.injections
      .filter((i) => i.confirmedTick !== null)
      .map((i) => (i.confirmedTick as number) - i.effectiveTick);
  }

  disconnect(): void {
    this.stream?.close();
    this.stream = null;
  }
}

/** Results dialog helper: the three outcome buckets must cover everyone. */
export function totalsConsistent(results: SimResults): boolean {
  return results.survived + results.died + results.unresolved === results.total;
}
