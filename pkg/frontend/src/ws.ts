/**
 * Frame stream subscriber for /simulations/{id}/stream.
 *
 * The socket constructor is injectable so tests can drive a fake. Frames
 * arrive as JSON; the terminal message is {event: "ended", results}.
 */

import type { SimResults, StreamFrame } from "./types.js";

/** Structural subset of WebSocket the client needs. */
export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onclose: ((ev?: { code?: number }) => void) | null;
  close(code?: number): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface StreamCallbacks {
  onFrame?: (frame: StreamFrame) => void;
  onEnded?: (results: SimResults) => void;
  onClose?: (code?: number) => void;
  onError?: (err: unknown) => void;
}

export class StreamClient {
  lastTick = -1;
  framesSeen = 0;
  ended = false;
  private socket: SocketLike | null = null;

  constructor(
    private url: string,
    private callbacks: StreamCallbacks,
    private factory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect(): void {
    const sock = this.factory(this.url);
    this.socket = sock;
    sock.onmessage = (ev) => this.handleMessage(String(ev.data));
    sock.onerror = (ev) => this.callbacks.onError?.(ev);
    sock.onclose = (ev) => this.callbacks.onClose?.(ev?.code);
  }

  close(): void {
    this.socket?.close();
    this.socket = null;
  }

  private handleMessage(data: string): void {
    let msg: unknown;
    try {
      msg = JSON.parse(data);
    } catch (e) {
      this.callbacks.onError?.(e);
      return;
    }
    const obj = msg as Record<string, unknown>;
    if (obj?.event === "ended") {
      this.ended = true;
      this.callbacks.onEnded?.(obj.results as SimResults);
      return;
    }
    const frame = msg as StreamFrame;
    if (typeof frame?.tick !== "number") return;
    // the server's ticks are strictly increasing; drop anything stale
    if (frame.tick <= this.lastTick) return;
    this.lastTick = frame.tick;
    this.framesSeen += 1;
    this.callbacks.onFrame?.(frame);
  }
}
