/**
 * Gateway client: one dispatch pathway for live WebSocket data and the
 * simulated headset, so every demo behavior works identically offline.
 */

import type {
  EngineEvent,
} from "./engine.js";
import { LocalEventEngine } from "./engine.js";
import type {
  ControlEventKind,
  ScrollPayload,
  ServerMessage,
  TrackDescriptor,
  TrackLabel,
} from "./protocol.js";
import { parseServerMessage } from "./protocol.js";

export type DataListener = (t: number, value: number) => void;
export type EventListener = (event: EngineEvent) => void;
export type ClientStatus = "disconnected" | "connecting" | "subscribed" | "simulated" | "ended";
export type StatusListener = (status: ClientStatus, detail?: string) => void;

export interface StreamHandle {
  streamId: string;
  tracks: TrackDescriptor[];
  warnings: string[];
}

/** Listener registry plus the message -> callback fan-out. */
export class EEGClient {
  handle: StreamHandle | null = null;
  status: ClientStatus = "disconnected";
  private dataListeners = new Map<string, DataListener[]>();
  private eventListeners = new Map<string, EventListener[]>();
  private statusListeners: StatusListener[] = [];
  private trackLabels = new Map<string, TrackLabel>(); // track id -> label
  private sendScroll: ((payload: ScrollPayload) => boolean) | null = null;

  onData(label: TrackLabel, listener: DataListener): void {
    const list = this.dataListeners.get(label) ?? [];
    list.push(listener);
    this.dataListeners.set(label, list);
  }

  onEvent(kind: ControlEventKind | "*", listener: EventListener): void {
    const list = this.eventListeners.get(kind) ?? [];
    list.push(listener);
    this.eventListeners.set(kind, list);
  }

  onStatus(listener: StatusListener): void {
    this.statusListeners.push(listener);
  }

  setStatus(status: ClientStatus, detail?: string): void {
    this.status = status;
    for (const listener of this.statusListeners) listener(status, detail);
  }

  /** Every data sample funnels through here, live or simulated. */
  dispatchData(label: TrackLabel, t: number, value: number): void {
    for (const listener of this.dataListeners.get(label) ?? []) listener(t, value);
  }

  /** Every control event funnels through here, live or simulated. */
  dispatchEvent(event: EngineEvent): void {
    for (const listener of this.eventListeners.get(event.event) ?? []) listener(event);
    for (const listener of this.eventListeners.get("*") ?? []) listener(event);
  }

  handleMessage(message: ServerMessage): void {
    switch (message.kind) {
      case "streamCreated":
        this.handle = {
          streamId: message.streamId,
          tracks: message.tracks,
          warnings: message.warnings ?? [],
        };
        this.trackLabels.clear();
        for (const track of message.tracks) this.trackLabels.set(track.id, track.label);
        this.setStatus("subscribed", (message.warnings ?? []).join("; "));
        break;
      case "data": {
        const label = this.trackLabels.get(message.trackId);
        if (label) this.dispatchData(label, message.t, message.value);
        break;
      }
      case "event":
        this.dispatchEvent({ event: message.event, t: message.t, detail: message.detail });
        break;
      case "sourceEnded":
        this.setStatus("ended");
        break;
      case "error":
        this.setStatus(this.status, `${message.code}: ${message.message}`);
        break;
      default:
        break; // ack / warning need no UI state
    }
  }

  attachScrollTransport(send: ((payload: ScrollPayload) => boolean) | null): void {
    this.sendScroll = send;
  }

  /** Returns false while no live transport accepts scroll telemetry. */
  scroll(payload: ScrollPayload): boolean {
    return this.sendScroll !== null && this.sendScroll(payload);
  }
}

interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  readyState: number;
}

export interface ConnectOptions {
  tracks: TrackLabel[];
  frequencyHz?: number;
  events?: boolean;
  retryDelayMs?: number;
  socketFactory?: (url: string) => SocketLike;
}

const SOCKET_OPEN = 1;

/**
 * Connects, subscribes, and feeds the client; a refused connection surfaces
 * as "disconnected" with a retry affordance (call retry(), or let the
 * auto-retry timer fire).
 */
export class GatewayConnection {
  private socket: SocketLike | null = null;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;
  private closed = false;

  constructor(
    private client: EEGClient,
    private url: string,
    private options: ConnectOptions,
  ) {}

  connect(): void {
    this.closed = false;
    this.client.setStatus("connecting");
    const factory = this.options.socketFactory ?? ((url: string) => new WebSocket(url) as unknown as SocketLike);
    let socket: SocketLike;
    try {
      socket = factory(this.url);
    } catch (err) {
      this.onFailure(String(err));
      return;
    }
    this.socket = socket;
    socket.onopen = () => {
      socket.send(
        JSON.stringify({
          kind: "subscribe",
          tracks: this.options.tracks,
          frequencyHz: this.options.frequencyHz,
          events: this.options.events ?? true,
        }),
      );
    };
    socket.onmessage = (ev) => {
      const message = parseServerMessage(String(ev.data));
      if (message) this.client.handleMessage(message);
    };
    socket.onerror = () => this.onFailure("connection error");
    socket.onclose = () => this.onFailure("connection closed");
    this.client.attachScrollTransport((payload) => {
      if (this.socket && this.socket.readyState === SOCKET_OPEN) {
        this.socket.send(JSON.stringify({ kind: "scroll", ...payload }));
        return true;
      }
      return false;
    });
  }

  retry(): void {
    if (this.retryTimer !== null) {
      clearTimeout(this.retryTimer);
      this.retryTimer = null;
    }
    this.connect();
  }

  close(): void {
    this.closed = true;
    if (this.retryTimer !== null) clearTimeout(this.retryTimer);
    this.socket?.close();
    this.socket = null;
  }

  private onFailure(detail: string): void {
    if (this.closed) return;
    this.socket = null;
    this.client.attachScrollTransport(null);
    this.client.setStatus("disconnected", detail);
    const delay = this.options.retryDelayMs ?? 2000;
    if (this.retryTimer === null) {
      this.retryTimer = setTimeout(() => {
        this.retryTimer = null;
        if (!this.closed) this.connect();
      }, delay);
    }
  }
}

/**
 * The slider fallback: a simulated headset emitting attention samples at
 * 1 Hz and blinks on demand, deriving control events locally and feeding
 * both through the exact same client pathway as gateway data.
 */
export class SimulatedHeadset {
  readonly engine: LocalEventEngine;
  private attention = 50;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private client: EEGClient,
    engine?: LocalEventEngine,
    private now: () => number = () => Date.now(),
  ) {
    this.engine = engine ?? new LocalEventEngine();
  }

  setAttention(value: number): void {
    this.attention = Math.max(1, Math.min(100, Math.round(value)));
  }

  start(periodMs = 1000): void {
    this.stop();
    this.client.setStatus("simulated");
    this.timer = setInterval(() => this.emitAttention(), periodMs);
    this.emitAttention();
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  /** One attention sample at time t (defaults to now); exposed for tests. */
  emitAttention(t: number = this.now()): void {
    this.client.dispatchData("attention", t, this.attention);
    for (const event of this.engine.processAttention(t, this.attention)) {
      this.client.dispatchEvent(event);
    }
  }

  /** One press = relax-then-spike samples, so every press is a deliberate blink. */
  blink(t: number = this.now(), spikeStrength = 60): void {
    for (const strength of [5, spikeStrength]) {
      this.client.dispatchData("blink", t, strength);
      for (const event of this.engine.processBlink(t, strength)) {
        this.client.dispatchEvent(event);
      }
    }
  }
}
