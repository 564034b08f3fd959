/**
 * Wire protocol types for the gateway WebSocket endpoint (see docs/protocol.md).
 * Every message is one JSON object; field names are camelCase.
 */

export type TrackLabel = "attention" | "meditation" | "blink" | "raw" | "signal_quality";

export interface TrackDescriptor {
  id: string;
  label: TrackLabel;
  frequencyHz: number;
}

export interface StreamCreatedMessage {
  kind: "streamCreated";
  streamId: string;
  tracks: TrackDescriptor[];
  events: boolean;
  warnings?: string[];
}

export interface DataMessage {
  kind: "data";
  trackId: string;
  t: number;
  value: number;
}

export interface EventMessage {
  kind: "event";
  event: ControlEventKind;
  t: number;
  detail: Record<string, number>;
}

export interface AckMessage {
  kind: "ack";
  of: string;
  t: number;
}

export interface ErrorMessage {
  kind: "error";
  code: string;
  message: string;
  validTracks?: string[];
}

export interface WarningMessage {
  kind: "warning";
  code: string;
  message: string;
  count?: number;
}

export interface SourceEndedMessage {
  kind: "sourceEnded";
  t: number;
}

export type ServerMessage =
  | StreamCreatedMessage
  | DataMessage
  | EventMessage
  | AckMessage
  | ErrorMessage
  | WarningMessage
  | SourceEndedMessage;

export type ControlEventKind =
  | "sustainedHighEnter"
  | "sustainedHighExit"
  | "focusAdvance"
  | "deliberateBlink"
  | "doubleBlink";

export interface SubscribeMessage {
  kind: "subscribe";
  tracks: TrackLabel[];
  frequencyHz?: number;
  events?: boolean;
}

export interface ScrollPayload {
  pageId: string;
  scrollOffsetPx: number;
  viewportHPx: number;
  contentHPx: number;
}

export interface ScrollMessage extends ScrollPayload {
  kind: "scroll";
}

export type ClientMessage = SubscribeMessage | ScrollMessage | { kind: "unsubscribe"; streamId: string };

const SERVER_KINDS = new Set([
  "streamCreated",
  "data",
  "event",
  "ack",
  "error",
  "warning",
  "sourceEnded",
]);

export function parseServerMessage(text: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const kind = (obj as { kind?: unknown }).kind;
  if (typeof kind !== "string" || !SERVER_KINDS.has(kind)) return null;
  return obj as ServerMessage;
}
