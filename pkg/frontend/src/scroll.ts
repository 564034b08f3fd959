/**
 * Scroll telemetry reporter: at most one message per 250 ms leaves the
 * client (<= 4 Hz at the gateway), newest position wins within a throttle
 * window, and up to 100 reports are buffered while disconnected (oldest
 * dropped beyond that), draining in order after reconnect at the same rate.
 */

import type { ScrollPayload } from "./protocol.js";

export const MIN_REPORT_INTERVAL_MS = 250; // <= 4 Hz
export const MAX_BUFFERED_REPORTS = 100;

export class ScrollReporter {
  private lastAttemptAt = -Infinity;
  private pending: ScrollPayload | null = null; // newest un-attempted position
  private buffer: ScrollPayload[] = []; // attempted while disconnected, oldest first

  constructor(
    private send: (payload: ScrollPayload) => boolean,
    private now: () => number = () => Date.now(),
  ) {}

  /** Called on every scroll move. */
  report(payload: ScrollPayload): void {
    this.pending = payload;
    this.pump();
  }

  /** Called periodically (or on scroll) to flush trailing/buffered reports. */
  tick(): void {
    this.pump();
  }

  bufferedCount(): number {
    return this.buffer.length;
  }

  hasWork(): boolean {
    return this.pending !== null || this.buffer.length > 0;
  }

  private pump(): void {
    const t = this.now();
    if (t - this.lastAttemptAt < MIN_REPORT_INTERVAL_MS) return;
    if (this.buffer.length === 0 && this.pending === null) return;
    this.lastAttemptAt = t;
    if (this.buffer.length > 0) {
      if (this.send(this.buffer[0]!)) {
        this.buffer.shift();
      } else {
        this.archivePending(); // still offline: keep the newest position too
      }
      return;
    }
    const payload = this.pending!;
    if (this.send(payload)) this.pending = null;
    else this.archivePending();
  }

  private archivePending(): void {
    if (this.pending === null) return;
    this.buffer.push(this.pending);
    this.pending = null;
    while (this.buffer.length > MAX_BUFFERED_REPORTS) this.buffer.shift();
  }
}
