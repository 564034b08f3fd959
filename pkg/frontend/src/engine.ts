/**
 * Local control-event derivation for the simulated headset.
 *
 * Behaviorally identical to the gateway engine defaults: attention at or
 * above the threshold held for `holdMs` enters sustained-high (parking the
 * focus); while not sustained-high, a focusAdvance fires each time
 * `advancePeriodMs` elapses since the previous advance (or stream start).
 * A blink whose strength jumps by at least `blinkDelta` over the previous
 * blink is deliberate; two deliberate blinks with a gap inside the window
 * form a doubleBlink and consume the pair.
 */

import type { ControlEventKind } from "./protocol.js";

export interface EngineConfig {
  attentionThreshold: number;
  holdMs: number;
  advancePeriodMs: number;
  blinkDelta: number;
  doubleBlinkMinGapMs: number;
  doubleBlinkMaxGapMs: number;
}

export const DEFAULT_ENGINE_CONFIG: EngineConfig = {
  attentionThreshold: 30,
  holdMs: 1000,
  advancePeriodMs: 1000,
  blinkDelta: 20,
  doubleBlinkMinGapMs: 100,
  doubleBlinkMaxGapMs: 1000,
};

export interface EngineEvent {
  event: ControlEventKind;
  t: number;
  detail: Record<string, number>;
}

export class LocalEventEngine {
  private config: EngineConfig;
  private lastT: number | null = null;
  private streamStartT: number | null = null;
  private runStartT: number | null = null;
  private inHigh = false;
  private lastAdvanceT: number | null = null;
  private prevBlink = 0;
  private pendingBlinkT: number | null = null;

  constructor(config: Partial<EngineConfig> = {}) {
    this.config = { ...DEFAULT_ENGINE_CONFIG, ...config };
  }

  setThreshold(threshold: number): void {
    this.config.attentionThreshold = threshold;
  }

  processAttention(t: number, value: number): EngineEvent[] {
    if (this.lastT !== null && t < this.lastT) return [];
    this.lastT = t;
    if (this.streamStartT === null) this.streamStartT = t;
    const events: EngineEvent[] = [];

    if (value >= this.config.attentionThreshold) {
      if (this.runStartT === null) this.runStartT = t;
      if (!this.inHigh && t - this.runStartT >= this.config.holdMs) {
        this.inHigh = true;
        events.push({ event: "sustainedHighEnter", t, detail: { value } });
      }
    } else {
      if (this.inHigh) {
        this.inHigh = false;
        events.push({ event: "sustainedHighExit", t, detail: { value } });
      }
      this.runStartT = null;
    }

    const anchor = this.lastAdvanceT ?? this.streamStartT;
    if (!this.inHigh && t - anchor >= this.config.advancePeriodMs) {
      this.lastAdvanceT = t;
      events.push({ event: "focusAdvance", t, detail: { value } });
    }
    return events;
  }

  processBlink(t: number, strength: number): EngineEvent[] {
    if (this.lastT !== null && t < this.lastT) return [];
    this.lastT = t;
    const events: EngineEvent[] = [];
    const delta = strength - this.prevBlink;
    this.prevBlink = strength;
    if (delta >= this.config.blinkDelta) {
      events.push({ event: "deliberateBlink", t, detail: { strength, delta } });
      if (this.pendingBlinkT === null) {
        this.pendingBlinkT = t;
      } else {
        const gap = t - this.pendingBlinkT;
        if (gap >= this.config.doubleBlinkMinGapMs && gap <= this.config.doubleBlinkMaxGapMs) {
          events.push({ event: "doubleBlink", t, detail: { gapMs: gap, firstTMs: this.pendingBlinkT } });
          this.pendingBlinkT = null; // pair consumed
        } else if (gap > this.config.doubleBlinkMaxGapMs) {
          this.pendingBlinkT = t; // stale partner; open a new pair
        }
        // below the minimum gap: jitter, the first blink stays armed
      }
    }
    return events;
  }
}
