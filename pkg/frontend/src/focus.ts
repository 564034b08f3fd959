/**
 * Hands-free focus navigation over the demo menu.
 *
 * focusAdvance moves the ring to the next item (wrapping); sustained-high
 * attention holds it (the engine simply stops advancing); a doubleBlink
 * opens the focused item, and a second doubleBlink on the detail view
 * returns home.  Pure reducer: UI state is a function of the event
 * sequence, so traces are replayable in tests.
 */

import type { EngineEvent } from "./engine.js";

export interface FocusState {
  view: "home" | "detail";
  index: number;
  itemCount: number;
  openedIndex: number | null;
}

export function initialFocus(itemCount = 5): FocusState {
  return { view: "home", index: 0, itemCount, openedIndex: null };
}

export function reduceFocus(state: FocusState, event: EngineEvent): FocusState {
  switch (event.event) {
    case "focusAdvance":
      if (state.view !== "home") return state;
      return { ...state, index: (state.index + 1) % state.itemCount };
    case "doubleBlink":
      if (state.view === "home") {
        return { ...state, view: "detail", openedIndex: state.index };
      }
      return { ...state, view: "home", openedIndex: null };
    default:
      return state; // sustained-high holds by the absence of advances
  }
}

export function replayFocus(events: EngineEvent[], itemCount = 5): FocusState {
  return events.reduce(reduceFocus, initialFocus(itemCount));
}
