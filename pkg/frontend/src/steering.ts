// Steering inputs: arrow keys, an on-screen pad, or a gamepad axis, mapped
// onto the shared heading convention and throttled so at most one command
// frame leaves per tick interval.

import type { SteerAction } from "./protocol.js";

export const KEY_HEADINGS: Record<string, number> = {
  ArrowRight: 0,
  ArrowUp: 90,
  ArrowLeft: 180,
  ArrowDown: 270,
};

export function actionForKey(key: string): SteerAction | null {
  if (key in KEY_HEADINGS) {
    return { kind: "set_heading", degrees: KEY_HEADINGS[key] };
  }
  if (key === " ") {
    return { kind: "stop" };
  }
  if (key === "Enter") {
    return { kind: "go" };
  }
  return null;
}

// Gamepad axes use the math convention (+y up): (0, -1) points south.
export function headingFromAxes(x: number, y: number, deadzone = 0.5): number | null {
  if (Math.hypot(x, y) < deadzone) {
    return null;
  }
  const degrees = (Math.atan2(y, x) * 180) / Math.PI;
  const snapped = Math.round(((degrees + 360) % 360) / 45) * 45;
  return snapped % 360;
}

// Client-side throttle: the first action in a tick interval is sent,
// later ones in the same interval are dropped (the server keeps
// last-write-wins per tick anyway).
export class SteeringThrottle {
  private lastSent = -Infinity;

  constructor(
    private tickIntervalMs: number,
    private now: () => number = () => performance.now(),
  ) {}

  offer(action: SteerAction): SteerAction | null {
    const t = this.now();
    if (t - this.lastSent < this.tickIntervalMs) {
      return null;
    }
    this.lastSent = t;
    return action;
  }
}
