import { describe, expect, it } from "vitest";

import { KEY_HEADINGS, SteeringThrottle, actionForKey, headingFromAxes } from "../src/steering.js";

describe("input mapping", () => {
  it("ArrowUp maps to set_heading(90)", () => {
    expect(actionForKey("ArrowUp")).toEqual({ kind: "set_heading", degrees: 90 });
  });

  it("the four arrows cover the four compass headings", () => {
    expect(KEY_HEADINGS).toEqual({ ArrowRight: 0, ArrowUp: 90, ArrowLeft: 180, ArrowDown: 270 });
  });

  it("space stops, enter resumes, anything else is ignored", () => {
    expect(actionForKey(" ")).toEqual({ kind: "stop" });
    expect(actionForKey("Enter")).toEqual({ kind: "go" });
    expect(actionForKey("q")).toBeNull();
  });

  it("gamepad axis (0, -1) maps to set_heading(270)", () => {
    expect(headingFromAxes(0, -1)).toBe(270);
    expect(headingFromAxes(0, 1)).toBe(90);
    expect(headingFromAxes(1, 0)).toBe(0);
    expect(headingFromAxes(0.8, 0.8)).toBe(45);
  });

  it("gamepad deadzone yields no heading", () => {
    expect(headingFromAxes(0.1, -0.2)).toBeNull();
  });
});

describe("steering throttle", () => {
  it("two presses within one tick interval send one frame", () => {
    let now = 0;
    const throttle = new SteeringThrottle(100, () => now);
    expect(throttle.offer({ kind: "set_heading", degrees: 90 })).not.toBeNull();
    now = 40;
    expect(throttle.offer({ kind: "set_heading", degrees: 90 })).toBeNull();
    now = 101;
    expect(throttle.offer({ kind: "set_heading", degrees: 90 })).not.toBeNull();
  });

  it("exactly one frame per interval under key repeat", () => {
    let now = 0;
    const throttle = new SteeringThrottle(100, () => now);
    let sent = 0;
    for (let ms = 0; ms < 1000; ms += 10) {
      now = ms;
      if (throttle.offer({ kind: "set_heading", degrees: 90 })) {
        sent += 1;
      }
    }
    expect(sent).toBe(10);
  });
});
