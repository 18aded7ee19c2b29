// Replays a transcript recorded from a live server session through the
// view model, proving the client consumes the real wire format.

import { describe, expect, it } from "vitest";

import type { ServerFrame } from "../src/protocol.js";
import { ViewModel } from "../src/viewmodel.js";
import { paintAgents, paintPatches, type Surface } from "../src/raster.js";

import frames from "./fixtures/session_frames.json";

class CountingSurface implements Surface {
  count = 0;
  fillCell(): void {
    this.count += 1;
  }
}

describe("recorded live-session transcript", () => {
  it("plays through without ever losing sync", () => {
    const vm = new ViewModel();
    const surface = new CountingSurface();
    const outbound: unknown[] = [];
    for (const frame of frames as ServerFrame[]) {
      outbound.push(...vm.applyFrame(frame));
      paintPatches(vm, surface);
      paintAgents(vm, surface);
    }
    // a lockstep feed with no dropped frames never needs a resync
    expect(outbound).toEqual([]);
    expect(vm.model).toBe("ants");
    expect(vm.role).toBe("facilitator");
    expect(surface.count).toBeGreaterThan(vm.width * vm.height);
    expect(vm.menus.size).toBe(3);
    expect(vm.errors).toEqual([]);
  });

  it("ends on the restarted run's configuration", () => {
    const vm = new ViewModel();
    for (const frame of frames as ServerFrame[]) {
      vm.applyFrame(frame);
    }
    const config = vm.config as { variant: { exit_policy: string } };
    expect(config.variant.exit_policy).toBe("reverseReentry");
    const lastTick = [...(frames as ServerFrame[])].reverse()
      .find((f) => f.t === "tick") as { n: number };
    expect(vm.lastTick).toBeGreaterThanOrEqual(lastTick.n);
  });

  it("vote tallies from the transcript reach the menu view", () => {
    const vm = new ViewModel();
    for (const frame of frames as ServerFrame[]) {
      vm.applyFrame(frame);
    }
    expect(vm.menus.get("QA5")!.tally).toEqual({ b: 1 });
  });
});
