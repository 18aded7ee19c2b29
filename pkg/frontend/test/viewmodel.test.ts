import { describe, expect, it } from "vitest";

import type { ServerFrame, Snapshot } from "../src/protocol.js";
import { ViewModel } from "../src/viewmodel.js";
import { FIRE_COLORS, paintAgents, paintPatches, type Surface } from "../src/raster.js";

import catalog from "./fixtures/catalog.json";

function fireSnapshot(width = 5, height = 5): Snapshot {
  return {
    model: "fire",
    config: { model: "fire", tick_rate_hz: 10 },
    tick: 0,
    n: 0,
    width,
    height,
    metrics: { percent_burned: 0, burning_count: 1 },
    finished: false,
    agents: [],
    cells: Array(width * height).fill(1),
  };
}

function antsSnapshot(width = 5, height = 5): Snapshot {
  return {
    model: "ants",
    config: { model: "ants", tick_rate_hz: 10 },
    tick: 0,
    n: 0,
    width,
    height,
    metrics: { delivered: 0, total_pheromone: 0, out_ants: 0 },
    finished: false,
    agents: [{ id: 0, x: 2, y: 2, heading: 0, carrying: false }],
    pheromone: Array(width * height).fill(0),
    food: [[4, 2, 5]],
    nest: [2, 2],
    nest_radius: 0,
  };
}

function welcome(vm: ViewModel, snap: Snapshot, role = "participant", agent: number | null = 0) {
  return vm.applyFrame({
    t: "welcome", agent, role: role as never, session: "s1", snapshot: snap,
  });
}

function tick(n: number, cells: number[][] = [], agents: never[] = [], food: number[][] = []): ServerFrame {
  return {
    t: "tick",
    n,
    delta: { tick: n, cells, agents, food, metrics: { delivered: 0 }, finished: false },
  };
}

class CountingSurface implements Surface {
  calls: Array<[number, number, string]> = [];
  fillCell(x: number, y: number, color: string): void {
    this.calls.push([x, y, color]);
  }
}

describe("view model reducer", () => {
  it("renders only server state: no frames, no changes", () => {
    const vm = new ViewModel();
    welcome(vm, fireSnapshot());
    const surface = new CountingSurface();
    paintPatches(vm, surface); // initial snapshot paint
    surface.calls = [];
    // paused server: time passes, no frames arrive, repaint loops keep running
    for (let i = 0; i < 50; i++) {
      paintPatches(vm, surface);
      paintAgents(vm, surface);
    }
    expect(surface.calls.length).toBe(0);
  });

  it("applies a fire delta by repainting exactly the changed cells", () => {
    const vm = new ViewModel();
    welcome(vm, fireSnapshot());
    const surface = new CountingSurface();
    paintPatches(vm, surface);
    surface.calls = [];
    vm.applyFrame(tick(1, [[1, 1, 2], [2, 1, 2], [1, 2, 2]]));
    const painted = paintPatches(vm, surface);
    expect(painted).toBe(3);
    expect(surface.calls.every(([, , color]) => color === FIRE_COLORS[2])).toBe(true);
  });

  it("zero pheromone renders fully transparent", () => {
    const vm = new ViewModel();
    welcome(vm, antsSnapshot());
    const surface = new CountingSurface();
    paintPatches(vm, surface);
    const overlayCells = surface.calls.filter(([, , c]) => c.startsWith("rgba(255,255,255"));
    expect(overlayCells.length).toBe(0); // nothing painted white at level 0
    vm.applyFrame(tick(1, [[1, 1, 128]]));
    surface.calls = [];
    paintPatches(vm, surface);
    const overlay = surface.calls.find(([, , c]) => c.startsWith("rgba(255,255,255"));
    expect(overlay).toBeDefined();
    expect(overlay![2]).toContain("0.502"); // 128/255 alpha
  });

  it("requests a snapshot on a tick gap and ignores deltas until it lands", () => {
    const vm = new ViewModel();
    welcome(vm, fireSnapshot());
    expect(vm.applyFrame(tick(1))).toEqual([]);
    const replies = vm.applyFrame(tick(5, [[0, 0, 2]]));
    expect(replies).toEqual([{ t: "sync" }]);
    expect(vm.cells[0]).toBe(1); // gap delta was not applied
    // second gap does not spam further sync requests
    expect(vm.applyFrame(tick(6))).toEqual([]);
    const snap = { ...fireSnapshot(), n: 7, t: "snapshot" } as never;
    vm.applyFrame(snap);
    expect(vm.lastTick).toBe(7);
    expect(vm.applyFrame(tick(8))).toEqual([]); // back in sequence
  });

  it("ignores stale rebroadcasts", () => {
    const vm = new ViewModel();
    welcome(vm, fireSnapshot());
    vm.applyFrame(tick(1, [[0, 0, 2]]));
    vm.applyFrame(tick(1, [[1, 0, 2]]));
    expect(vm.cells[1]).toBe(1); // duplicate tick 1 was dropped
  });

  it("tracks food and agents from ants deltas", () => {
    const vm = new ViewModel();
    welcome(vm, antsSnapshot());
    expect(vm.food.get(vm.index(4, 2))).toBe(5);
    vm.applyFrame({
      t: "tick",
      n: 1,
      delta: {
        tick: 1,
        cells: [],
        agents: [{ id: 0, x: 3, y: 2, heading: 0, carrying: true }],
        food: [[4, 2, 4]],
        metrics: { delivered: 0 },
        finished: false,
      },
    });
    expect(vm.food.get(vm.index(4, 2))).toBe(4);
    expect(vm.agents[0].carrying).toBe(true);
    expect(vm.agentsDirty).toBe(true);
  });

  it("shows pending inputs until a later tick echoes the agent", () => {
    const vm = new ViewModel();
    welcome(vm, antsSnapshot());
    vm.applyFrame(tick(1));
    const frame = vm.steerFrame({ kind: "set_heading", degrees: 90 });
    expect(frame).toEqual({ t: "cmd", agent: 0, action: { kind: "set_heading", degrees: 90 } });
    expect(vm.pending.length).toBe(1);
    vm.applyFrame(tick(2));
    expect(vm.pending.length).toBe(0);
  });

  it("observers have no steering pad", () => {
    const vm = new ViewModel();
    welcome(vm, antsSnapshot(), "observer", null);
    expect(vm.steerFrame({ kind: "stop" })).toBeNull();
  });

  it("collects error frames for the banner", () => {
    const vm = new ViewModel();
    vm.applyFrame({ t: "err", code: "not_owner", msg: "agent 2 is not yours" });
    expect(vm.errors[0].code).toBe("not_owner");
  });
});

describe("menu catalog round trip", () => {
  function vmWithMenus(model: "fire" | "ants", role: string): ViewModel {
    const vm = new ViewModel();
    welcome(vm, model === "fire" ? fireSnapshot() : antsSnapshot(), role, null);
    for (const menu of catalog.menus.filter((m) => m.model === model)) {
      vm.applyFrame(menu as never);
    }
    return vm;
  }

  it("renders every menu option the server offers, one to one", () => {
    for (const model of ["fire", "ants"] as const) {
      const vm = vmWithMenus(model, "facilitator");
      const rendered = new Set<string>();
      for (const menu of vm.menus.values()) {
        for (const option of menu.options) {
          rendered.add(`${menu.id}/${option.id}`);
        }
      }
      const offered = catalog.menus
        .filter((m) => m.model === model)
        .flatMap((m) => m.options.map((o) => `${m.id}/${o.id}`));
      expect(rendered).toEqual(new Set(offered));
    }
  });

  it("facilitator clicks emit the exact engine mutation id", () => {
    const fire = vmWithMenus("fire", "facilitator");
    const ants = vmWithMenus("ants", "facilitator");
    for (const [menuId, optionId] of catalog.canonical_options) {
      const vm = menuId.startsWith("QF") ? fire : ants;
      const frame = vm.choiceFrame(menuId, optionId);
      expect(frame).toEqual({ t: "choice", menu: menuId, option: optionId });
      // the id pair is the engine's key into its effect table
      expect(catalog.effects[`${menuId}/${optionId}`]).toBeDefined();
    }
  });

  it("participant clicks become votes instead of commits", () => {
    const vm = vmWithMenus("ants", "participant");
    expect(vm.choiceFrame("QA5", "b")).toEqual({ t: "vote", menu: "QA5", option: "b" });
  });

  it("never emits options the server did not offer", () => {
    const vm = vmWithMenus("fire", "facilitator");
    expect(() => vm.choiceFrame("QA5", "b")).toThrow();
    expect(() => vm.choiceFrame("QF3", "x")).toThrow();
  });

  it("vote tallies update from menu rebroadcasts", () => {
    const vm = vmWithMenus("ants", "participant");
    const menu = catalog.menus.find((m) => m.id === "QA5")!;
    vm.applyFrame({ ...menu, tally: { b: 3, c: 1 } } as never);
    expect(vm.menus.get("QA5")!.tally).toEqual({ b: 3, c: 1 });
  });
});
