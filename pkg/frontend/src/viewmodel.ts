// Server-authoritative view state. The reducer applies one server frame at
// a time and never simulates: between frames nothing changes. Applying a
// frame may return client frames to send (currently only snapshot resync
// requests after a tick gap).

import type {
  AgentView,
  ClientFrame,
  MenuFrame,
  Role,
  ServerFrame,
  Snapshot,
} from "./protocol.js";

export interface MenuView {
  id: string;
  label: string;
  options: { id: string; label: string }[];
  tally: Record<string, number>;
}

export interface PendingInput {
  agent: number;
  action: string;
  sentAtTick: number;
}

export interface Member {
  name: string;
  agent: number | null;
}

export class ViewModel {
  connection: "connecting" | "open" | "closed" = "connecting";
  role: Role | null = null;
  agentId: number | null = null;
  session = "";

  model: "fire" | "ants" | null = null;
  width = 0;
  height = 0;
  lastTick = 0; // session-global tick of the last applied frame
  modelTick = 0;
  finished = false;
  metrics: Record<string, number> = {};
  config: unknown = null;

  // patch layers; fire uses state codes, ants use pheromone bytes plus food
  cells = new Uint8Array(0);
  food = new Map<number, number>();
  nest: [number, number] | null = null;
  nestRadius = 0;
  agents: AgentView[] = [];

  menus = new Map<string, MenuView>();
  members: Member[] = [];
  pending: PendingInput[] = [];
  errors: { code: string; msg: string }[] = [];

  // cell indexes (y * width + x) whose pixels must be repainted
  dirty = new Set<number>();
  agentsDirty = false;
  awaitingSync = false;

  index(x: number, y: number): number {
    return y * this.width + x;
  }

  applyFrame(frame: ServerFrame): ClientFrame[] {
    switch (frame.t) {
      case "welcome":
        this.role = frame.role;
        this.agentId = frame.agent;
        this.session = frame.session;
        this.connection = "open";
        this.loadSnapshot(frame.snapshot);
        return [];
      case "snapshot":
        this.awaitingSync = false;
        this.loadSnapshot(frame);
        return [];
      case "tick":
        return this.applyTick(frame.n, frame.delta);
      case "menu":
        this.applyMenu(frame);
        return [];
      case "restart":
        this.config = frame.config;
        // fresh run incoming; the follow-up snapshot repaints everything
        this.pending = [];
        return [];
      case "joined":
        this.members = this.members.filter((m) => m.name !== frame.name);
        if (!frame.left) {
          this.members.push({ name: frame.name, agent: frame.agent });
        }
        return [];
      case "ack":
        return [];
      case "err":
        this.errors.push({ code: frame.code, msg: frame.msg });
        return [];
    }
  }

  private loadSnapshot(snap: Snapshot): void {
    this.model = snap.model;
    this.width = snap.width;
    this.height = snap.height;
    this.lastTick = snap.n;
    this.modelTick = snap.tick;
    this.metrics = snap.metrics;
    this.finished = snap.finished;
    this.config = snap.config;
    this.agents = snap.agents;
    this.agentsDirty = true;
    const source = snap.model === "fire" ? snap.cells : snap.pheromone;
    this.cells = Uint8Array.from(source ?? []);
    this.food.clear();
    for (const [x, y, count] of snap.food ?? []) {
      this.food.set(this.index(x, y), count);
    }
    this.nest = snap.nest ? [snap.nest[0], snap.nest[1]] : null;
    this.nestRadius = snap.nest_radius ?? 0;
    this.dirty.clear();
    for (let i = 0; i < this.cells.length; i++) {
      this.dirty.add(i);
    }
  }

  private applyTick(n: number, delta: import("./protocol.js").TickDelta): ClientFrame[] {
    if (n <= this.lastTick) {
      return []; // stale rebroadcast; the newer state already rendered
    }
    if (n > this.lastTick + 1) {
      // gap: ask for a full snapshot and skip partial deltas until it lands
      if (this.awaitingSync) {
        return [];
      }
      this.awaitingSync = true;
      return [{ t: "sync" }];
    }
    if (this.awaitingSync) {
      return [];
    }
    this.lastTick = n;
    this.modelTick = delta.tick;
    this.metrics = delta.metrics;
    this.finished = delta.finished;
    for (const [x, y, value] of delta.cells) {
      this.cells[this.index(x, y)] = value;
      this.dirty.add(this.index(x, y));
    }
    for (const [x, y, count] of delta.food) {
      const idx = this.index(x, y);
      if (count > 0) {
        this.food.set(idx, count);
      } else {
        this.food.delete(idx);
      }
      this.dirty.add(idx);
    }
    this.agents = delta.agents;
    this.agentsDirty = true;
    if (this.pending.length > 0) {
      // own inputs become authoritative once a later tick echoes the agent
      this.pending = this.pending.filter((p) => p.sentAtTick >= n);
    }
    return [];
  }

  private applyMenu(frame: MenuFrame): void {
    this.menus.set(frame.id, {
      id: frame.id,
      label: frame.label,
      options: frame.options,
      tally: frame.tally,
    });
  }

  // -- user intents (the UI renders these as pending until echoed) ---------

  steerFrame(action: import("./protocol.js").SteerAction): ClientFrame | null {
    if (this.agentId === null) {
      return null; // observers have no steering pad
    }
    this.pending.push({
      agent: this.agentId,
      action: action.kind,
      sentAtTick: this.lastTick,
    });
    return { t: "cmd", agent: this.agentId, action };
  }

  choiceFrame(menuId: string, optionId: string): ClientFrame {
    const menu = this.menus.get(menuId);
    if (!menu || !menu.options.some((o) => o.id === optionId)) {
      throw new Error(`option ${menuId}/${optionId} was never offered by the server`);
    }
    return this.role === "facilitator"
      ? { t: "choice", menu: menuId, option: optionId }
      : { t: "vote", menu: menuId, option: optionId };
  }
}
