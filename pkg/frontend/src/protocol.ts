// Wire protocol types. One JSON object per WebSocket text frame; the server
// is authoritative and the client renders only what it is told.

export type Role = "facilitator" | "participant" | "observer";

export interface SteerAction {
  kind: "set_heading" | "turn_left" | "turn_right" | "stop" | "go";
  degrees?: number;
}

export type ClientFrame =
  | { t: "join"; session: string; name: string }
  | { t: "cmd"; agent: number; action: SteerAction }
  | { t: "choice"; menu: string; option: string }
  | { t: "vote"; menu: string; option: string }
  | { t: "pause" }
  | { t: "resume" }
  | { t: "sync" };

export interface AgentView {
  id?: number;
  x: number;
  y: number;
  heading: number;
  carrying?: boolean;
}

export interface TickDelta {
  tick: number;
  cells: number[][];      // fire: [x, y, stateCode]; ants: [x, y, pheromoneByte]
  agents: AgentView[];
  food: number[][];       // ants only: [x, y, remaining]
  metrics: Record<string, number>;
  finished: boolean;
}

export interface Snapshot {
  model: "fire" | "ants";
  config: unknown;
  tick: number;
  n: number;
  width: number;
  height: number;
  metrics: Record<string, number>;
  finished: boolean;
  agents: AgentView[];
  cells?: number[];       // fire state codes, row major
  pheromone?: number[];   // ants pheromone bytes, row major
  food?: number[][];
  nest?: number[];
  nest_radius?: number;
}

export interface MenuOption {
  id: string;
  label: string;
}

export interface MenuFrame {
  t: "menu";
  id: string;
  label: string;
  options: MenuOption[];
  tally: Record<string, number>;
}

export type ServerFrame =
  | { t: "welcome"; agent: number | null; role: Role; session: string; snapshot: Snapshot }
  | { t: "tick"; n: number; delta: TickDelta }
  | ({ t: "snapshot" } & Snapshot)
  | MenuFrame
  | { t: "restart"; config: unknown }
  | { t: "joined"; name: string; agent: number | null; left?: boolean }
  | { t: "ack"; for: string; applies_at_tick: number }
  | { t: "err"; code: string; msg: string };

// Heading convention shared with the engine: 0 = east, 90 = north
// (toward smaller y), counterclockwise positive.
export const HEADING_EAST = 0;
export const HEADING_NORTH = 90;
export const HEADING_WEST = 180;
export const HEADING_SOUTH = 270;
