// Dirty-cell raster painting. One draw call per changed patch; 251x251
// grids at 10 Hz stay cheap because only the delta repaints.

import type { ViewModel } from "./viewmodel.js";

export interface Surface {
  fillCell(x: number, y: number, color: string): void;
}

// fire patch state codes from the engine
export const FIRE_COLORS: Record<number, string> = {
  0: "#101010", // no tree
  1: "#2e8b2e", // tree
  2: "#ff3b1f", // burning
  3: "#571414", // burnt
};

const ANTS_BACKGROUND = "#101010";
const NEST_COLOR = "#8a5a2b";
const FOOD_COLOR = "#2b9bd7";

export function antsCellColor(vm: ViewModel, x: number, y: number): string {
  if (vm.nest) {
    const d = Math.max(Math.abs(x - vm.nest[0]), Math.abs(y - vm.nest[1]));
    if (d <= vm.nestRadius) {
      return NEST_COLOR;
    }
  }
  if (vm.food.has(vm.index(x, y))) {
    return FOOD_COLOR;
  }
  const byte = vm.cells[vm.index(x, y)] ?? 0;
  if (byte === 0) {
    return ANTS_BACKGROUND;
  }
  // pheromone reads as white, alpha from the quantized level
  const alpha = Math.min(1, byte / 255);
  return `rgba(255,255,255,${alpha.toFixed(3)})`;
}

// Repaint every dirty patch; returns how many cells were painted so tests
// (and the paused-server contract) can count raster changes exactly.
export function paintPatches(vm: ViewModel, surface: Surface): number {
  let painted = 0;
  for (const idx of vm.dirty) {
    const x = idx % vm.width;
    const y = Math.floor(idx / vm.width);
    if (vm.model === "fire") {
      surface.fillCell(x, y, FIRE_COLORS[vm.cells[idx]] ?? "#f0f");
    } else {
      surface.fillCell(x, y, ANTS_BACKGROUND); // clear under the alpha overlay
      const color = antsCellColor(vm, x, y);
      if (color !== ANTS_BACKGROUND) {
        surface.fillCell(x, y, color);
      }
    }
    painted += 1;
  }
  vm.dirty.clear();
  return painted;
}

export function paintAgents(vm: ViewModel, surface: Surface): number {
  if (!vm.agentsDirty) {
    return 0;
  }
  let painted = 0;
  for (const agent of vm.agents) {
    const color = vm.model === "fire"
      ? "#ffd21f"
      : agent.carrying
        ? "#ff9d2e"
        : "#e03131";
    surface.fillCell(agent.x, agent.y, color);
    painted += 1;
  }
  vm.agentsDirty = false;
  return painted;
}
