// HUD counters recomputed from the received state stream.
//
// During an intervention the server broadcasts a state for every stepped
// tick, and it never steps under human control without a teleop, so the
// number of intervention-open state frames with a tick advance equals the
// server's per-tick labor count exactly.

import type { StatePayload } from "./protocol.js";

export interface HudCounters {
  laborTicks: number;
  laborCostS: number;
  interventionTimes: number;
  lastTick: number;
  lastOpen: boolean;
  ticksSeen: number;
}

export function newHud(): HudCounters {
  return {
    laborTicks: 0,
    laborCostS: 0,
    interventionTimes: 0,
    lastTick: -1,
    lastOpen: false,
    ticksSeen: 0,
  };
}

export function hudOnState(hud: HudCounters, tick: number, state: StatePayload, dt: number): void {
  if (tick <= hud.lastTick) return; // stale or duplicate snapshot
  const open = state.intervention_open;
  if (open && !hud.lastOpen) hud.interventionTimes += 1;
  if (open && hud.lastTick >= 0) {
    hud.laborTicks += 1; // one human-driven tick per open snapshot
    hud.laborCostS = hud.laborTicks * dt;
  }
  hud.lastTick = tick;
  hud.lastOpen = open;
  hud.ticksSeen += 1;
}
