// Keyboard teleoperation: WASD/arrows to ego velocity commands.

import type { CitywalkClient } from "./client.js";

const KEY_VECTORS: Record<string, [number, number]> = {
  w: [1, 0], arrowup: [1, 0],
  s: [-1, 0], arrowdown: [-1, 0],
  a: [0, 1], arrowleft: [0, 1],
  d: [0, -1], arrowright: [0, -1],
};

export const RELEASE_KEY = "r";

export function teleopVector(keysDown: Set<string>): [number, number] | null {
  let vx = 0;
  let vy = 0;
  let any = false;
  for (const key of keysDown) {
    const vec = KEY_VECTORS[key.toLowerCase()];
    if (vec !== undefined) {
      vx += vec[0];
      vy += vec[1];
      any = true;
    }
  }
  if (!any) return null;
  return [Math.max(-1, Math.min(1, vx)), Math.max(-1, Math.min(1, vy))];
}

/** One input tick (20 Hz): returns true when a frame was sent. */
export function handleInputTick(client: CitywalkClient, keysDown: Set<string>): boolean {
  if (keysDown.has(RELEASE_KEY)) {
    return client.release();
  }
  const vec = teleopVector(keysDown);
  if (vec === null) return false;
  return client.teleop(vec[0], vec[1]);
}
