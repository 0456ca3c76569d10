// Top-down scene rendering as a pure draw-command list.
//
// renderFrame never touches a canvas: it emits primitive commands that
// the canvas adapter replays, which keeps draw-call counts assertable in
// headless tests. World coordinates are meters; the viewport maps them
// to pixels with pan/zoom, y up.

import type { Snapshot } from "./client.js";
import type { ScenePayload } from "./protocol.js";
import { rleDecode } from "./protocol.js";

export interface Viewport {
  canvasW: number;
  canvasH: number;
  centerX: number; // world meters at canvas center
  centerY: number;
  pixelsPerMeter: number;
}

export type DrawCommand =
  | { kind: "raster"; cells: Uint8Array; shape: [number, number]; resolution: number;
      palette: Record<number, string> }
  | { kind: "disc"; x: number; y: number; r: number; color: string; tag: string }
  | { kind: "poly"; points: Array<[number, number]>; color: string; tag: string }
  | { kind: "line"; points: Array<[number, number]>; color: string; tag: string }
  | { kind: "text"; x: number; y: number; text: string; color: string; tag: string };

// functional zone palette (zone id -> fill)
export const ZONE_COLORS: Record<number, string> = {
  0: "#b8b8c0", // sidewalk
  1: "#e8e4cf", // crosswalk
  2: "#cfd8c5", // plaza
  3: "#8a8d98", // building
  4: "#7da97c", // vegetation
  5: "#5c5f66", // roadway
};

const AGENT_COLORS = ["#e0a84a", "#4a90e0", "#9a5fe0"]; // pedestrian, cyclist, scooter

export interface RenderOptions {
  showDepthRays: boolean;
}

export function worldToScreen(v: Viewport, x: number, y: number): [number, number] {
  return [
    v.canvasW / 2 + (x - v.centerX) * v.pixelsPerMeter,
    v.canvasH / 2 - (y - v.centerY) * v.pixelsPerMeter,
  ];
}

export function renderFrame(
  scene: ScenePayload | null,
  snapshot: Snapshot | undefined,
  view: Viewport,
  options: RenderOptions = { showDepthRays: false },
): DrawCommand[] {
  const commands: DrawCommand[] = [];
  if (scene === null) {
    commands.push({ kind: "text", x: view.canvasW / 2, y: view.canvasH / 2,
      text: "waiting for scene...", color: "#cccccc", tag: "waiting" });
    return commands;
  }
  commands.push({
    kind: "raster",
    cells: rleDecode(scene.zones_rle),
    shape: scene.shape,
    resolution: scene.resolution,
    palette: ZONE_COLORS,
  });
  for (const obj of scene.objects) {
    const o = obj as { x: number; y: number; yaw: number; footprint: [number, number] };
    commands.push({ kind: "poly", points: footprintCorners(o), color: "#3c3f45",
      tag: "object" });
  }
  if (snapshot === undefined) {
    commands.push({ kind: "text", x: view.canvasW / 2, y: view.canvasH / 2,
      text: "waiting for state...", color: "#cccccc", tag: "waiting" });
    return commands;
  }
  const st = snapshot.state;
  for (const agent of st.agents) {
    commands.push({ kind: "disc", x: agent.x, y: agent.y, r: agent.radius,
      color: AGENT_COLORS[agent.kind % AGENT_COLORS.length], tag: "agent" });
  }
  const robot = st.robot;
  if (options.showDepthRays && st.depth.length > 0) {
    const fan = depthFanPoints(robot.x, robot.y, robot.yaw, st.depth);
    commands.push({ kind: "line", points: fan, color: "rgba(120,200,255,0.5)",
      tag: "depth-fan" });
  }
  commands.push({ kind: "poly", points: robotTriangle(robot.x, robot.y, robot.yaw),
    color: st.intervention_open ? "#ff5f5f" : "#69d25a", tag: "robot" });
  commands.push({ kind: "disc", x: st.goal[0], y: st.goal[1], r: 0.25,
    color: "#ffd84a", tag: "goal" });
  return commands;
}

function footprintCorners(o: { x: number; y: number; yaw: number;
                               footprint: [number, number] }): Array<[number, number]> {
  const hw = o.footprint[0] / 2;
  const hl = o.footprint[1] / 2;
  const c = Math.cos(o.yaw);
  const s = Math.sin(o.yaw);
  const local: Array<[number, number]> = [[-hw, -hl], [hw, -hl], [hw, hl], [-hw, hl]];
  return local.map(([lx, ly]) => [o.x + c * lx - s * ly, o.y + s * lx + c * ly]);
}

function robotTriangle(x: number, y: number, yaw: number): Array<[number, number]> {
  const size = 0.35;
  const pts: Array<[number, number]> = [
    [size, 0],
    [-0.6 * size, 0.5 * size],
    [-0.6 * size, -0.5 * size],
  ];
  const c = Math.cos(yaw);
  const s = Math.sin(yaw);
  return pts.map(([lx, ly]) => [x + c * lx - s * ly, y + s * lx + c * ly]);
}

const FAN_HALF_ANGLE = Math.PI / 4;

function depthFanPoints(x: number, y: number, yaw: number,
                        depth: number[]): Array<[number, number]> {
  const pts: Array<[number, number]> = [];
  const n = depth.length;
  for (let i = 0; i < n; i += 1) {
    const ang = yaw - FAN_HALF_ANGLE + (2 * FAN_HALF_ANGLE * i) / (n - 1);
    pts.push([x + depth[i] * Math.cos(ang), y + depth[i] * Math.sin(ang)]);
  }
  return pts;
}

export function countByTag(commands: DrawCommand[], tag: string): number {
  return commands.filter((c) => "tag" in c && c.tag === tag).length;
}
