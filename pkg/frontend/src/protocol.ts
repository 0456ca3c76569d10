// Wire protocol types and validation against the shared schema.

import { WIRE_SCHEMA } from "./schema.js";

export type FrameType =
  | "hello"
  | "scene"
  | "state"
  | "decision_request"
  | "decision_response"
  | "teleop"
  | "release"
  | "metrics"
  | "end"
  | "error";

export interface Frame {
  type: FrameType;
  session: string;
  tick: number;
  payload: Record<string, unknown>;
}

export interface AgentSnapshot {
  id: number;
  x: number;
  y: number;
  vx: number;
  vy: number;
  radius: number;
  kind: number;
}

export interface RobotSnapshot {
  x: number;
  y: number;
  yaw: number;
  vx: number;
  vy: number;
  elevation: number;
  goal: [number, number];
  tick: number;
}

export interface StatePayload {
  robot: RobotSnapshot;
  goal: [number, number];
  agents: AgentSnapshot[];
  controller: "Human" | "AI";
  intervention_open: boolean;
  paused: boolean;
  pending_decision: boolean;
  depth: number[];
}

export interface ScenePayload {
  digest: string;
  resolution: number;
  shape: [number, number];
  labels_rle: number[];
  zones_rle: number[];
  goal: [number, number];
  mode: string;
  dt: number;
  extent_m: [number, number];
  objects: Array<Record<string, unknown>>;
  role: "controller" | "viewer";
}

export interface DecisionRequestPayload {
  id: number;
  interval_summary: Record<string, unknown>;
  options: Array<Record<string, unknown>>;
}

type Checker = (v: unknown) => boolean;

const TYPE_CHECKS: Record<string, Checker> = {
  string: (v) => typeof v === "string",
  integer: (v) => typeof v === "number" && Number.isInteger(v),
  number: (v) => typeof v === "number" && Number.isFinite(v),
  boolean: (v) => typeof v === "boolean",
  array: (v) => Array.isArray(v),
  object: (v) => typeof v === "object" && v !== null && !Array.isArray(v),
};

export class SchemaViolation extends Error {}

export function validateFrame(frame: unknown, direction?: "client" | "server"): Frame {
  if (typeof frame !== "object" || frame === null || Array.isArray(frame)) {
    throw new SchemaViolation("frame is not an object");
  }
  const f = frame as Record<string, unknown>;
  const required = WIRE_SCHEMA.frame.required as Record<string, string>;
  for (const [name, kind] of Object.entries(required)) {
    if (!(name in f)) throw new SchemaViolation(`missing field ${name}`);
    if (!TYPE_CHECKS[kind](f[name])) {
      throw new SchemaViolation(`field ${name} must be ${kind}`);
    }
  }
  const types = WIRE_SCHEMA.types as Record<
    string,
    { from: string; payload: Record<string, string> }
  >;
  const spec = types[f.type as string];
  if (spec === undefined) throw new SchemaViolation(`unknown frame type ${f.type}`);
  if (direction !== undefined && spec.from !== direction) {
    throw new SchemaViolation(`${f.type} frames come from the ${spec.from}`);
  }
  const payload = f.payload as Record<string, unknown>;
  for (const [name, kind] of Object.entries(spec.payload)) {
    if (!(name in payload)) {
      throw new SchemaViolation(`${f.type}: missing payload field ${name}`);
    }
    if (!TYPE_CHECKS[kind](payload[name])) {
      throw new SchemaViolation(`${f.type}: payload field ${name} must be ${kind}`);
    }
  }
  return f as unknown as Frame;
}

export function makeFrame(
  type: FrameType,
  session: string,
  tick: number,
  payload: Record<string, unknown>,
): Frame {
  return validateFrame({ type, session, tick, payload });
}

export function parseFrame(text: string, direction?: "client" | "server"): Frame {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new SchemaViolation(`invalid JSON: ${err}`);
  }
  return validateFrame(doc, direction);
}

export function rleDecode(pairs: number[]): Uint8Array {
  let total = 0;
  for (let i = 1; i < pairs.length; i += 2) total += pairs[i];
  const out = new Uint8Array(total);
  let at = 0;
  for (let i = 0; i < pairs.length; i += 2) {
    out.fill(pairs[i], at, at + pairs[i + 1]);
    at += pairs[i + 1];
  }
  return out;
}
