import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { describe, expect, it } from "vitest";

import { makeFrame, parseFrame, rleDecode, SchemaViolation, validateFrame } from "../src/protocol.js";
import { WIRE_SCHEMA } from "../src/schema.js";

const here = dirname(fileURLToPath(import.meta.url));

describe("shared schema", () => {
  it("matches the server's schema file byte for byte (structurally)", () => {
    const serverSchema = JSON.parse(readFileSync(
      join(here, "..", "..", "src", "citywalk", "data", "wire_schema.json"), "utf-8"));
    expect(JSON.parse(JSON.stringify(WIRE_SCHEMA))).toEqual(serverSchema);
  });

  it("covers every protocol frame type", () => {
    expect(Object.keys(WIRE_SCHEMA.types).sort()).toEqual([
      "decision_response", "end", "error", "hello", "metrics",
      "decision_request", "release", "scene", "state", "teleop",
    ].sort());
  });
});

describe("outbound frame validation", () => {
  it("accepts well-formed client frames", () => {
    const f = makeFrame("teleop", "s", 4, { vx: 1, vy: 0 });
    expect(validateFrame(f, "client")).toEqual(f);
    expect(() => validateFrame(f, "server")).toThrow(SchemaViolation);
  });

  it("rejects missing payload fields", () => {
    expect(() => makeFrame("teleop", "s", 0, { vx: 1 })).toThrow(SchemaViolation);
    expect(() => makeFrame("decision_response", "s", 0, { id: 1 }))
      .toThrow(SchemaViolation);
  });

  it("rejects unknown types and malformed json", () => {
    expect(() => validateFrame({ type: "nope", session: "s", tick: 0, payload: {} }))
      .toThrow(SchemaViolation);
    expect(() => parseFrame("{oops")).toThrow(SchemaViolation);
  });

  it("every outbound frame the client builds validates against the schema", () => {
    const outbound: Array<[string, Record<string, unknown>]> = [
      ["hello", {}],
      ["teleop", { vx: 0.5, vy: -0.25 }],
      ["decision_response", { id: 3, choice: { takeover: true } }],
      ["release", {}],
    ];
    for (const [type, payload] of outbound) {
      const f = makeFrame(type as never, "sess", 10, payload);
      expect(validateFrame(f, "client")).toBeTruthy();
    }
  });
});

describe("rle decoding", () => {
  it("round-trips simple runs", () => {
    expect(Array.from(rleDecode([5, 3, 2, 1]))).toEqual([5, 5, 5, 2]);
    expect(Array.from(rleDecode([]))).toEqual([]);
  });
});
