import { describe, expect, it } from "vitest";

import { CitywalkClient } from "../src/client.js";
import { handleInputTick, teleopVector } from "../src/input.js";
import { makeFrame } from "../src/protocol.js";

function scripted(): { client: CitywalkClient; sent: string[] } {
  const sent: string[] = [];
  const client = new CitywalkClient((text) => sent.push(text));
  client.onOpen();
  client.onMessage(JSON.stringify(makeFrame("scene", "s", 0, scenePayload())));
  return { client, sent };
}

function scenePayload() {
  return {
    digest: "d".repeat(64), resolution: 0.1, shape: [10, 10],
    labels_rle: [2, 100], zones_rle: [2, 100], goal: [5, 5], mode: "human-ai-1",
    dt: 0.05, extent_m: [1, 1], objects: [], role: "controller",
  };
}

function statePayload(open: boolean) {
  return {
    robot: { x: 0.5, y: 0.5, yaw: 0, vx: 0, vy: 0, elevation: 0, goal: [5, 5], tick: 1 },
    goal: [5, 5], agents: [], controller: open ? "Human" : "AI",
    intervention_open: open, paused: false, pending_decision: false, depth: [],
  };
}

describe("guarded sends", () => {
  it("keyboard teleop maps WASD to ego commands", () => {
    expect(teleopVector(new Set(["w"]))).toEqual([1, 0]);
    expect(teleopVector(new Set(["s"]))).toEqual([-1, 0]);
    expect(teleopVector(new Set(["a"]))).toEqual([0, 1]);
    expect(teleopVector(new Set(["w", "d"]))).toEqual([1, -1]);
    expect(teleopVector(new Set(["x"]))).toBeNull();
  });

  it("teleop is dropped while no intervention is open", () => {
    const { client, sent } = scripted();
    const before = sent.length;
    expect(handleInputTick(client, new Set(["w"]))).toBe(false);
    expect(sent.length).toBe(before);
  });

  it("teleop flows while an intervention is open", () => {
    const { client, sent } = scripted();
    client.onMessage(JSON.stringify(makeFrame("state", "s", 2, statePayload(true))));
    const before = sent.length;
    expect(handleInputTick(client, new Set(["w"]))).toBe(true);
    const frame = JSON.parse(sent[sent.length - 1]);
    expect(frame.type).toBe("teleop");
    expect(frame.payload).toEqual({ vx: 1, vy: 0 });
    expect(sent.length).toBe(before + 1);
  });

  it("decision responses are sent exactly once per id", () => {
    const { client, sent } = scripted();
    client.onMessage(JSON.stringify(makeFrame("decision_request", "s", 2, {
      id: 7, interval_summary: {}, options: [{ takeover: true }],
    })));
    expect(client.respondDecision({ takeover: true })).toBe(true);
    expect(client.respondDecision({ takeover: true })).toBe(false);
    const frames = sent.map((t) => JSON.parse(t)).filter((f) => f.type === "decision_response");
    expect(frames.length).toBe(1);
    expect(frames[0].payload.id).toBe(7);
  });

  it("no teleop after an end frame", () => {
    const { client, sent } = scripted();
    client.onMessage(JSON.stringify(makeFrame("state", "s", 2, statePayload(true))));
    client.onMessage(JSON.stringify(makeFrame("end", "s", 4, { report: {} })));
    const before = sent.length;
    expect(client.teleop(1, 0)).toBe(false);
    expect(client.release()).toBe(false);
    expect(sent.length).toBe(before);
  });

  it("no teleop after an error frame", () => {
    const { client, sent } = scripted();
    client.onMessage(JSON.stringify(makeFrame("state", "s", 2, statePayload(true))));
    client.onMessage(JSON.stringify(makeFrame("error", "s", 4, { message: "boom" })));
    const before = sent.length;
    expect(client.teleop(1, 0)).toBe(false);
    expect(sent.length).toBe(before);
  });
});

describe("snapshot ring", () => {
  it("rendering reads the latest complete snapshot", () => {
    const { client } = scripted();
    for (let t = 2; t <= 40; t += 2) {
      client.onMessage(JSON.stringify(makeFrame("state", "s", t, statePayload(false))));
    }
    expect(client.latestState()?.tick).toBe(40);
    expect(client.snapshots.size).toBeLessThanOrEqual(128);
  });
});
