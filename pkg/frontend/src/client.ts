// Client state machine: guarded sends, snapshot ring, HUD mirror.
//
// Transport-agnostic: the owner wires `send` to a websocket and feeds
// inbound text through onMessage. Input is sent only while an
// intervention is open or a decision is pending, and nothing is sent
// after an end or error frame.

import { hudOnState, newHud, type HudCounters } from "./hud.js";
import {
  makeFrame,
  parseFrame,
  type DecisionRequestPayload,
  type Frame,
  type ScenePayload,
  type StatePayload,
} from "./protocol.js";
import { RingBuffer } from "./ring.js";

export type ConnectionStatus = "connecting" | "open" | "ended" | "errored";

export interface Snapshot {
  tick: number;
  state: StatePayload;
}

export class CitywalkClient {
  status: ConnectionStatus = "connecting";
  scene: ScenePayload | null = null;
  sceneTick = 0;
  snapshots = new RingBuffer<Snapshot>(128);
  pendingDecision: DecisionRequestPayload | null = null;
  hud: HudCounters = newHud();
  finalReport: Record<string, unknown> | null = null;
  lastMetrics: Record<string, unknown> | null = null;
  lastError: string | null = null;
  interventionActive = false;
  private answeredDecisions = new Set<number>();
  private session = "";

  constructor(private readonly send: (text: string) => void) {}

  // -- inbound -----------------------------------------------------------

  onOpen(): void {
    this.status = "open";
    this.sendFrame(makeFrame("hello", this.session, 0, {}));
  }

  onMessage(text: string): Frame | null {
    const frame = parseFrame(text, "server");
    this.session = frame.session;
    switch (frame.type) {
      case "scene":
        this.scene = frame.payload as unknown as ScenePayload;
        this.sceneTick = frame.tick;
        break;
      case "state": {
        const state = frame.payload as unknown as StatePayload;
        this.snapshots.push({ tick: frame.tick, state });
        this.interventionActive = state.intervention_open;
        if (this.scene !== null) {
          hudOnState(this.hud, frame.tick, state, this.scene.dt);
        }
        break;
      }
      case "decision_request":
        this.pendingDecision = frame.payload as unknown as DecisionRequestPayload;
        break;
      case "metrics":
        this.lastMetrics = frame.payload.report as Record<string, unknown>;
        break;
      case "end":
        this.finalReport = frame.payload.report as Record<string, unknown>;
        this.status = "ended";
        break;
      case "error":
        this.lastError = String(frame.payload.message);
        this.status = "errored";
        break;
      default:
        break;
    }
    return frame;
  }

  // -- outbound (guarded) ---------------------------------------------------

  private canSend(): boolean {
    return this.status === "open";
  }

  private sendFrame(frame: Frame): boolean {
    this.send(JSON.stringify(frame));
    return true;
  }

  teleop(vx: number, vy: number): boolean {
    if (!this.canSend() || !this.interventionActive) return false;
    return this.sendFrame(makeFrame("teleop", this.session, this.latestTick(), {
      vx: clamp(vx), vy: clamp(vy),
    }));
  }

  respondDecision(choice: Record<string, unknown>): boolean {
    if (!this.canSend() || this.pendingDecision === null) return false;
    const id = this.pendingDecision.id;
    if (this.answeredDecisions.has(id)) return false;
    this.answeredDecisions.add(id);
    this.pendingDecision = null;
    if ((choice as { takeover?: boolean }).takeover) {
      // optimistic: the first stepped tick confirms via its state frame
      this.interventionActive = true;
    }
    return this.sendFrame(makeFrame("decision_response", this.session,
      this.latestTick(), { id, choice }));
  }

  release(): boolean {
    if (!this.canSend() || !this.interventionActive) return false;
    this.interventionActive = false;
    return this.sendFrame(makeFrame("release", this.session, this.latestTick(), {}));
  }

  latestTick(): number {
    const snap = this.snapshots.latest();
    return snap === undefined ? this.sceneTick : snap.tick;
  }

  latestState(): Snapshot | undefined {
    return this.snapshots.latest();
  }
}

function clamp(v: number): number {
  return Math.max(-1, Math.min(1, v));
}
