// Shared wire schema. Keep byte-equivalent with the server copy;
// tests/protocol.test.ts enforces the equality.
export const WIRE_SCHEMA = {
  "frame": {
    "required": {
      "payload": "object",
      "session": "string",
      "tick": "integer",
      "type": "string"
    }
  },
  "types": {
    "decision_request": {
      "from": "server",
      "payload": {
        "id": "integer",
        "interval_summary": "object",
        "options": "array"
      }
    },
    "decision_response": {
      "from": "client",
      "payload": {
        "choice": "object",
        "id": "integer"
      }
    },
    "end": {
      "from": "server",
      "payload": {
        "report": "object"
      }
    },
    "error": {
      "from": "server",
      "payload": {
        "message": "string"
      }
    },
    "hello": {
      "from": "client",
      "payload": {}
    },
    "metrics": {
      "from": "server",
      "payload": {
        "report": "object"
      }
    },
    "release": {
      "from": "client",
      "payload": {}
    },
    "scene": {
      "from": "server",
      "payload": {
        "digest": "string",
        "dt": "number",
        "extent_m": "array",
        "goal": "array",
        "labels_rle": "array",
        "mode": "string",
        "objects": "array",
        "resolution": "number",
        "role": "string",
        "shape": "array",
        "zones_rle": "array"
      }
    },
    "state": {
      "from": "server",
      "payload": {
        "agents": "array",
        "controller": "string",
        "depth": "array",
        "goal": "array",
        "intervention_open": "boolean",
        "paused": "boolean",
        "pending_decision": "boolean",
        "robot": "object"
      }
    },
    "teleop": {
      "from": "client",
      "payload": {
        "vx": "number",
        "vy": "number"
      }
    }
  }
} as const;
