"""Episode traces and environment configuration files.

Traces are newline-delimited JSON records per environment:
{tick, env, pose, action, reward, events}; gzip-compressible. The env
configuration file captures everything needed to rebuild a batch:
{spec, robot, scheme, k, horizon, dt}.
"""

import json

from ..jsonio import canonical_dumps
from ..urbangen.types import SceneSpec
from .batch import BatchedEnv, EnvConfig, Scheme


def trace_record(env_index: int, tick: int, pose, action, reward: float,
                 events: dict) -> dict:
    return {
        "tick": int(tick),
        "env": int(env_index),
        "pose": {"x": float(pose[0]), "y": float(pose[1]), "yaw": float(pose[2])},
        "action": [float(action[0]), float(action[1])],
        "reward": float(reward),
        "events": {k: (bool(v) if isinstance(v, (bool,)) else float(v))
                   for k, v in events.items()},
    }


class EpisodeTraceWriter:
    """Streams step records for a batch to a text file handle."""

    def __init__(self, fh):
        self.fh = fh

    def record_step(self, env: BatchedEnv, actions, results):
        for i, res in enumerate(results):
            rec = trace_record(
                i, int(env.tick[i]),
                (env.x[i], env.y[i], env.yaw[i]),
                actions[i], res.reward, res.events,
            )
            self.fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")))
            self.fh.write("\n")


def read_trace(fh) -> list:
    return [json.loads(line) for line in fh if line.strip()]


def env_config_to_json(spec: SceneSpec, config: EnvConfig, scheme: Scheme,
                       k: int) -> str:
    return canonical_dumps({
        "spec": spec.to_dict(),
        "robot": config.robot,
        "scheme": Scheme(scheme).value,
        "k": int(k),
        "horizon": int(config.horizon),
        "dt": float(config.dt),
    })


def env_config_from_json(text: str):
    doc = json.loads(text)
    spec = SceneSpec.from_dict(doc["spec"])
    config = EnvConfig(robot=doc["robot"], horizon=int(doc["horizon"]),
                       dt=float(doc["dt"]))
    return spec, config, Scheme(doc["scheme"]), int(doc["k"])
