"""Throughput benchmarking: random-action stepping across env counts and
scene sizes, plus the async-vs-sync scheme comparison.

FPS is aggregate environment steps per wall-clock second across the
batch. Scene construction is excluded from the timed section and
reported separately.
"""

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np
import psutil

from ..envcore.batch import BatchedEnv, EnvConfig, Scheme
from ..rng import child_seed, make_rng
from ..urbangen.types import SceneSpec, Split, TaskKind

# size name -> (side_m, object_count)
SCENE_SIZES = {
    "Small": (10.0, 4),
    "Medium": (20.0, 8),
    "Large": (50.0, 16),
}

MODES = ("StepOnly", "StepInfer", "StepInferTrainStub")


@dataclass
class PerfConfig:
    env_counts: list = field(default_factory=lambda: [1, 16, 64, 128, 256])
    sizes: list = field(default_factory=lambda: ["Small", "Medium", "Large"])
    steps_per_agent: int = 1000
    repeats: int = 10
    warmup_steps: int = 50
    robot: str = "quadruped"
    mode: str = "StepOnly"
    seed: int = 0
    train_stub_ms: float = 2.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        for s in self.sizes:
            if s not in SCENE_SIZES:
                raise ValueError(f"unknown scene size {s!r}")


def size_spec(size: str, seed: int) -> SceneSpec:
    side, objects = SCENE_SIZES[size]
    area = side * side
    base = 4.0 * area / 100.0
    return SceneSpec(
        seed=seed,
        extent_m=(side, side),
        task_kind=TaskKind.NAV_STATIC,
        split=Split.TRAIN,
        object_density=objects / base,
        pedestrian_count=0,
        terrain_mix={"Flat": 0.7, "Slope": 0.1, "Stair": 0.0, "Rough": 0.2},
    )


class _StubPolicy:
    """Fixed-cost stand-in for policy inference (and a training stub)."""

    def __init__(self, seed: int, train_stub_ms: float = 0.0):
        rng = make_rng(seed, "stub")
        self.w1 = rng.normal(size=(128, 64)).astype(np.float32)
        self.w2 = rng.normal(size=(64, 2)).astype(np.float32)
        self.train_stub_ms = train_stub_ms

    def infer(self, depth):
        h = np.tanh(depth @ self.w1)
        return np.tanh(h @ self.w2)

    def train_step(self):
        # synthetic gradient-update cost, fixed per batch
        deadline = time.perf_counter() + self.train_stub_ms / 1000.0
        x = self.w1
        while time.perf_counter() < deadline:
            x = np.tanh(x)


def _run_cell(env_count: int, size: str, config: PerfConfig, repeat: int) -> dict:
    spec = size_spec(size, child_seed(config.seed, "perf-scene", size))
    env_cfg = EnvConfig(robot=config.robot, auto_reset=True)
    proc = psutil.Process()
    t_build0 = time.perf_counter()
    env = BatchedEnv(spec, Scheme.ASYNC, master_seed=child_seed(config.seed, size, repeat),
                     k=env_count, config=env_cfg)
    build_s = time.perf_counter() - t_build0

    rng = make_rng(config.seed, "perf-actions", size, env_count, repeat)
    stub = _StubPolicy(config.seed, config.train_stub_ms) \
        if config.mode != "StepOnly" else None

    def one_step():
        acts = rng.uniform(-1.0, 1.0, (env_count, 2))
        results = env.step_batch(acts)
        if stub is not None:
            depth = np.stack([r.observation.depth for r in results])
            stub.infer(depth)
            if config.mode == "StepInferTrainStub":
                stub.train_step()

    for _ in range(config.warmup_steps):
        one_step()
    peak_rss = proc.memory_info().rss
    t0 = time.perf_counter()
    for k in range(config.steps_per_agent):
        one_step()
        if k % 100 == 99:
            peak_rss = max(peak_rss, proc.memory_info().rss)
    elapsed = time.perf_counter() - t0
    peak_rss = max(peak_rss, proc.memory_info().rss)
    return {
        "fps": env_count * config.steps_per_agent / elapsed,
        "elapsed_s": elapsed,
        "build_s": build_s,
        "peak_rss_bytes": int(peak_rss),
    }


def run_throughput_bench(config: PerfConfig, progress=None) -> dict:
    """The full (env_count x size) matrix at the configured mode."""
    cells = []
    machine = {
        "cpu_count": psutil.cpu_count(logical=True),
        "total_memory_bytes": int(psutil.virtual_memory().total),
    }
    for size in config.sizes:
        for env_count in config.env_counts:
            fps_runs, mem_runs, build_runs = [], [], []
            error = None
            for rep in range(config.repeats):
                try:
                    out = _run_cell(env_count, size, config, rep)
                except MemoryError as exc:
                    error = f"OutOfMemory: {exc}"
                    break
                fps_runs.append(out["fps"])
                mem_runs.append(out["peak_rss_bytes"])
                build_runs.append(out["build_s"])
                if progress is not None:
                    progress(size, env_count, rep, out)
            cell = {
                "size": size,
                "env_count": env_count,
                "mode": config.mode,
                "repeats": len(fps_runs),
                "error": error,
            }
            if fps_runs:
                arr = np.asarray(fps_runs)
                cell.update({
                    "fps_mean": float(arr.mean()),
                    "fps_stderr": float(arr.std(ddof=1) / np.sqrt(arr.size))
                    if arr.size > 1 else 0.0,
                    "peak_rss_bytes": int(max(mem_runs)),
                    "build_s_mean": float(np.mean(build_runs)),
                })
            cells.append(cell)
    return {"machine": machine, "mode": config.mode,
            "steps_per_agent": config.steps_per_agent, "cells": cells}


def compare_schemes(k: int = 8, size: str = "Small", seed: int = 0, steps: int = 200,
                    robot: str = "quadruped") -> dict:
    """Scheme semantics and relative throughput at equal K."""
    spec = size_spec(size, child_seed(seed, "scheme-scene"))
    cfg = EnvConfig(robot=robot, auto_reset=True)

    def _run(scheme, kk):
        env = BatchedEnv(spec, scheme, master_seed=seed, k=kk, config=cfg)
        hashes = set(env.scene_hashes)
        rng = make_rng(seed, "scheme-actions", scheme.value)
        t0 = time.perf_counter()
        for _ in range(steps):
            env.step_batch(rng.uniform(-1, 1, (kk, 2)))
        return env, len(hashes), time.perf_counter() - t0

    _, async_distinct, async_s = _run(Scheme.ASYNC, k)
    _, sync_distinct, sync_s = _run(Scheme.SYNC, k)

    # identical behavior at K=1 with a shared action stream
    traj = {}
    for scheme in (Scheme.ASYNC, Scheme.SYNC):
        env = BatchedEnv(spec, scheme, master_seed=seed, k=1, config=cfg)
        rng = make_rng(seed, "scheme-k1-actions")
        rows = []
        for _ in range(200):
            env.step_batch(rng.uniform(-1, 1, (1, 2)))
            rows.append((float(env.x[0]), float(env.y[0]), float(env.yaw[0])))
        traj[scheme.value] = rows
    identical_k1 = traj["Async"] == traj["Sync"]

    return {
        "k": k,
        "async_distinct_scenes": async_distinct,
        "sync_distinct_scenes": sync_distinct,
        "throughput_ratio_async_over_sync": sync_s / async_s if async_s > 0 else None,
        "identical_behavior_at_k1": identical_k1,
    }


def report_to_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["size", "env_count", "mode", "fps_mean", "fps_stderr",
                     "peak_rss_bytes", "build_s_mean", "repeats", "error"])
    for c in report["cells"]:
        writer.writerow([c["size"], c["env_count"], c["mode"],
                         c.get("fps_mean"), c.get("fps_stderr"),
                         c.get("peak_rss_bytes"), c.get("build_s_mean"),
                         c["repeats"], c["error"]])
    return buf.getvalue()


def report_to_dat(report: dict) -> str:
    """gnuplot-friendly: env_count fps_mean fps_stderr rss, one block per size."""
    lines = []
    for size in sorted({c["size"] for c in report["cells"]}):
        lines.append(f"# size={size} mode={report['mode']}")
        for c in report["cells"]:
            if c["size"] != size or c.get("fps_mean") is None:
                continue
            lines.append(f"{c['env_count']} {c['fps_mean']:.2f} "
                         f"{c['fps_stderr']:.2f} {c.get('peak_rss_bytes', 0)}")
        lines.append("")
    return "\n".join(lines)
