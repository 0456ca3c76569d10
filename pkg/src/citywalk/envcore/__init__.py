"""Batched environment engine."""

from .batch import BatchedEnv, build_batch, EnvConfig, Scheme, StepResult
from .cache import AssetCache, default_cache
from .observe import make_observation, Observation, observe_batch
from .trace import (
    env_config_from_json,
    env_config_to_json,
    EpisodeTraceWriter,
    read_trace,
    trace_record,
)
from .robot import (
    apply_action,
    clamp_action,
    Embodiment,
    integrate_motion,
    KinematicsKind,
    ROBOT_MODELS,
    RobotModel,
    RobotState,
    traversability_maps,
)

__all__ = [
    "AssetCache", "BatchedEnv", "Embodiment", "EnvConfig", "KinematicsKind",
    "Observation", "ROBOT_MODELS", "RobotModel", "RobotState", "Scheme",
    "StepResult", "apply_action", "build_batch", "clamp_action",
    "EpisodeTraceWriter", "env_config_from_json", "env_config_to_json",
    "read_trace", "trace_record",
    "default_cache", "integrate_motion", "make_observation", "observe_batch",
    "traversability_maps",
]
