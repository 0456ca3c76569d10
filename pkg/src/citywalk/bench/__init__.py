"""Benchmark tasks, rewards, metrics, dispatch, and the scripted baseline."""

from .baseline import BaselinePolicy, baseline_policy_act
from .episodes import aggregate_nav_metrics, EpisodeLog, nav_metric_values, nav_report, Outcome
from .presets import (
    dataset_specs,
    nav_spec,
    NAV_PRESETS,
    NAV_TERRAIN_MIX,
    traverse_standard_spec,
    TRAVERSE_TERRAIN_MIX,
)
from .reward import compute_reward, reward_batch, reward_terms, RewardConfig, track_term
from .runner import run_nav_benchmark, run_nav_episode, run_traverse, TraverseRunner
from .traverse import (
    aggregate_traverse_metrics,
    classify_interval,
    ControlDecision,
    ControlMode,
    dispatch_control,
    LOC_KEYS,
    NAV_KEYS,
    PolicyBinding,
    TraverseSession,
)

__all__ = [
    "BaselinePolicy", "ControlDecision", "ControlMode", "EpisodeLog", "LOC_KEYS",
    "NAV_KEYS", "NAV_PRESETS", "NAV_TERRAIN_MIX", "Outcome", "PolicyBinding",
    "RewardConfig", "TRAVERSE_TERRAIN_MIX", "TraverseRunner", "TraverseSession",
    "aggregate_nav_metrics", "aggregate_traverse_metrics", "baseline_policy_act",
    "classify_interval", "compute_reward", "dataset_specs", "dispatch_control",
    "nav_metric_values", "nav_report", "nav_spec", "reward_batch", "reward_terms",
    "run_nav_benchmark", "run_nav_episode", "run_traverse", "track_term",
    "traverse_standard_spec",
]
