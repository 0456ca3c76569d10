"""Benchmark dataset presets.

The navigation presets mirror the standard protocol: three subsets by
scene condition, 10 m x 10 m training scenes (4 objects, 2 pedestrians in
the dynamic subset) and 15 m x 15 m testing scenes at matching areal
density (3 pedestrians). The traverse preset is the 120 m x 10 m
six-segment strip: even and uneven halves, each with a clear, a static,
and a dynamic segment.
"""

from dataclasses import replace

from ..rng import child_seed
from ..urbangen.types import SceneSpec, Split, TaskKind

NAV_TERRAIN_MIX = {"Flat": 0.7, "Slope": 0.1, "Stair": 0.0, "Rough": 0.2}
TRAVERSE_TERRAIN_MIX = {"Flat": 0.4, "Slope": 0.2, "Stair": 0.2, "Rough": 0.2}

NAV_PRESETS = {
    "urban-nav-1": TaskKind.NAV_CLEAR,
    "urban-nav-2": TaskKind.NAV_STATIC,
    "urban-nav-3": TaskKind.NAV_DYNAMIC,
}


def nav_spec(preset: str, split: Split, seed: int) -> SceneSpec:
    task = NAV_PRESETS[preset]
    split = Split(split)
    size = 10.0 if split == Split.TRAIN else 15.0
    peds = 0
    if task == TaskKind.NAV_DYNAMIC:
        peds = 2 if split == Split.TRAIN else 3
    return SceneSpec(
        seed=seed,
        extent_m=(size, size),
        task_kind=task,
        split=split,
        object_density=1.0,
        pedestrian_count=peds,
        terrain_mix=dict(NAV_TERRAIN_MIX),
    )


def dataset_specs(preset: str, split: Split, count: int, base_seed: int = 0):
    """The `count` scene specs of one dataset subset."""
    return [nav_spec(preset, split, child_seed(base_seed, preset, Split(split).value, i))
            for i in range(count)]


def traverse_standard_spec(seed: int, pedestrians: int = 8) -> SceneSpec:
    """120 m x 10 m six-segment strip; terrain on the uneven half only."""
    return SceneSpec(
        seed=seed,
        extent_m=(120.0, 10.0),
        task_kind=TaskKind.TRAVERSE,
        split=Split.TRAIN,
        object_density=1.0,
        pedestrian_count=pedestrians,
        terrain_mix=dict(TRAVERSE_TERRAIN_MIX),
    )


def with_seed(spec: SceneSpec, seed: int) -> SceneSpec:
    return replace(spec, seed=seed)
