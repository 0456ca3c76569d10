"""Throughput harness tests (small smoke cells; the scaling run lives in
the acceptance suite)."""

import numpy as np

from citywalk.perfbench import (
    compare_schemes,
    PerfConfig,
    report_to_csv,
    report_to_dat,
    run_throughput_bench,
    SCENE_SIZES,
    size_spec,
)


def test_size_specs_match_object_counts(cache):
    from citywalk.urbangen import generate_scene

    for name, (side, objects) in SCENE_SIZES.items():
        spec = size_spec(name, seed=3)
        assert spec.extent_m == (side, side)
        if name == "Small":  # generating the large ones here is wasteful
            scene = generate_scene(spec)
            assert len(scene.objects) == objects


def test_single_cell_smoke():
    cfg = PerfConfig(env_counts=[1], sizes=["Small"], steps_per_agent=30,
                     repeats=1, warmup_steps=5)
    rep = run_throughput_bench(cfg)
    assert len(rep["cells"]) == 1
    cell = rep["cells"][0]
    assert cell["error"] is None
    assert cell["fps_mean"] > 0
    assert cell["peak_rss_bytes"] > 0
    assert rep["machine"]["cpu_count"] >= 1


def test_report_serializations():
    cfg = PerfConfig(env_counts=[1], sizes=["Small"], steps_per_agent=10,
                     repeats=1, warmup_steps=2)
    rep = run_throughput_bench(cfg)
    csv_text = report_to_csv(rep)
    assert "fps_mean" in csv_text.splitlines()[0]
    dat_text = report_to_dat(rep)
    assert dat_text.startswith("# size=Small")


def test_stub_modes_run():
    for mode in ("StepInfer", "StepInferTrainStub"):
        cfg = PerfConfig(env_counts=[2], sizes=["Small"], steps_per_agent=5,
                         repeats=1, warmup_steps=1, mode=mode, train_stub_ms=0.5)
        rep = run_throughput_bench(cfg)
        assert rep["cells"][0]["fps_mean"] > 0


def test_compare_schemes_semantics():
    out = compare_schemes(k=4, seed=2, steps=30)
    assert out["async_distinct_scenes"] == 4
    assert out["sync_distinct_scenes"] == 1
    assert out["identical_behavior_at_k1"] is True


def test_monotone_batching_over_env_ladder():
    # aggregate FPS is non-decreasing along the benchmark's env-count
    # ladder (vectorized batching amortizes fixed cost; the gain shows
    # from the first ladder step onward)
    counts = [1, 16, 64]
    cfg = PerfConfig(env_counts=counts, sizes=["Small"], steps_per_agent=100,
                     repeats=1, warmup_steps=10)
    rep = run_throughput_bench(cfg)
    cells = {c["env_count"]: c["fps_mean"] for c in rep["cells"]}
    ordered = [cells[k] for k in counts]
    for prev, nxt in zip(ordered, ordered[1:]):
        assert nxt >= prev * 0.9, cells
