"""Throughput benchmark harness."""

from .harness import (
    compare_schemes,
    MODES,
    PerfConfig,
    report_to_csv,
    report_to_dat,
    run_throughput_bench,
    SCENE_SIZES,
    size_spec,
)

__all__ = [
    "MODES", "PerfConfig", "SCENE_SIZES", "compare_schemes", "report_to_csv",
    "report_to_dat", "run_throughput_bench", "size_spec",
]
