"""Command-line entry point.

Subcommands: generate, export-occupancy, run-nav, run-traverse, perf,
serve, inspect. Every subcommand is reproducible from its flags and seed;
exit code 0 on success, 1 on validation errors, 2 on runtime errors.
"""

import argparse
import json
import os
import sys

from .errors import CitywalkError
from .jsonio import canonical_dumps


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citywalk",
        description="Deterministic urban micromobility simulation and benchmarks.",
    )
    parser.add_argument("--seed", type=int, default=0, help="master seed for the run")
    parser.add_argument("--out", type=str, default=None, help="output file or directory")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress output; errors as JSON on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate scene files")
    g.add_argument("--task", choices=["nav-clear", "nav-static", "nav-dynamic", "traverse"],
                   default=None, help="scene task kind (alternative to --preset)")
    g.add_argument("--preset", choices=["urban-nav-1", "urban-nav-2", "urban-nav-3",
                                        "urban-tra-standard"],
                   default=None, help="named dataset preset")
    g.add_argument("--split", choices=["train", "test"], default="train",
                   help="parameter split for terrain sampling and sizes")
    g.add_argument("--count", type=int, default=1, help="number of scenes to emit")
    g.add_argument("--size", type=float, default=10.0,
                   help="square extent in meters (task mode only)")
    g.add_argument("--density", type=float, default=1.0, help="object density factor")
    g.add_argument("--pedestrians", type=int, default=None,
                   help="crowd agent count (task mode only)")

    e = sub.add_parser("export-occupancy", help="rasterize a scene file to PGM + sidecar")
    e.add_argument("--scene", required=True, help="scene JSON file")
    e.add_argument("--resolution", type=float, default=None,
                   help="override grid resolution in meters")

    n = sub.add_parser("run-nav", help="run navigation episodes with a policy")
    n.add_argument("--task", choices=["nav-clear", "nav-static", "nav-dynamic"],
                   required=True, help="navigation subset")
    n.add_argument("--split", choices=["train", "test"], default="train",
                   help="scene split to evaluate on")
    n.add_argument("--episodes", type=int, default=256, help="episode count")
    n.add_argument("--policy", choices=["baseline"], default="baseline",
                   help="navigation policy")
    n.add_argument("--robot", choices=["wheeled", "quadruped", "wheeled_legged", "humanoid"],
                   default="quadruped", help="robot model")
    n.add_argument("--spl", choices=["standard", "paper-literal"], default="standard",
                   help="SPL variant to report")

    t = sub.add_parser("run-traverse", help="run the long-horizon traverse task")
    t.add_argument("--mode", choices=["ai"], default="ai",
                   help="control mode (human modes run through `serve`)")
    t.add_argument("--scene", default=None, help="scene JSON file (default: standard strip)")
    t.add_argument("--robot", choices=["wheeled", "quadruped", "wheeled_legged", "humanoid"],
                   default="quadruped", help="robot model")
    t.add_argument("--decision-interval", type=float, default=10.0,
                   help="decision point spacing in geodesic meters")

    p = sub.add_parser("perf", help="throughput benchmark")
    p.add_argument("--envs", type=int, nargs="+", default=[1, 16, 64, 128, 256],
                   help="parallel environment counts")
    p.add_argument("--size", choices=["small", "medium", "large"], nargs="+",
                   default=["small"], help="scene sizes")
    p.add_argument("--steps", type=int, default=1000, help="timed steps per environment")
    p.add_argument("--repeats", type=int, default=10, help="repeat count per cell")
    p.add_argument("--mode", choices=["step", "step-infer", "step-infer-train-stub"],
                   default="step", help="work included per step")
    p.add_argument("--robot", choices=["wheeled", "quadruped", "wheeled_legged", "humanoid"],
                   default="quadruped", help="robot model")
    p.add_argument("--csv", default=None, help="also write the report as CSV here")
    p.add_argument("--dat", default=None, help="also write gnuplot dat curves here")
    p.add_argument("--compare-schemes", action="store_true",
                   help="run the async-vs-sync comparison instead of the matrix")

    s = sub.add_parser("serve", help="serve live sessions over websocket")
    s.add_argument("--scene", default=None, help="scene JSON file (default: standard strip)")
    s.add_argument("--mode", choices=["human", "human-ai-1", "human-ai-2", "ai"],
                   default="human-ai-1", help="control mode")
    s.add_argument("--port", type=int, default=8732, help="listen port")
    s.add_argument("--host", default="127.0.0.1", help="bind address")
    s.add_argument("--decision-interval", type=float, default=10.0,
                   help="decision point spacing in geodesic meters")
    s.add_argument("--robot", choices=["wheeled", "quadruped", "wheeled_legged", "humanoid"],
                   default="quadruped", help="robot model")
    s.add_argument("--auto-ai-after", type=float, default=None,
                   help="seconds before an unanswered decision defaults to AI")
    s.add_argument("--tick-hz", type=float, default=20.0, help="simulation rate")
    s.add_argument("--static-dir", default=None, help="serve this directory over HTTP")

    i = sub.add_parser("inspect", help="summarize a scene file")
    i.add_argument("--scene", required=True, help="scene JSON file")
    return parser


_TASK_OF_FLAG = {
    "nav-clear": "urban-nav-1",
    "nav-static": "urban-nav-2",
    "nav-dynamic": "urban-nav-3",
}


def _cmd_generate(args) -> int:
    from .bench.presets import nav_spec, traverse_standard_spec
    from .rng import child_seed
    from .urbangen.scene import generate_scene, save_scene
    from .urbangen.types import SceneSpec, Split, TaskKind

    split = Split.TRAIN if args.split == "train" else Split.TEST
    if args.preset is None and args.task is None:
        print("either --preset or --task is required", file=sys.stderr)
        return 1

    specs = []
    if args.preset == "urban-tra-standard" or (args.task == "traverse" and not args.preset):
        for i in range(args.count):
            specs.append(traverse_standard_spec(child_seed(args.seed, "traverse", i)))
        stem = "urban-tra-standard"
    elif args.preset is not None:
        for i in range(args.count):
            specs.append(nav_spec(args.preset, split,
                                  child_seed(args.seed, args.preset, split.value, i)))
        stem = f"{args.preset}-{args.split}"
    else:
        task = {"nav-clear": TaskKind.NAV_CLEAR, "nav-static": TaskKind.NAV_STATIC,
                "nav-dynamic": TaskKind.NAV_DYNAMIC}[args.task]
        peds = args.pedestrians or 0
        for i in range(args.count):
            specs.append(SceneSpec(
                seed=child_seed(args.seed, args.task, i),
                extent_m=(args.size, args.size), task_kind=task, split=split,
                object_density=args.density, pedestrian_count=peds))
        stem = args.task

    out = args.out or "."
    single_file = args.count == 1 and out.endswith(".json")
    if not single_file:
        os.makedirs(out, exist_ok=True)
    for i, spec in enumerate(specs):
        scene = generate_scene(spec)
        path = out if single_file else os.path.join(out, f"{stem}-{i:04d}.json")
        save_scene(scene, path)
        if not args.quiet:
            print(path)
    return 0


def _cmd_export_occupancy(args) -> int:
    from .urbangen.occupancy import export_occupancy, rasterize_occupancy
    from .urbangen.scene import load_scene

    scene = load_scene(args.scene)
    grid = rasterize_occupancy(scene, args.resolution)
    prefix = args.out or os.path.splitext(args.scene)[0]
    if prefix.endswith(".pgm"):
        prefix = prefix[:-4]
    path = export_occupancy(grid, prefix)
    if not args.quiet:
        print(path)
    return 0


def _cmd_run_nav(args) -> int:
    from .bench.runner import run_nav_benchmark
    from .urbangen.types import Split

    split = Split.TRAIN if args.split == "train" else Split.TEST
    progress = None
    if not args.quiet:
        def progress(done, total):
            if done % 16 == 0 or done == total:
                print(f"  episode {done}/{total}", file=sys.stderr)
    report, _ = run_nav_benchmark(
        _TASK_OF_FLAG[args.task], split, args.episodes, seed=args.seed,
        robot=args.robot, spl_variant=args.spl, progress=progress)
    text = canonical_dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _cmd_run_traverse(args) -> int:
    from .bench.runner import run_traverse
    from .urbangen.scene import load_scene

    spec = None
    if args.scene:
        spec = load_scene(args.scene).spec
    report = run_traverse(mode=args.mode, seed=args.seed, robot=args.robot,
                          decision_interval_m=args.decision_interval, scene_spec=spec)
    text = canonical_dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _cmd_perf(args) -> int:
    from .perfbench.harness import (
        compare_schemes, PerfConfig, report_to_csv, report_to_dat,
        run_throughput_bench,
    )

    if args.compare_schemes:
        out = compare_schemes(k=max(args.envs), seed=args.seed, robot=args.robot)
        print(canonical_dumps(out))
        return 0
    mode = {"step": "StepOnly", "step-infer": "StepInfer",
            "step-infer-train-stub": "StepInferTrainStub"}[args.mode]
    cfg = PerfConfig(env_counts=args.envs, sizes=[s.capitalize() for s in args.size],
                     steps_per_agent=args.steps, repeats=args.repeats, mode=mode,
                     robot=args.robot, seed=args.seed)
    progress = None
    if not args.quiet:
        def progress(size, env_count, rep, out):
            print(f"  {size} x{env_count} rep{rep}: {out['fps']:.0f} fps",
                  file=sys.stderr)
    report = run_throughput_bench(cfg, progress=progress)
    text = canonical_dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(report_to_csv(report))
    if args.dat:
        with open(args.dat, "w", encoding="utf-8") as fh:
            fh.write(report_to_dat(report))
    print(text)
    return 0


def _cmd_serve(args) -> int:
    from .server.app import serve

    serve(scene_path=args.scene, mode=args.mode, host=args.host, port=args.port,
          decision_interval_m=args.decision_interval, robot=args.robot,
          seed=args.seed, auto_ai_after_s=args.auto_ai_after,
          tick_hz=args.tick_hz, static_dir=args.static_dir, quiet=args.quiet)
    return 0


def _cmd_inspect(args) -> int:
    from .urbangen.occupancy import rasterize_occupancy
    from .urbangen.scene import load_scene, scene_hash
    from .urbangen.types import CellLabel, Zone

    scene = load_scene(args.scene)
    grid = rasterize_occupancy(scene)
    zones = scene.zones.counts()
    labels = {
        label.name: int((grid.labels == int(label)).sum()) for label in CellLabel
    }
    summary = {
        "hash": scene_hash(scene),
        "spec": scene.spec.to_dict(),
        "grid_shape": list(grid.labels.shape),
        "zone_cells": zones,
        "label_cells": labels,
        "objects": len(scene.objects),
        "routes": len(scene.routes),
        "blocks": len(scene.blocks.nodes),
        "placement_overflow": scene.placement_overflow,
        "elevation_range_m": [float(grid.elevation.min()), float(grid.elevation.max())],
    }
    print(canonical_dumps(summary))
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "export-occupancy": _cmd_export_occupancy,
    "run-nav": _cmd_run_nav,
    "run-traverse": _cmd_run_traverse,
    "perf": _cmd_perf,
    "serve": _cmd_serve,
    "inspect": _cmd_inspect,
}


def run_cli(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError, CitywalkError) as exc:
        _report_error(args, exc, kind="validation")
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _report_error(args, exc, kind="runtime")
        return 2


def _report_error(args, exc, kind):
    if getattr(args, "quiet", False):
        print(json.dumps({"error": kind, "type": type(exc).__name__,
                          "message": str(exc)}), file=sys.stderr)
    else:
        print(f"{kind} error: {exc}", file=sys.stderr)


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
