"""Command-line entry point.

Verbs: ``sim`` (batch evaluation), ``sweep`` (intrinsic-parameter sweeps),
``curriculum`` (dual-curriculum runs), ``filter`` (feasibility checks and
filtered sampling), ``gridsearch`` (heuristic hyperparameter search), and
``serve`` (bridge server for external policies).

Every output file is deterministic: per-episode seeds are derived as
``seed_base + episode_index`` (user seeds are spread by a large stride so
distinct seeds give disjoint episode streams), floats are written in shortest
round-trip form, and worker-pool chunking never changes results. Set the
``PURSUITSIM_LOG`` environment variable (DEBUG/INFO/WARNING) for log
verbosity on stderr.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import bridge as bridge_mod
from .curriculum import (
    AlwaysCaptureTrainer,
    AlwaysFailTrainer,
    CurriculumConfig,
    HeuristicTrainer,
    run_dual_curriculum,
)
from .dynamics import QuadrotorParams
from .episode import (
    EpisodeOptions,
    EpisodeResult,
    aggregate_metrics,
    materialize_episode_task,
    run_episode,
    run_scenario_batch,
)
from .feasibility import check_task_feasible, task_filter_sample
from .policies import (
    POLICY_FAMILIES,
    GridSearchResult,
    HeuristicPolicy,
    grid_search,
    make_policy_config,
)
from .world import (
    IntrinsicParams,
    PRESET_NAMES,
    RandomizationConfig,
    ScenarioError,
    TaskParams,
    load_scenario,
)

log = logging.getLogger(__name__)

#: Distinct user seeds are spread apart by this stride so their per-episode
#: seed ranges (seed_base + episode_index) never collide.
SEED_STRIDE = 1_000_000_007


def _fmt(value) -> str:
    """Shortest round-trip text for floats; plain text otherwise."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path | None, header: list[str], rows: list[list]) -> str:
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    text = buffer.getvalue()
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return text


def _parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("need at least one seed")
    return seeds


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive count, got {value}")
    return value


def _parse_floats(text: str) -> list[float]:
    try:
        values = [float(s) for s in text.split(",") if s.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid float list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("need at least one value")
    return values


def _load_task(parser: argparse.ArgumentParser, args) -> TaskParams:
    try:
        task = load_scenario(args.scenario)
    except (ScenarioError, OSError) as exc:
        parser.error(f"--scenario: {exc}")
    intrinsic = task.intrinsic
    if getattr(args, "capture_radius", None) is not None:
        intrinsic = dataclasses.replace(intrinsic, capture_radius=args.capture_radius)
    if getattr(args, "evader_speed", None) is not None:
        intrinsic = dataclasses.replace(intrinsic, evader_speed=args.evader_speed)
    return dataclasses.replace(task, intrinsic=intrinsic)


def _episode_options(args) -> EpisodeOptions:
    quad = QuadrotorParams(max_speed=getattr(args, "max_speed", None) or 1.0)
    return EpisodeOptions(
        horizon=getattr(args, "horizon", 800),
        collision_radius=getattr(args, "collision_radius", 0.1),
        evader_mode=getattr(args, "evader_mode", "constant_speed"),
        quad=quad,
    )


# --- batch execution with optional worker pool ------------------------------------


def _run_chunk(spec: tuple) -> list[EpisodeResult]:
    task, config, count, seed_base, options, respawn, slots = spec
    return run_scenario_batch(
        task, config, count, seed_base, options=options, respawn=respawn,
        obstacle_slots=slots,
    )


def run_batch_parallel(
    task: TaskParams,
    config,
    episodes: int,
    seed_base: int,
    options: EpisodeOptions,
    respawn: bool,
    workers: int,
) -> list[EpisodeResult]:
    """Chunk a scenario batch across a process pool; results are chunking-invariant."""
    slots = len(task.external.obstacles)
    if workers <= 1 or episodes <= 1:
        return _run_chunk((task, config, episodes, seed_base, options, respawn, slots))
    import multiprocessing as mp

    workers = min(workers, episodes)
    bounds = np.linspace(0, episodes, workers + 1).astype(int)
    specs = [
        (task, config, int(b - a), seed_base + int(a), options, respawn, slots)
        for a, b in zip(bounds[:-1], bounds[1:])
        if b > a
    ]
    with mp.Pool(processes=workers) as pool:
        chunks = pool.map(_run_chunk, specs)
    return [result for chunk in chunks for result in chunk]


def _seeded_metrics(
    task: TaskParams,
    config,
    episodes: int,
    seeds: list[int],
    options: EpisodeOptions,
    respawn: bool,
    workers: int,
) -> tuple[dict, list[EpisodeResult]]:
    """Metrics per user seed, aggregated as mean/std across seeds."""
    rates, steps = [], []
    all_results: list[EpisodeResult] = []
    for seed in seeds:
        results = run_batch_parallel(
            task, config, episodes, seed * SEED_STRIDE, options, respawn, workers
        )
        metrics = aggregate_metrics(results)
        rates.append(metrics.capture_rate)
        steps.append(metrics.mean_capture_timestep)
        all_results.extend(results)
    summary = {
        "capture_rate": float(np.mean(rates)),
        "capture_rate_std": float(np.std(rates)),
        "capture_timestep_mean": float(np.mean(steps)),
        "capture_timestep_std": float(np.std(steps)),
    }
    return summary, all_results


METRICS_HEADER = [
    "scenario",
    "policy",
    "capture_rate",
    "capture_rate_std",
    "capture_timestep_mean",
    "capture_timestep_std",
    "episodes",
    "seeds",
]


def _metrics_row(scenario: str, policy: str, summary: dict, episodes: int, seeds: list[int]) -> list:
    return [
        scenario,
        policy,
        summary["capture_rate"],
        summary["capture_rate_std"],
        summary["capture_timestep_mean"],
        summary["capture_timestep_std"],
        episodes,
        " ".join(str(s) for s in seeds),
    ]


def _write_results_jsonl(path: Path, results: list[EpisodeResult]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for i, r in enumerate(results):
            record = {"episode": i, **r.to_dict()}
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")


def _write_trajectories(
    directory: Path, task: TaskParams, config, episodes: int, seed_base: int,
    options: EpisodeOptions, respawn: bool,
) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    policy = HeuristicPolicy(config, options.quad)
    for i in range(episodes):
        seed = seed_base + i
        episode_task = materialize_episode_task(task, seed, respawn=respawn)
        result = run_episode(episode_task, policy, seed, options, log_trajectory=True)
        with (directory / f"episode_{i:05d}.jsonl").open("w") as fh:
            for record in result.trajectory or []:
                fh.write(json.dumps(record, separators=(",", ":")) + "\n")


# --- subcommands -------------------------------------------------------------------


def cmd_sim(parser: argparse.ArgumentParser, args) -> int:
    task = _load_task(parser, args)
    config = make_policy_config(args.policy)
    options = _episode_options(args)
    respawn = not args.fixed_spawns
    summary, results = _seeded_metrics(
        task, config, args.episodes, args.seed, options, respawn, args.workers
    )
    row = _metrics_row(args.scenario, args.policy, summary, args.episodes, args.seed)
    out = Path(args.out) / "metrics.csv" if args.out else None
    text = _write_csv(out, METRICS_HEADER, [row])
    if out is None:
        sys.stdout.write(text)
    else:
        log.info("wrote %s", out)
    if args.results_out:
        _write_results_jsonl(Path(args.results_out), results)
    if args.traj_dir:
        _write_trajectories(
            Path(args.traj_dir), task, config, args.episodes,
            args.seed[0] * SEED_STRIDE, options, respawn,
        )
    return 0


def cmd_sweep(parser: argparse.ArgumentParser, args) -> int:
    task = _load_task(parser, args)
    config = make_policy_config(args.policy)
    options = _episode_options(args)
    respawn = not args.fixed_spawns
    rows = []
    for value in args.values:
        if args.axis == "capture_radius":
            intrinsic = dataclasses.replace(task.intrinsic, capture_radius=value)
        else:
            intrinsic = dataclasses.replace(task.intrinsic, evader_speed=value)
        swept = dataclasses.replace(task, intrinsic=intrinsic)
        summary, _ = _seeded_metrics(
            swept, config, args.episodes, args.seed, options, respawn, args.workers
        )
        rows.append(
            [
                args.scenario,
                args.policy,
                args.axis,
                value,
                summary["capture_rate"],
                summary["capture_rate_std"],
                summary["capture_timestep_mean"],
                summary["capture_timestep_std"],
                args.episodes,
            ]
        )
    header = [
        "scenario", "policy", "axis", "value",
        "capture_rate", "capture_rate_std",
        "capture_timestep_mean", "capture_timestep_std", "episodes",
    ]
    out = Path(args.out) / "sweep.csv" if args.out else None
    text = _write_csv(out, header, rows)
    if out is None:
        sys.stdout.write(text)
    else:
        log.info("wrote %s", out)
    return 0


def _build_trainer(parser: argparse.ArgumentParser, args, options: EpisodeOptions):
    spec = args.trainer
    name, _, param = spec.partition(":")
    if name == "always-capture":
        return AlwaysCaptureTrainer(horizon=options.horizon)
    if name == "always-fail":
        return AlwaysFailTrainer(horizon=options.horizon)
    if name == "pursuit":
        speed = float(param) if param else 1.0
        quad = dataclasses.replace(options.quad, max_speed=speed)
        opts = dataclasses.replace(options, quad=quad)
        return HeuristicTrainer(make_policy_config("angelani"), opts, seed_base=args.seed[0])
    if name in POLICY_FAMILIES:
        return HeuristicTrainer(make_policy_config(name), options, seed_base=args.seed[0])
    if name == "bridge":
        parser.error("--trainer bridge:... runs through `pursuitsim serve`-style endpoints; "
                     "use --endpoint to bind and connect your learner")
    parser.error(f"--trainer: unknown trainer {spec!r}")


def cmd_curriculum(parser: argparse.ArgumentParser, args) -> int:
    options = _episode_options(args)
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"--config: {exc}")
    intrinsic_target = IntrinsicParams(
        *doc.get("intrinsic_target", (0.12, 2.4))
    )
    randomization = RandomizationConfig(
        n_drones=doc.get("n_drones", 4),
        n_obstacles_max=doc.get("n_obstacles_max", 3),
    )
    config = CurriculumConfig(
        batch_size=doc.get("batch_size", 16),
        archive_probability=doc.get("archive_probability", 0.7),
        success_threshold=doc.get("success_threshold", 0.98),
        eval_episodes=doc.get("eval_episodes", 1000),
        archive_capacity=doc.get("archive_capacity", 1024),
        max_iterations=doc.get("max_iterations", 500),
        parts=doc.get("parts", 10),
        intrinsic_target=intrinsic_target,
        intrinsic_enabled=doc.get("intrinsic_enabled", True),
        external_enabled=doc.get("external_enabled", True),
        randomization=randomization,
    )
    if args.trainer.partition(":")[0] == "bridge":
        trainer = _bridge_trainer(parser, args, options)
    else:
        trainer = _build_trainer(parser, args, options)
    rng = np.random.default_rng(args.seed[0])
    report = run_dual_curriculum(trainer, config, rng)
    text = report.to_jsonl()
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)
    return 0 if report.completed or not args.require_complete else 1


def _bridge_trainer(parser: argparse.ArgumentParser, args, options: EpisodeOptions):
    endpoint = args.trainer.partition(":")[2] or "tcp://127.0.0.1:0"
    try:
        return bridge_mod.BridgeTrainer.listen(
            endpoint, options=options, n_obstacle_slots=args.obstacle_slots,
            seed_base=args.seed[0],
        )
    except OSError as exc:
        parser.error(f"--trainer bridge: {exc}")


def cmd_filter(parser: argparse.ArgumentParser, args) -> int:
    if args.check:
        try:
            task = load_scenario(args.check)
        except (ScenarioError, OSError) as exc:
            parser.error(f"--check: {exc}")
        feasible, grid = check_task_feasible(task.external, task.arena, args.cell_size)
        marks = {}
        for p in task.external.drone_spawns:
            marks[grid.cell_of(p[0], p[1])] = "D"
        marks[grid.cell_of(*task.external.evader_spawn[:2])] = "E"
        print("feasible" if feasible else "infeasible")
        print(grid.render(marks))
        return 0
    rng = np.random.default_rng(args.seed[0])
    config = RandomizationConfig(
        n_drones=args.drones, n_obstacles_max=args.max_obstacles
    )
    for _ in range(args.sample):
        external = task_filter_sample(rng, config)
        doc = {
            "drones": [list(p) for p in external.drone_spawns],
            "evader": list(external.evader_spawn),
            "obstacles": [
                {"x": o.center_xy[0], "y": o.center_xy[1], "radius": o.radius, "height": o.height}
                for o in external.obstacles
            ],
        }
        print(json.dumps(doc, separators=(",", ":")))
    return 0


def cmd_gridsearch(parser: argparse.ArgumentParser, args) -> int:
    task = _load_task(parser, args)
    grid_text = args.grid
    if not grid_text.lstrip().startswith("{"):
        try:
            grid_text = Path(grid_text).read_text()
        except OSError as exc:
            parser.error(f"--grid: {exc}")
    try:
        grid = json.loads(grid_text)
    except json.JSONDecodeError as exc:
        parser.error(f"--grid: invalid JSON ({exc})")
    options = _episode_options(args)
    try:
        result: GridSearchResult = grid_search(
            args.policy, grid, [task], args.episodes_per_cell,
            seed=args.seed[0] * SEED_STRIDE, options=options,
            respawn=not args.fixed_spawns,
        )
    except ValueError as exc:
        parser.error(str(exc))
    keys = list(grid.keys())
    header = [*keys, "capture_rate", "capture_timestep_mean"]
    rows = [
        [*(row.params[k] for k in keys), row.capture_rate, row.capture_timestep_mean]
        for row in result.rows
    ]
    out = Path(args.out) if args.out else None
    text = _write_csv(out, header, rows)
    if out is None:
        sys.stdout.write(text)
    best = {k: getattr(result.best, k) for k in keys}
    print(f"best: {json.dumps(best, separators=(',', ':'))}")
    return 0


def cmd_serve(parser: argparse.ArgumentParser, args) -> int:
    task = _load_task(parser, args)
    options = _episode_options(args)
    seed_base = args.raw_seed_base if args.raw_seed_base is not None else args.seed[0] * SEED_STRIDE
    config = bridge_mod.BridgeConfig(
        task=task,
        episodes=args.episodes,
        seed_base=seed_base,
        options=options,
        n_obstacle_slots=args.obstacle_slots,
        respawn=not args.fixed_spawns,
        act_timeout=args.act_timeout,
    )
    results = bridge_mod.serve(args.endpoint, config, max_clients=args.max_clients)
    if args.results_out and results:
        _write_results_jsonl(Path(args.results_out), results)
    return 0


# --- parser ------------------------------------------------------------------------


def _add_common_episode_flags(
    sub: argparse.ArgumentParser, episodes_default: int = 100, workers: bool = True
) -> None:
    sub.add_argument("--scenario", required=True,
                     help=f"preset name ({', '.join(PRESET_NAMES)}), file path, or inline JSON")
    sub.add_argument("--episodes", type=_positive_int, default=episodes_default)
    sub.add_argument("--seed", type=_parse_seeds, default=[0],
                     help="comma-separated seed list; each seed yields an independent batch")
    sub.add_argument("--capture-radius", type=float, default=None)
    sub.add_argument("--evader-speed", type=float, default=None)
    sub.add_argument("--horizon", type=_positive_int, default=800)
    sub.add_argument("--collision-radius", type=float, default=0.1)
    sub.add_argument("--max-speed", type=float, default=None, help="drone max speed override")
    sub.add_argument("--evader-mode", choices=["constant_speed", "eq1_literal"],
                     default="constant_speed",
                     help="constant speed along the force direction, or the "
                          "literal speed-times-raw-force-sum reading")
    sub.add_argument("--fixed-spawns", action="store_true",
                     help="reuse the scenario's spawn points every episode instead of resampling")
    if workers:
        sub.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pursuitsim",
        description="Deterministic multi-drone pursuit-evasion engine with curriculum tooling",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("sim", help="evaluate a policy on a scenario")
    _add_common_episode_flags(sim)
    sim.add_argument("--policy", required=True, choices=sorted(POLICY_FAMILIES))
    sim.add_argument("--out", default=None, help="directory for metrics.csv")
    sim.add_argument("--results-out", default=None, help="per-episode results JSONL")
    sim.add_argument("--traj-dir", default=None, help="write per-episode trajectory JSONL here")

    sweep = subs.add_parser("sweep", help="sweep an intrinsic parameter axis")
    _add_common_episode_flags(sweep)
    sweep.add_argument("--policy", required=True, choices=sorted(POLICY_FAMILIES))
    sweep.add_argument("--axis", required=True, choices=["capture_radius", "evader_speed"])
    sweep.add_argument("--values", required=True, type=_parse_floats,
                       help="comma-separated axis values, e.g. 0.9,0.6,0.3,0.12")
    sweep.add_argument("--out", default=None, help="directory for sweep.csv")

    cur = subs.add_parser("curriculum", help="run the dual curriculum with a trainer")
    cur.add_argument("--config", default=None, help="JSON file of curriculum settings")
    cur.add_argument("--trainer", required=True,
                     help="pursuit[:speed], apf, janosov, zero, always-capture, "
                          "always-fail, or bridge:tcp://host:port")
    cur.add_argument("--seed", type=_parse_seeds, default=[0])
    cur.add_argument("--out", default=None, help="report JSONL path")
    cur.add_argument("--horizon", type=int, default=800)
    cur.add_argument("--collision-radius", type=float, default=0.1)
    cur.add_argument("--max-speed", type=float, default=None)
    cur.add_argument("--obstacle-slots", type=int, default=3)
    cur.add_argument("--require-complete", action="store_true",
                     help="exit nonzero if the final phase was not reached")

    filt = subs.add_parser("filter", help="feasibility-check a scenario or sample feasible layouts")
    filt.add_argument("--check", default=None, help="scenario to test; prints verdict + grid art")
    filt.add_argument("--cell-size", type=float, default=0.1)
    filt.add_argument("--sample", type=int, default=0, help="emit N filtered random layouts")
    filt.add_argument("--seed", type=_parse_seeds, default=[0])
    filt.add_argument("--drones", type=int, default=4)
    filt.add_argument("--max-obstacles", type=int, default=3)

    gs = subs.add_parser("gridsearch", help="grid-search heuristic hyperparameters")
    _add_common_episode_flags(gs, workers=False)
    gs.add_argument("--policy", required=True, choices=["janosov", "apf"])
    gs.add_argument("--grid", required=True, help="JSON object or file: {param: [values...]}")
    gs.add_argument("--episodes-per-cell", type=_positive_int, default=100)
    gs.add_argument("--out", default=None, help="score table CSV path")

    srv = subs.add_parser("serve", help="serve episodes to an external policy over the bridge")
    _add_common_episode_flags(srv, workers=False)
    srv.add_argument("--endpoint", default="tcp://127.0.0.1:0",
                     help="tcp://host:port (port 0 = auto) or stdio")
    srv.add_argument("--obstacle-slots", type=int, default=3)
    srv.add_argument("--max-clients", type=int, default=1,
                     help="serve this many clients then exit (0 = forever)")
    srv.add_argument("--act-timeout", type=float, default=10.0)
    srv.add_argument("--results-out", default=None)
    srv.add_argument("--raw-seed-base", type=int, default=None,
                     help="use this exact per-episode seed base instead of the "
                          "spread --seed (session replay / cross-process interop)")

    return parser


COMMANDS = {
    "sim": cmd_sim,
    "sweep": cmd_sweep,
    "curriculum": cmd_curriculum,
    "filter": cmd_filter,
    "gridsearch": cmd_gridsearch,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("PURSUITSIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "filter" and not args.check and not args.sample:
        parser.error("filter: pass --check SCENARIO or --sample N")
    return COMMANDS[args.command](parser, args)


if __name__ == "__main__":
    raise SystemExit(main())
