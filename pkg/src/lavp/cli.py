"""Command-line harness: run solvers, compare them, export curves and SVGs.

Subcommands:
  dlaco      two-layer ACO on a scenario, writes a report and a path trace
  dqn-train  DQN training, writes a checkpoint and a per-episode CSV
  dqn-eval   greedy rollout from a checkpoint
  compare    side-by-side table of solvers (including the random baseline)
  oracle     exact optimum via Dijkstra + exhaustive order enumeration
  render     SVG drawing of a stored path trace

Every command takes --seed; without it a fresh seed is drawn from entropy
and printed, so any run can be replayed exactly.  No solver-reported
distance is trusted: everything printed is recomputed from the emitted
path or order.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from lavp import dqn_agent, gridworld, neural_core, order_aco, oracle_baseline, pairwise_aco
from lavp.gridworld import GridMap, Scenario
from lavp.order_aco import Tour
from lavp.pairwise_aco import AcoGridConfig, PairwiseResult, path_length


class ParseError(Exception):
    pass


# ---------------------------------------------------------------------------
# scenario / config files

SCENARIO_KEYS = ("grid", "initial", "pickups", "dropoffs", "car_park")


def load_scenario(path) -> tuple[GridMap, Scenario]:
    """Read and validate a scenario JSON file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    for key in SCENARIO_KEYS:
        if key not in doc:
            raise ParseError(f"{path}: missing key '{key}'")
    grid_doc = doc["grid"]
    if "x" not in grid_doc or "y" not in grid_doc:
        raise ParseError(f"{path}: 'grid' needs 'x' and 'y'")
    grid = GridMap(
        width_x=int(grid_doc["x"]),
        width_y=int(grid_doc["y"]),
        obstacles=frozenset(tuple(c) for c in doc.get("obstacles", [])),
    )
    scenario = Scenario(
        initial=tuple(doc["initial"]),
        pickups=tuple(tuple(c) for c in doc["pickups"]),
        dropoffs=tuple(tuple(c) for c in doc["dropoffs"]),
        car_park=tuple(doc["car_park"]),
    )
    gridworld.validate_scenario(grid, scenario)
    return grid, scenario


def load_config(path) -> dict:
    """Solver config JSON with sections grid_aco / order_aco / dqn."""
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: config must be a JSON object")
    return doc


def grid_aco_config(cfg: dict) -> pairwise_aco.AcoGridConfig:
    return pairwise_aco.AcoGridConfig(**cfg.get("grid_aco", {}))


def order_aco_config(cfg: dict) -> order_aco.OrderAcoConfig:
    return order_aco.OrderAcoConfig(**cfg.get("order_aco", {}))


def dqn_config(cfg: dict) -> dqn_agent.DqnConfig:
    section = dict(cfg.get("dqn", {}))
    if "hidden" in section:
        section["hidden"] = tuple(section["hidden"])
    return dqn_agent.DqnConfig(**section)


# ---------------------------------------------------------------------------
# labels and reports


def spot_label(index: int, n_users: int) -> str:
    if index == 0:
        return "IS"
    if index == 2 * n_users + 1:
        return "CP"
    if index <= n_users:
        return f"PS{index}"
    return f"DS{index - n_users}"


def order_notation(order, n_users: int) -> str:
    return "->".join(spot_label(i, n_users) for i in order)


def format_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)


def write_csv(path: Path, headers: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(headers) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_path_trace(path: Path, scenario: Scenario, tour_order, cells, distance: float) -> None:
    doc = {
        "order": list(tour_order) if tour_order is not None else None,
        "order_notation": order_notation(tour_order, scenario.n_users)
        if tour_order is not None
        else None,
        "cells": [list(c) for c in cells],
        "distance": distance,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# SVG rendering

CELL_PX = 24


def render_svg(grid: GridMap, scenario: Scenario | None, cells: list | None) -> str:
    """Deterministic SVG: obstacle squares, labelled spots, path polyline."""
    w = grid.width_y * CELL_PX
    h = grid.width_x * CELL_PX
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
    ]
    # X indexes rows (vertical), Y indexes columns (horizontal)
    for gx in range(grid.width_x + 1):
        parts.append(
            f'<line x1="0" y1="{gx * CELL_PX}" x2="{w}" y2="{gx * CELL_PX}" '
            'stroke="#ddd" stroke-width="1"/>'
        )
    for gy in range(grid.width_y + 1):
        parts.append(
            f'<line x1="{gy * CELL_PX}" y1="0" x2="{gy * CELL_PX}" y2="{h}" '
            'stroke="#ddd" stroke-width="1"/>'
        )
    for cell in sorted(grid.obstacles):
        parts.append(
            f'<rect x="{cell[1] * CELL_PX}" y="{cell[0] * CELL_PX}" '
            f'width="{CELL_PX}" height="{CELL_PX}" fill="black"/>'
        )
    if cells:
        points = " ".join(
            f"{c[1] * CELL_PX + CELL_PX // 2},{c[0] * CELL_PX + CELL_PX // 2}" for c in cells
        )
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="red" stroke-width="2"/>'
        )
    if scenario is not None:
        n = scenario.n_users
        for idx, cell in enumerate(scenario.spots):
            label = spot_label(idx, n)
            cx = cell[1] * CELL_PX
            cy = cell[0] * CELL_PX
            parts.append(
                f'<rect x="{cx}" y="{cy}" width="{CELL_PX}" height="{CELL_PX}" '
                'fill="#bbb"/>'
            )
            parts.append(
                f'<text x="{cx + CELL_PX // 2}" y="{cy + CELL_PX // 2 + 4}" '
                f'font-size="9" text-anchor="middle" font-family="monospace">{label}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# solver drivers (shared by the subcommands)


def run_dlaco(
    grid: GridMap,
    scenario: Scenario,
    config: dict,
    seed: int,
) -> tuple[Tour, list, float, PairwiseResult, float]:
    """Returns (tour, cells, recomputed distance, dm, wall seconds)."""
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    dm = pairwise_aco.build_distance_matrix(scenario, grid, grid_aco_config(config), rng)
    tour = order_aco.solve_order(dm, order_aco_config(config), rng)
    cells = order_aco.assemble_path(tour, dm)
    elapsed = time.perf_counter() - t0
    distance = path_length(cells)
    assert order_aco.is_valid_order(tour.order, scenario.n_users)
    return tour, cells, distance, dm, elapsed


def rollout_order(cells: list, scenario: Scenario) -> tuple[int, ...] | None:
    """Recover the visit order implied by a cell path (first-touch order)."""
    spots = scenario.spots
    seen = []
    for cell in cells:
        for idx, spot in enumerate(spots):
            if cell == spot and idx not in seen:
                seen.append(idx)
    return tuple(seen) if len(seen) == len(spots) else None


# ---------------------------------------------------------------------------
# subcommands


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(32)
    print(f"seed: {seed} (drawn from entropy; pass --seed {seed} to replay)")
    return seed


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_dlaco(args) -> int:
    grid, scenario = load_scenario(args.scenario)
    config = load_config(args.config)
    seed = _resolve_seed(args)
    tour, cells, distance, _, elapsed = run_dlaco(grid, scenario, config, seed)
    out = _outdir(args)
    name = Path(args.scenario).stem
    headers = ["solver", "scenario", "distance", "order", "seconds", "seed"]
    row = [
        "dlaco",
        name,
        f"{distance:.6f}",
        order_notation(tour.order, scenario.n_users),
        f"{elapsed:.2f}",
        str(seed),
    ]
    write_csv(out / "dlaco_report.csv", headers, [row])
    write_path_trace(out / "dlaco_path.json", scenario, tour.order, cells, distance)
    (out / "dlaco_path.svg").write_text(render_svg(grid, scenario, cells))
    print(format_table(headers, [row]))
    return 0


def cmd_dqn_train(args) -> int:
    grid, scenario = load_scenario(args.scenario)
    config = load_config(args.config)
    cfg = dqn_config(config)
    if args.episodes is not None:
        cfg.episodes = args.episodes
    seed = _resolve_seed(args)
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    params, stats = dqn_agent.train(scenario, grid, cfg, rng)
    elapsed = time.perf_counter() - t0
    out = _outdir(args)
    neural_core.save_checkpoint(out / "dqn_checkpoint.json", params, seed=seed)
    headers = ["episode", "accumulated_reward", "steps", "success", "mean_loss"]
    rows = [
        [str(i), repr(r), str(l), str(int(s)), repr(m)]
        for i, (r, l, s, m) in enumerate(
            zip(stats.rewards, stats.lengths, stats.successes, stats.mean_losses)
        )
    ]
    write_csv(out / "dqn_training.csv", headers, rows)
    print(f"trained {cfg.episodes} episodes in {elapsed:.1f}s; "
          f"checkpoint and training CSV written to {out}")
    return 0


def cmd_dqn_eval(args) -> int:
    grid, scenario = load_scenario(args.scenario)
    seed = _resolve_seed(args)
    params, _, _ = neural_core.load_checkpoint(args.checkpoint)
    t0 = time.perf_counter()
    cells, _, success = dqn_agent.greedy_rollout(params, scenario, grid, args.step_cap)
    elapsed = time.perf_counter() - t0
    distance = path_length(cells)
    order = rollout_order(cells, scenario)
    out = _outdir(args)
    headers = ["solver", "scenario", "distance", "order", "success", "seconds", "seed"]
    row = [
        "dqn",
        Path(args.scenario).stem,
        f"{distance:.6f}",
        order_notation(order, scenario.n_users) if order else "incomplete",
        str(int(success)),
        f"{elapsed:.2f}",
        str(seed),
    ]
    write_csv(out / "dqn_report.csv", headers, [row])
    write_path_trace(out / "dqn_path.json", scenario, order, cells, distance)
    (out / "dqn_path.svg").write_text(render_svg(grid, scenario, cells))
    print(format_table(headers, [row]))
    return 0 if success else 1


def cmd_compare(args) -> int:
    grid, scenario = load_scenario(args.scenario)
    config = load_config(args.config)
    seed = _resolve_seed(args)
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    headers = ["solver", "distance", "train_time", "test_time"]
    rows: list[list[str]] = []
    for solver in solvers:
        if solver == "dlaco":
            _, cells, distance, _, elapsed = run_dlaco(grid, scenario, config, seed)
            rows.append(["dlaco", f"{distance:.6f}", "-", f"{elapsed:.2f}"])
        elif solver == "dqn":
            if not args.checkpoint:
                raise ParseError("compare with dqn requires --checkpoint")
            params, _, _ = neural_core.load_checkpoint(args.checkpoint)
            t0 = time.perf_counter()
            cells, _, success = dqn_agent.greedy_rollout(params, scenario, grid)
            elapsed = time.perf_counter() - t0
            distance = path_length(cells) if success else float("inf")
            rows.append(["dqn", f"{distance:.6f}", "-", f"{elapsed:.2f}"])
        elif solver == "random":
            rng = np.random.default_rng(seed)
            t0 = time.perf_counter()
            result = oracle_baseline.random_rollout_best(
                scenario, grid, args.trials, 10 * args.step_cap, rng
            )
            elapsed = time.perf_counter() - t0
            distance = (
                path_length(result.path) if result.path is not None else float("inf")
            )
            rows.append(["random", f"{distance:.6f}", "-", f"{elapsed:.2f}"])
        elif solver == "oracle":
            if scenario.n_users > 6:
                continue
            t0 = time.perf_counter()
            distance, _ = oracle_baseline.optimal_total_distance(scenario, grid)
            elapsed = time.perf_counter() - t0
            rows.append(["oracle", f"{distance:.6f}", "-", f"{elapsed:.2f}"])
        else:
            raise ParseError(f"unknown solver '{solver}'")
    out = _outdir(args)
    write_csv(out / "compare.csv", headers, rows)
    print(format_table(headers, rows))
    return 0


def cmd_oracle(args) -> int:
    grid, scenario = load_scenario(args.scenario)
    distance, order = oracle_baseline.optimal_total_distance(scenario, grid)
    print(f"optimal distance: {distance:.6f}")
    print(f"optimal order:    {order_notation(order, scenario.n_users)}")
    if args.out:
        out = _outdir(args)
        with open(out / "oracle.json", "w") as fh:
            json.dump({"distance": distance, "order": list(order)}, fh, indent=2)
            fh.write("\n")
    return 0


def cmd_render(args) -> int:
    grid, scenario = load_scenario(args.scenario)
    try:
        with open(args.path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{args.path}: invalid JSON: {exc.msg}") from exc
    if "cells" not in doc:
        raise ParseError(f"{args.path}: missing 'cells'")
    cells = [tuple(c) for c in doc["cells"]]
    svg = render_svg(grid, scenario, cells)
    Path(args.out).write_text(svg)
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lavp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--config", default=None, help="solver config JSON file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("dlaco", help="run the two-layer ACO solver")
    common(p)
    p.set_defaults(func=cmd_dlaco)

    p = sub.add_parser("dqn-train", help="train the DQN agent")
    common(p)
    p.add_argument("--episodes", type=int, default=None, help="override episode count")
    p.set_defaults(func=cmd_dqn_train)

    p = sub.add_parser("dqn-eval", help="greedy rollout from a checkpoint")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--step-cap", type=int, default=100)
    p.set_defaults(func=cmd_dqn_eval)

    p = sub.add_parser("compare", help="compare solvers on one scenario")
    common(p)
    p.add_argument("--solvers", default="dlaco,random,oracle",
                   help="comma list from dlaco,dqn,random,oracle")
    p.add_argument("--checkpoint", default=None, help="DQN checkpoint for the dqn row")
    p.add_argument("--trials", type=int, default=500, help="random-baseline episodes")
    p.add_argument("--step-cap", type=int, default=100)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="exact optimum for a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("render", help="render a path trace to SVG")
    p.add_argument("--scenario", required=True)
    p.add_argument("--path", required=True, help="path trace JSON")
    p.add_argument("--out", default="path.svg")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, gridworld.GridWorldError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
