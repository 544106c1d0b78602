"""Command implementations behind the CLI: run, dump, verify.

All artifacts are deterministic functions of (scenario, seed): CSVs carry a
header row, fixed column order and 9-significant-digit floats; JSON files
are written with sorted keys.  Wall-clock timing goes to a separate
run_info.json so the result files stay byte-reproducible.
"""

from __future__ import annotations

import json
import math
import time
from collections import Counter
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import beamform, channel, geom, placement
from .geom import Cell, Point2
from .rng import Stream, derive_seed, substream
from .scenario import Scenario


def _fmt(v: float) -> str:
    return f"{float(v):.9g}"


def _round9(v: float) -> float:
    return float(_fmt(v))


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _zero_ris_legs(rf: channel.RfParams, k_users: int) -> dict:
    n, m = rf.n_elements, rf.m_antennas
    return {
        "h_br": np.zeros((n, m), dtype=complex),
        "h_ru": np.zeros((k_users, n), dtype=complex),
        "loss_br": math.inf,
        "loss_ru": np.full(k_users, math.inf),
        "br_blocked": True,
        "ru_blocked": np.ones(k_users, dtype=bool),
    }


def _solve_once(
    scn: Scenario, ris: Optional[Point2], users, seed: int
) -> beamform.FpState:
    direct = channel.sample_direct(
        scn.rf, scn.bs, users, scn.obstacles, substream(seed, Stream.DIRECT)
    )
    if ris is None:
        legs = _zero_ris_legs(scn.rf, len(users))
    else:
        legs = channel.sample_ris_legs(
            scn.rf,
            scn.bs,
            ris,
            users,
            scn.obstacles,
            substream(seed, Stream.BS_RIS),
            substream(seed, Stream.RIS_USER),
        )
    cs = channel.assemble_channel_set(*direct, legs)
    return beamform.solve(cs, scn.rf, scn.solver)


def average_wsr(
    scn: Scenario,
    ris: Optional[Point2],
    n_draws: int,
    namespace: int,
    ris_mode: str = "fixed",
) -> float:
    """Mean converged sum rate over accepted user draws.

    ris_mode 'random' redraws a uniform obstacle-free RIS position per draw;
    'fixed' uses ``ris`` as given (None means no reflecting surface at all).
    """
    total, accepted, index = 0.0, 0, 0
    cap = max(100 * n_draws, 1000)
    while accepted < n_draws and index < cap:
        seed = derive_seed(scn.seed, namespace, index)
        users = placement.sample_users(
            scn.users, scn.obstacles, substream(seed, Stream.USERS)
        )
        index += 1
        if not users:
            continue
        spot = ris
        if ris_mode == "random":
            rng = substream(seed, Stream.CANDIDATES)
            while True:
                spot = placement._uniform_in_disk(scn.cell, rng)
                if not geom.point_in_obstacle(spot, scn.obstacles):
                    break
        state = _solve_once(scn, spot, users, seed)
        total += state.objective_history[-1] if state.objective_history else 0.0
        accepted += 1
    if accepted == 0:
        return 0.0
    return total / accepted


def cmd_beamform(
    scn: Scenario,
    ris: Point2,
    out_dir: Path,
    users: Optional[Sequence[Point2]] = None,
    max_iters: Optional[int] = None,
) -> dict:
    """Single joint-beamforming solve at a fixed RIS position."""
    if max_iters is not None:
        scn = replace(scn, solver=replace(scn.solver, max_iters=max_iters))
    if users is None:
        for attempt in range(100):
            users = placement.sample_users(
                scn.users,
                scn.obstacles,
                substream(scn.seed, Stream.USERS, attempt),
            )
            if users:
                break
        if not users:
            raise ValueError("user model produced no users; pass --users explicitly")
    cs = channel.sample_channels(scn.rf, scn.bs, ris, users, scn.obstacles, scn.seed)
    state = beamform.solve(cs, scn.rf, scn.solver)
    gammas = channel.all_sinr(cs, state.w, state.theta, scn.rf.sigma2)

    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "convergence.csv",
        ["iteration", "surrogate", "wsr"],
        [
            (i + 1, s, o)
            for i, (s, o) in enumerate(
                zip(state.surrogate_history, state.objective_history)
            )
        ],
    )
    report = {
        "final_wsr": _round9(state.objective_history[-1]),
        "iterations": state.iteration,
        "per_user_sinr": [_round9(g) for g in gammas],
        "k_users": len(users),
    }
    _write_json(out_dir / "beamform.json", report)
    print(f"iterations: {state.iteration}")
    for i, (s, o) in enumerate(zip(state.surrogate_history, state.objective_history)):
        print(f"  iter {i + 1:4d}  surrogate {_fmt(s)}  wsr {_fmt(o)}")
    print(f"final wsr [bits/s/Hz]: {_fmt(report['final_wsr'])}")
    print("per-user sinr: " + " ".join(_fmt(g) for g in gammas))
    return report


def _heatmap_rows(trace) -> list:
    rows = []
    for level, tl in enumerate(trace, start=1):
        counts = Counter(
            (p.x, p.y) for p in placement.quantize(tl.solutions.points, tl.step)
        )
        for (x, y), c in sorted(counts.items()):
            rows.append((level, float(tl.step), float(x), float(y), c))
    return rows


def _solution_rows(trace) -> list:
    rows = []
    for level, tl in enumerate(trace, start=1):
        for e in tl.solutions.entries:
            rows.append(
                (
                    level,
                    float(tl.step),
                    e.instantiation,
                    float(e.point.x),
                    float(e.point.y),
                    float(e.min_sinr),
                    float(e.wsr),
                    e.k_users,
                )
            )
    return rows


SOLUTIONS_HEADER = ["level", "step", "instantiation", "x", "y", "min_sinr", "wsr", "k_users"]
HEATMAP_HEADER = ["level", "step", "cell_x", "cell_y", "count"]


def cmd_place(scn: Scenario, out_dir: Path, threads: int = 1) -> placement.PlacementResult:
    """Full pipeline: solution set, recursive refinement, metrics, artifacts."""
    t0 = time.monotonic()
    pcfg = scn.placement
    seed0 = derive_seed(scn.seed, Stream.LEVEL, 0)
    base = placement.build_solution_set(
        scn, scn.cell, pcfg.instantiations, pcfg.candidates, seed0, threads
    )
    result = placement.recursive_refine(
        scn, base, pcfg.d_start, pcfg.d_p, pcfg.refine_radius, pcfg, threads
    )

    cov_before = geom.coverage(
        scn.cell, scn.bs, scn.obstacles, None, pcfg.grid_resolution
    ).fraction
    cov_after = geom.coverage(
        scn.cell, scn.bs, scn.obstacles, result.center, pcfg.grid_resolution
    ).fraction
    avg = average_wsr(scn, result.center, pcfg.instantiations, Stream.METRICS)
    result.metrics = {
        "coverage_without_ris": _round9(cov_before),
        "coverage_with_ris": _round9(cov_after),
        "average_wsr": _round9(avg),
        "wsr_draws": pcfg.instantiations,
        "grid_resolution": pcfg.grid_resolution,
    }

    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "solutions.csv", SOLUTIONS_HEADER, _solution_rows(result.recursion_trace))
    _write_csv(out_dir / "heatmap.csv", HEATMAP_HEADER, _heatmap_rows(result.recursion_trace))
    c = result.center
    _write_json(
        out_dir / "final_region.json",
        {
            "center": [_round9(c.x), _round9(c.y)],
            "side": _round9(result.side),
            "min": [_round9(c.x - result.side / 2), _round9(c.y - result.side / 2)],
            "max": [_round9(c.x + result.side / 2), _round9(c.y + result.side / 2)],
            "levels": len(result.recursion_trace),
        },
    )
    _write_json(out_dir / "metrics.json", result.metrics)
    _write_json(
        out_dir / "run_info.json",
        {"elapsed_s": time.monotonic() - t0, "threads": threads},
    )
    print(f"final region center: ({_fmt(c.x)}, {_fmt(c.y)}), side {_fmt(result.side)} m")
    print(
        f"coverage: {_fmt(cov_before)} -> {_fmt(cov_after)}; "
        f"average wsr {_fmt(avg)} bits/s/Hz"
    )
    return result


def cmd_coverage(
    scn: Scenario, out_dir: Path, ris: Optional[Point2] = None
) -> geom.CoverageMap:
    """Coverage grid CSV plus the summary fraction."""
    cov = geom.coverage(scn.cell, scn.bs, scn.obstacles, ris, scn.placement.grid_resolution)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "coverage.csv",
        ["x", "y", "covered"],
        [(float(x), float(y), int(c)) for (x, y), c in zip(cov.xy, cov.covered)],
    )
    _write_json(
        out_dir / "coverage_summary.json",
        {
            "fraction": _round9(cov.fraction),
            "points": len(cov.covered),
            "resolution": cov.resolution,
            "ris": None if ris is None else [ris.x, ris.y],
        },
    )
    print(f"coverage fraction: {_fmt(cov.fraction)} over {len(cov.covered)} grid points")
    return cov


def cmd_sweep_power(
    scn: Scenario,
    out_dir: Path,
    p_dbm_list: Sequence[float],
    modes: Sequence[str] = ("optimal", "random", "none"),
    placement_path: Optional[Path] = None,
    n_draws: Optional[int] = None,
) -> list:
    """Average rate at each transmit power for each placement mode."""
    n_draws = n_draws or scn.placement.instantiations
    optimal = None
    if "optimal" in modes:
        if placement_path is None:
            raise ValueError("optimal mode needs a prior placement result (--placement)")
        data = json.loads(Path(placement_path).read_text())
        optimal = Point2(float(data["center"][0]), float(data["center"][1]))
    rows = []
    for mode in modes:
        for p_dbm in p_dbm_list:
            swept = replace(scn, rf=replace(scn.rf, p_max_dbm=float(p_dbm)))
            if mode == "optimal":
                avg = average_wsr(swept, optimal, n_draws, Stream.SWEEP)
            elif mode == "none":
                avg = average_wsr(swept, None, n_draws, Stream.SWEEP)
            elif mode == "random":
                avg = average_wsr(swept, None, n_draws, Stream.SWEEP, ris_mode="random")
            else:
                raise ValueError(f"unknown sweep mode {mode!r}")
            rows.append((mode, float(p_dbm), float(avg)))
            print(f"mode {mode:8s} p {p_dbm:7.2f} dBm  avg wsr {_fmt(avg)}")
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "sweep.csv", ["mode", "p_max_dbm", "avg_wsr"], rows)
    return rows


def cmd_sample_users(scn: Scenario, out_dir: Path) -> list:
    """One user instantiation dumped to users.csv."""
    users = placement.sample_users(
        scn.users, scn.obstacles, substream(scn.seed, Stream.USERS)
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "users.csv", ["x", "y"], [(u.x, u.y) for u in users])
    print(f"users drawn: {len(users)}")
    return users


def cmd_verify(scn: Scenario, out_dir: Path) -> list:
    """Recompute every number in the artifacts; returns a list of mismatches."""
    problems = []
    out_dir = Path(out_dir)

    sol_rows = _read_csv(out_dir / "solutions.csv")
    by_level: dict = {}
    for row in sol_rows:
        level = int(row["level"])
        by_level.setdefault(level, {"step": float(row["step"]), "points": []})
        by_level[level]["points"].append(Point2(float(row["x"]), float(row["y"])))

    heat_rows = _read_csv(out_dir / "heatmap.csv")
    for level, info in by_level.items():
        want = Counter(
            (p.x, p.y) for p in placement.quantize(info["points"], info["step"])
        )
        got = Counter()
        for row in heat_rows:
            if int(row["level"]) == level:
                got[(float(row["cell_x"]), float(row["cell_y"]))] = int(row["count"])
        if want != got:
            problems.append(f"heatmap counts for level {level} do not match solutions")

    final = json.loads((out_dir / "final_region.json").read_text())
    metrics = json.loads((out_dir / "metrics.json").read_text())
    last = by_level[max(by_level)]
    side = float(final["side"])
    mode = placement.mode_cell(placement.quantize(last["points"], side))
    sols = placement.SolutionSet(
        entries=tuple(
            placement.SolutionEntry(p, 0.0, 0.0, 0) for p in last["points"]
        ),
        search_circle=scn.cell,
    )
    center = placement._snap_center_feasible(mode, sols, scn)
    if [_round9(center.x), _round9(center.y)] != final["center"]:
        problems.append(
            f"final center {final['center']} != recomputed ({center.x}, {center.y})"
        )

    res = float(metrics["grid_resolution"])
    ris = Point2(float(final["center"][0]), float(final["center"][1]))
    cov0 = geom.coverage(scn.cell, scn.bs, scn.obstacles, None, res).fraction
    cov1 = geom.coverage(scn.cell, scn.bs, scn.obstacles, ris, res).fraction
    if _round9(cov0) != metrics["coverage_without_ris"]:
        problems.append(f"coverage_without_ris {metrics['coverage_without_ris']} != {cov0}")
    if _round9(cov1) != metrics["coverage_with_ris"]:
        problems.append(f"coverage_with_ris {metrics['coverage_with_ris']} != {cov1}")

    avg = average_wsr(scn, ris, int(metrics["wsr_draws"]), Stream.METRICS)
    if _round9(avg) != metrics["average_wsr"]:
        problems.append(f"average_wsr {metrics['average_wsr']} != {avg}")

    for p in problems:
        print(f"MISMATCH: {p}")
    if not problems:
        print("verify: all artifact values recompute exactly")
    return problems


def _read_csv(path: Path) -> list:
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]
