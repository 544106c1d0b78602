"""Figure renderers: solution scatter, frequency heatmap, coverage, sweep.

Each function takes a FigureSpec pointing at the artifact directory and
writes one PNG.  All values come from the CSV/JSON files as parsed; nothing
is recomputed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Circle as CirclePatch
from matplotlib.patches import Rectangle

from . import schema
from .schema import SchemaError


@dataclass
class FigureSpec:
    """Where to read artifacts, where to write the image, and styling."""

    in_dir: Path
    out_dir: Path
    scenario: Optional[Path] = None
    level: Optional[int] = None  # default: first level for scatter, last for heatmap
    dpi: int = 150
    cmap: str = "viridis"
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        self.in_dir = Path(self.in_dir)
        self.out_dir = Path(self.out_dir)
        if self.scenario is not None:
            self.scenario = Path(self.scenario)


def _draw_geometry(ax, geometry: dict):
    cx, cy = geometry["cell"]["center"]
    radius = geometry["cell"]["radius"]
    ax.add_patch(
        CirclePatch((cx, cy), radius, fill=False, color="tab:green", lw=1.5,
                    label="cell boundary")
    )
    obstacles = geometry["obstacles"]
    for i, obs in enumerate(obstacles):
        label = f"obstacles ({len(obstacles)})" if i == 0 else None
        if obs["type"] == "circle":
            ax.add_patch(
                CirclePatch(tuple(obs["center"]), obs["radius"], color="black", label=label)
            )
        else:
            ox, oy = obs["center"]
            half = obs["length"] / 2.0
            dx = half * math.cos(obs["orientation"])
            dy = half * math.sin(obs["orientation"])
            ax.plot([ox - dx, ox + dx], [oy - dy, oy + dy], color="black", lw=3,
                    label=label, solid_capstyle="butt")
    bx, by = geometry["bs"]
    ax.plot([bx], [by], marker="^", color="tab:red", markersize=10, ls="none",
            label="BS")
    ax.set_aspect("equal", adjustable="box")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")


def _finish(fig, ax, spec: FigureSpec, name: str) -> Path:
    ax.grid(True, linestyle=":", linewidth=0.6)
    ax.legend(loc="upper left", fontsize=8)
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    out = spec.out_dir / name
    fig.savefig(out, dpi=spec.dpi)
    plt.close(fig)
    return out


def plot_solutions(spec: FigureSpec) -> Path:
    """Scatter of per-instantiation winners over the scenario geometry.

    Draws the requested recursion level (default: the first) and overlays
    the final region square when final_region.json is present.
    """
    rows = schema.load_solutions(spec.in_dir / "solutions.csv")
    level = spec.level or (min(r["level"] for r in rows) if rows else 1)
    pts = [(r["x"], r["y"]) for r in rows if r["level"] == level]

    fig, ax = plt.subplots(figsize=(6, 6))
    if spec.scenario is not None:
        _draw_geometry(ax, schema.load_scenario_geometry(spec.scenario))
    if pts:
        xs, ys = zip(*pts)
        ax.scatter(xs, ys, s=18, color="tab:blue", zorder=3,
                   label=f"solutions (level {level})")
    final_path = spec.in_dir / "final_region.json"
    if final_path.exists():
        final = schema.load_final_region(final_path)
        (cx, cy), side = final["center"], final["side"]
        ax.add_patch(
            Rectangle((cx - side / 2, cy - side / 2), side, side, fill=False,
                      color="tab:red", lw=2, zorder=4, label="final region")
        )
    ax.set_title(f"solution set, level {level}")
    return _finish(fig, ax, spec, f"solutions_level{level}.png")


def heatmap_matrix(rows: list, level: int):
    """Dense count matrix for one level; returns (matrix, xs, ys, step).

    Matrix entries are exactly the CSV counts; absent cells are zero.
    """
    rows = [r for r in rows if r["level"] == level]
    if not rows:
        raise SchemaError(f"heatmap.csv has no rows for level {level}")
    step = rows[0]["step"]
    xs = sorted({r["cell_x"] for r in rows})
    ys = sorted({r["cell_y"] for r in rows})
    matrix = np.zeros((len(ys), len(xs)), dtype=int)
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: i for i, v in enumerate(ys)}
    for r in rows:
        matrix[yi[r["cell_y"]], xi[r["cell_x"]]] = r["count"]
    return matrix, xs, ys, step


def plot_heatmap(spec: FigureSpec) -> Path:
    """Quantized solution frequency per lattice cell at one recursion level."""
    rows = schema.load_heatmap(spec.in_dir / "heatmap.csv")
    level = spec.level or max(r["level"] for r in rows)
    matrix, xs, ys, step = heatmap_matrix(rows, level)

    fig, ax = plt.subplots(figsize=(6, 5))
    extent = (
        min(xs) - step / 2, max(xs) + step / 2,
        min(ys) - step / 2, max(ys) + step / 2,
    )
    im = ax.imshow(matrix, origin="lower", extent=extent, cmap=spec.cmap,
                   interpolation="nearest")
    fig.colorbar(im, ax=ax, label="solutions per cell")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(f"solution frequency, level {level} (step {step:g} m)")
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    out = spec.out_dir / f"heatmap_level{level}.png"
    fig.savefig(out, dpi=spec.dpi)
    plt.close(fig)
    return out


def plot_coverage(spec: FigureSpec) -> Path:
    """Covered/uncovered grid points, with the covered fraction in the title."""
    rows = schema.load_coverage(spec.in_dir / "coverage.csv")
    if not rows:
        raise SchemaError("coverage.csv has no data rows")
    xs = np.array([r["x"] for r in rows])
    ys = np.array([r["y"] for r in rows])
    cov = np.array([r["covered"] for r in rows], dtype=bool)

    fig, ax = plt.subplots(figsize=(6, 6))
    ax.scatter(xs[cov], ys[cov], s=2, color="tab:green", label="covered")
    if (~cov).any():
        ax.scatter(xs[~cov], ys[~cov], s=2, color="tab:red", label="not covered")
    if spec.scenario is not None:
        _draw_geometry(ax, schema.load_scenario_geometry(spec.scenario))
    ax.set_aspect("equal", adjustable="box")
    fraction = cov.mean()
    ax.set_title(f"coverage {100 * fraction:.2f}% of {len(rows)} grid points")
    return _finish(fig, ax, spec, "coverage.png")


def plot_sweep(spec: FigureSpec) -> Path:
    """Average rate versus transmit power, one curve per placement mode."""
    rows = schema.load_sweep(spec.in_dir / "sweep.csv")
    if not rows:
        raise SchemaError("sweep.csv has no data rows")
    modes = sorted({r["mode"] for r in rows})
    fig, ax = plt.subplots(figsize=(6, 4.5))
    markers = {"optimal": "o", "random": "s", "none": "^"}
    for mode in modes:
        series = sorted(
            ((r["p_max_dbm"], r["avg_wsr"]) for r in rows if r["mode"] == mode)
        )
        ps, vals = zip(*series)
        ax.plot(ps, vals, marker=markers.get(mode, "x"), label=mode)
    ax.set_xlabel("transmit power [dBm]")
    ax.set_ylabel("average rate [bits/s/Hz]")
    ax.set_title("rate vs transmit power")
    return _finish(fig, ax, spec, "sweep.png")
