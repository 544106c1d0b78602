"""CSV/JSON readers for the simulator's output artifacts.

These parse the documented file schemas and nothing else; every figure is
drawn from parsed values, never recomputed physics.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path


class SchemaError(Exception):
    """An input file does not match its documented schema."""


SOLUTIONS_COLUMNS = ["level", "step", "instantiation", "x", "y", "min_sinr", "wsr", "k_users"]
HEATMAP_COLUMNS = ["level", "step", "cell_x", "cell_y", "count"]
COVERAGE_COLUMNS = ["x", "y", "covered"]
SWEEP_COLUMNS = ["mode", "p_max_dbm", "avg_wsr"]


def _read_rows(path: Path, required: list) -> list:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            for col in required:
                if col not in header:
                    raise SchemaError(f"{path.name}: missing column {col!r}")
            return list(reader)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc


def load_solutions(path: Path) -> list:
    """Rows of solutions.csv with numeric fields converted."""
    rows = _read_rows(Path(path), SOLUTIONS_COLUMNS)
    return [
        {
            "level": int(r["level"]),
            "step": float(r["step"]),
            "x": float(r["x"]),
            "y": float(r["y"]),
            "min_sinr": float(r["min_sinr"]),
            "wsr": float(r["wsr"]),
            "k_users": int(r["k_users"]),
        }
        for r in rows
    ]


def load_heatmap(path: Path) -> list:
    rows = _read_rows(Path(path), HEATMAP_COLUMNS)
    return [
        {
            "level": int(r["level"]),
            "step": float(r["step"]),
            "cell_x": float(r["cell_x"]),
            "cell_y": float(r["cell_y"]),
            "count": int(r["count"]),
        }
        for r in rows
    ]


def load_coverage(path: Path) -> list:
    rows = _read_rows(Path(path), COVERAGE_COLUMNS)
    return [
        {"x": float(r["x"]), "y": float(r["y"]), "covered": int(r["covered"])}
        for r in rows
    ]


def load_sweep(path: Path) -> list:
    rows = _read_rows(Path(path), SWEEP_COLUMNS)
    return [
        {
            "mode": r["mode"],
            "p_max_dbm": float(r["p_max_dbm"]),
            "avg_wsr": float(r["avg_wsr"]),
        }
        for r in rows
    ]


def load_final_region(path: Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    for key in ("center", "side"):
        if key not in data:
            raise SchemaError(f"{Path(path).name}: missing key {key!r}")
    return data


def load_scenario_geometry(path: Path) -> dict:
    """BS, cell and obstacle records from a scenario file."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    for key in ("bs", "cell"):
        if key not in data:
            raise SchemaError(f"{Path(path).name}: missing key {key!r}")
    return {
        "bs": data["bs"],
        "cell": data["cell"],
        "obstacles": data.get("obstacles", []),
    }
