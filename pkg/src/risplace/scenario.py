"""Scenario files: the full world description, serialized as JSON.

A scenario bundles the BS position, the cell, the obstacle configuration,
the user model, the RF parameters (powers authored in dBm/dB) and the
search/solver settings.  Parsing validates every value and reports the
dotted path of the first offending field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Union

from .beamform import SolverConfig
from .channel import RfParams
from .errors import ParseError, ValidationError
from .geom import Cell, Circle, Obstacle, Point2, Wall
from .placement import Homogeneous, Hotspots, PlacementConfig, UserModel


@dataclass(frozen=True)
class Scenario:
    """World description consumed by every command."""

    bs: Point2
    cell: Cell
    obstacles: tuple
    users: UserModel
    rf: RfParams
    placement: PlacementConfig
    solver: SolverConfig
    seed: int

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=seed)


def _require(data: dict, key: str, path: str):
    if key not in data:
        raise ValidationError(f"{path}.{key}" if path else key, "missing field")
    return data[key]


def _number(value, path: str, positive=False, nonnegative=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(path, f"expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ValidationError(path, "must be finite")
    if positive and v <= 0:
        raise ValidationError(path, f"must be > 0, got {v}")
    if nonnegative and v < 0:
        raise ValidationError(path, f"must be >= 0, got {v}")
    return v


def _integer(value, path: str, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ValidationError(path, f"must be >= {minimum}, got {value}")
    return value


def _point(value, path: str) -> Point2:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValidationError(path, f"expected [x, y], got {value!r}")
    return Point2(_number(value[0], f"{path}[0]"), _number(value[1], f"{path}[1]"))


def _parse_obstacle(data: dict, path: str) -> Obstacle:
    kind = _require(data, "type", path)
    if kind == "circle":
        return Circle(
            center=_point(_require(data, "center", path), f"{path}.center"),
            radius=_number(_require(data, "radius", path), f"{path}.radius", positive=True),
        )
    if kind == "wall":
        return Wall(
            center=_point(_require(data, "center", path), f"{path}.center"),
            length=_number(_require(data, "length", path), f"{path}.length", positive=True),
            orientation=_number(
                _require(data, "orientation", path), f"{path}.orientation"
            ),
        )
    raise ValidationError(f"{path}.type", f"unknown obstacle type {kind!r}")


def _parse_users(data: dict, cell: Cell, path: str) -> UserModel:
    kind = _require(data, "type", path)
    if kind == "homogeneous":
        density = _number(
            _require(data, "density", path), f"{path}.density", nonnegative=True
        )
        return Homogeneous(density=density, region=cell)
    if kind == "hotspots":
        raw = _require(data, "hotspots", path)
        if not isinstance(raw, list) or not raw:
            raise ValidationError(f"{path}.hotspots", "expected a nonempty list")
        spots = []
        for i, sp in enumerate(raw):
            sp_path = f"{path}.hotspots[{i}]"
            center = _point(_require(sp, "center", sp_path), f"{sp_path}.center")
            radius = _number(
                _require(sp, "radius", sp_path), f"{sp_path}.radius", positive=True
            )
            density = _number(
                _require(sp, "density", sp_path), f"{sp_path}.density", nonnegative=True
            )
            if center.distance_to(cell.center) + radius > cell.radius + 1e-9:
                raise ValidationError(sp_path, "hotspot circle must lie inside the cell")
            spots.append((Cell(center=center, radius=radius), density))
        return Hotspots(spots=tuple(spots))
    raise ValidationError(f"{path}.type", f"unknown user model {kind!r}")


def _parse_solver(data: dict, path: str) -> SolverConfig:
    cfg = SolverConfig()
    if "max_iters" in data:
        cfg.max_iters = _integer(data["max_iters"], f"{path}.max_iters", minimum=1)
    if "rel_tol" in data:
        cfg.rel_tol = _number(data["rel_tol"], f"{path}.rel_tol", positive=True)
    if "extrapolation" in data:
        ex = data["extrapolation"]
        if isinstance(ex, str) and ex in ("nesterov", "none"):
            cfg.extrapolation = ex
        elif isinstance(ex, (int, float)) and not isinstance(ex, bool) and ex >= 0:
            cfg.extrapolation = float(ex)
        else:
            raise ValidationError(
                f"{path}.extrapolation",
                f"expected 'nesterov', 'none' or a float >= 0, got {ex!r}",
            )
    if "kappa0" in data and data["kappa0"] is not None:
        cfg.kappa0 = _number(data["kappa0"], f"{path}.kappa0", positive=True)
    if "backtrack_factor" in data:
        bf = _number(data["backtrack_factor"], f"{path}.backtrack_factor")
        if bf <= 1.0:
            raise ValidationError(f"{path}.backtrack_factor", f"must be > 1, got {bf}")
        cfg.backtrack_factor = bf
    return cfg


def parse_scenario(data: dict, source: str = "<dict>") -> Scenario:
    """Validate a parsed JSON document into a Scenario."""
    if not isinstance(data, dict):
        raise ValidationError("", f"scenario root must be an object ({source})")

    bs = _point(_require(data, "bs", ""), "bs")
    cell_data = _require(data, "cell", "")
    cell = Cell(
        center=_point(_require(cell_data, "center", "cell"), "cell.center"),
        radius=_number(_require(cell_data, "radius", "cell"), "cell.radius", positive=True),
    )

    raw_obs = data.get("obstacles", [])
    if not isinstance(raw_obs, list):
        raise ValidationError("obstacles", "expected a list")
    obstacles = tuple(
        _parse_obstacle(ob, f"obstacles[{i}]") for i, ob in enumerate(raw_obs)
    )

    users = _parse_users(_require(data, "users", ""), cell, "users")

    rf_data = _require(data, "rf", "")
    rf = RfParams(
        f_c=_number(_require(rf_data, "f_c_ghz", "rf"), "rf.f_c_ghz", positive=True),
        bandwidth=_number(
            _require(rf_data, "bandwidth_hz", "rf"), "rf.bandwidth_hz", positive=True
        ),
        noise_figure=_number(_require(rf_data, "noise_figure_db", "rf"), "rf.noise_figure_db"),
        p_max_dbm=_number(_require(rf_data, "p_max_dbm", "rf"), "rf.p_max_dbm"),
        t1_db=_number(_require(rf_data, "t1_db", "rf"), "rf.t1_db"),
        t2_db=_number(_require(rf_data, "t2_db", "rf"), "rf.t2_db"),
        m_antennas=_integer(_require(rf_data, "bs_antennas", "rf"), "rf.bs_antennas", minimum=1),
        n_elements=_integer(
            _require(rf_data, "ris_elements", "rf"), "rf.ris_elements", minimum=1
        ),
        antenna_spacing=_number(
            rf_data.get("antenna_spacing", 0.5), "rf.antenna_spacing", positive=True
        ),
    )

    pl_data = data.get("placement", {})
    refine_radius = pl_data.get("refine_radius")
    if refine_radius is not None:
        refine_radius = _number(refine_radius, "placement.refine_radius", positive=True)
    placement = PlacementConfig(
        candidates=_integer(pl_data.get("candidates", 40), "placement.candidates", minimum=1),
        instantiations=_integer(
            pl_data.get("instantiations", 50), "placement.instantiations", minimum=1
        ),
        d_start=_number(pl_data.get("d_start", 2.0), "placement.d_start", positive=True),
        d_p=_number(pl_data.get("d_p", 1.0), "placement.d_p", positive=True),
        refine_radius=refine_radius,
        grid_resolution=_number(
            pl_data.get("grid_resolution", 0.1), "placement.grid_resolution", positive=True
        ),
    )
    if placement.d_start < placement.d_p:
        raise ValidationError("placement.d_start", "must be >= placement.d_p")

    solver = _parse_solver(data.get("solver", {}), "solver")
    seed = _integer(data.get("seed", 0), "seed", minimum=0)

    return Scenario(
        bs=bs,
        cell=cell,
        obstacles=obstacles,
        users=users,
        rf=rf,
        placement=placement,
        solver=solver,
        seed=seed,
    )


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Parse and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_scenario(data, source=str(path))


def scenario_to_dict(scn: Scenario) -> dict:
    """Serializable document; parse_scenario of it reproduces the scenario."""
    obstacles = []
    for ob in scn.obstacles:
        if isinstance(ob, Circle):
            obstacles.append(
                {"type": "circle", "center": [ob.center.x, ob.center.y], "radius": ob.radius}
            )
        else:
            obstacles.append(
                {
                    "type": "wall",
                    "center": [ob.center.x, ob.center.y],
                    "length": ob.length,
                    "orientation": ob.orientation,
                }
            )
    if isinstance(scn.users, Homogeneous):
        users = {"type": "homogeneous", "density": scn.users.density}
    else:
        users = {
            "type": "hotspots",
            "hotspots": [
                {
                    "center": [c.center.x, c.center.y],
                    "radius": c.radius,
                    "density": d,
                }
                for c, d in scn.users.spots
            ],
        }
    ex = scn.solver.extrapolation
    return {
        "bs": [scn.bs.x, scn.bs.y],
        "cell": {
            "center": [scn.cell.center.x, scn.cell.center.y],
            "radius": scn.cell.radius,
        },
        "obstacles": obstacles,
        "users": users,
        "rf": {
            "f_c_ghz": scn.rf.f_c,
            "bandwidth_hz": scn.rf.bandwidth,
            "noise_figure_db": scn.rf.noise_figure,
            "p_max_dbm": scn.rf.p_max_dbm,
            "t1_db": scn.rf.t1_db,
            "t2_db": scn.rf.t2_db,
            "bs_antennas": scn.rf.m_antennas,
            "ris_elements": scn.rf.n_elements,
            "antenna_spacing": scn.rf.antenna_spacing,
        },
        "placement": {
            "candidates": scn.placement.candidates,
            "instantiations": scn.placement.instantiations,
            "d_start": scn.placement.d_start,
            "d_p": scn.placement.d_p,
            "refine_radius": scn.placement.refine_radius,
            "grid_resolution": scn.placement.grid_resolution,
        },
        "solver": {
            "max_iters": scn.solver.max_iters,
            "rel_tol": scn.solver.rel_tol,
            "extrapolation": ex,
            "kappa0": scn.solver.kappa0,
            "backtrack_factor": scn.solver.backtrack_factor,
        },
        "seed": scn.seed,
    }


def save_scenario(scn: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scn), indent=2) + "\n")


def bundled_scenario_path(name: str) -> Path:
    """Path of a bundled scenario fixture, e.g. 'scenario1'."""
    ref = resources.files("risplace").joinpath(f"scenarios/{name}.json")
    return Path(str(ref))
