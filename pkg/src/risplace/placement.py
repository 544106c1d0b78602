"""Outer placement search: user sampling, candidate sets, refinement.

The search maximizes the expected worst-user SINR over the user distribution.
Each Monte-Carlo instantiation draws users from a Poisson point process,
builds a set of line-of-sight candidate positions, evaluates the joint
beamformer at every candidate, and keeps the argmax-of-min-SINR candidate.
The multiset of per-instantiation winners is then quantized to a lattice,
its mode located, and the search re-run inside a circle around the mode at
half the lattice step, down to the required precision.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Optional, Sequence, Union

import numpy as np

from . import beamform, channel, geom
from .errors import EmptyInput, InfeasibleQuadrant, RejectionOverflow
from .geom import Cell, Obstacle, Point2
from .rng import Stream, substream

if TYPE_CHECKING:
    from .scenario import Scenario

_POINT_ATTEMPTS = 10_000  # per-point rejection cap ~ acceptance floor 1e-3
_QUADRANT_ATTEMPTS = 100_000


@dataclass(frozen=True)
class Homogeneous:
    """Uniform-density point process over a circular region."""

    density: float  # users per square meter
    region: Cell


@dataclass(frozen=True)
class Hotspots:
    """Piecewise-constant density: one (circle, density) pair per hotspot."""

    spots: tuple  # of (Cell, float)


UserModel = Union[Homogeneous, Hotspots]


@dataclass(frozen=True)
class PlacementConfig:
    """Knobs of the outer search."""

    candidates: int = 40  # T: candidate positions per instantiation
    instantiations: int = 50  # accepted user draws per solution set
    d_start: float = 2.0
    d_p: float = 1.0
    refine_radius: Optional[float] = None  # None: use the current lattice step
    grid_resolution: float = 0.1


@dataclass(frozen=True)
class CandidateSet:
    """T feasible candidate positions drawn inside a search circle."""

    points: tuple  # of Point2
    search_circle: Cell


@dataclass(frozen=True)
class SolutionEntry:
    point: Point2
    min_sinr: float
    wsr: float
    k_users: int
    instantiation: int = 0  # index of the user draw that produced this entry


@dataclass(frozen=True)
class SolutionSet:
    """One winning candidate per accepted user instantiation."""

    entries: tuple  # of SolutionEntry
    search_circle: Cell

    @property
    def points(self) -> tuple:
        return tuple(e.point for e in self.entries)


@dataclass(frozen=True)
class TraceLevel:
    step: float
    mode: Point2
    circle: Optional[Cell]  # circle handed to the next rebuild; None at the last level
    solutions: SolutionSet  # the set quantized at this level


@dataclass
class PlacementResult:
    """Final square region and the refinement trace that produced it."""

    center: Point2
    side: float
    recursion_trace: list  # of TraceLevel
    metrics: dict = field(default_factory=dict)


def _uniform_in_disk(cell: Cell, rng: np.random.Generator) -> Point2:
    r = cell.radius * math.sqrt(rng.uniform())
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return Point2(cell.center.x + r * math.cos(phi), cell.center.y + r * math.sin(phi))


def _sample_region(
    region: Cell,
    density: float,
    obstacles: Sequence[Obstacle],
    rng: np.random.Generator,
) -> list:
    mean = density * math.pi * region.radius**2
    count = int(rng.poisson(mean))
    points = []
    for _ in range(count):
        for _ in range(_POINT_ATTEMPTS):
            p = _uniform_in_disk(region, rng)
            if not geom.point_in_obstacle(p, obstacles):
                points.append(p)
                break
        else:
            raise RejectionOverflow(
                f"could not place a user in region centered "
                f"({region.center.x}, {region.center.y}); region buried in obstacles"
            )
    return points


def sample_users(
    model: UserModel,
    obstacles: Sequence[Obstacle],
    rng_seed: Union[int, np.random.Generator],
) -> list:
    """Draw one user instantiation; may be empty.

    The user count of each region is Poisson in density times area; positions
    are uniform, rejection-resampled off the obstacles.
    """
    rng = (
        rng_seed
        if isinstance(rng_seed, np.random.Generator)
        else substream(rng_seed, Stream.USERS)
    )
    if isinstance(model, Homogeneous):
        return _sample_region(model.region, model.density, obstacles, rng)
    users = []
    for circle, density in model.spots:
        users.extend(_sample_region(circle, density, obstacles, rng))
    return users


def _quadrant_point(circle: Cell, quadrant: int, rng: np.random.Generator) -> Point2:
    # quadrant q covers polar angles [q*pi/2, (q+1)*pi/2) of the circle
    phi = (quadrant + rng.uniform()) * 0.5 * math.pi
    r = circle.radius * math.sqrt(rng.uniform())
    return Point2(
        circle.center.x + r * math.cos(phi), circle.center.y + r * math.sin(phi)
    )


def build_candidate_set(
    bs: Point2,
    obstacles: Sequence[Obstacle],
    circle: Cell,
    count: int,
    d_ff: float,
    rng_seed: Union[int, np.random.Generator],
    cell: Optional[Cell] = None,
) -> CandidateSet:
    """Draw ``count`` feasible candidates, cycling the circle's quadrants.

    A candidate is feasible when its BS link is unobstructed, it is at least
    the far-field distance from the BS, it is not inside an obstacle, and it
    lies inside the deployment cell (defaults to the search circle).
    Quadrants that produce no acceptance within the attempt budget are
    dropped with a warning and their share moves to the remaining ones.
    """
    rng = (
        rng_seed
        if isinstance(rng_seed, np.random.Generator)
        else substream(rng_seed, Stream.CANDIDATES)
    )
    cell = cell or circle
    alive = [0, 1, 2, 3]
    failures = {q: 0 for q in alive}
    accepted: list = []
    cursor = 0
    while len(accepted) < count:
        if not alive:
            raise InfeasibleQuadrant(
                "no quadrant of the search circle admits a feasible candidate"
            )
        q = alive[cursor % len(alive)]
        p = _quadrant_point(circle, q, rng)
        ok = (
            cell.contains(p)
            and not geom.point_in_obstacle(p, obstacles)
            and bs.distance_to(p) >= d_ff
            and not geom.segment_blocked(bs, p, obstacles)
        )
        if ok:
            accepted.append(p)
            failures[q] = 0
            cursor += 1
        else:
            failures[q] += 1
            if failures[q] >= _QUADRANT_ATTEMPTS:
                warnings.warn(
                    f"search-circle quadrant {q} infeasible after "
                    f"{_QUADRANT_ATTEMPTS} draws; rebalancing",
                    stacklevel=2,
                )
                pos = alive.index(q)
                alive.remove(q)
                cursor = pos  # keep cycling from the next live quadrant
    return CandidateSet(points=tuple(accepted), search_circle=circle)


def _evaluate(
    q: Point2,
    users: Sequence[Point2],
    rf: channel.RfParams,
    bs: Point2,
    obstacles: Sequence[Obstacle],
    cfg: beamform.SolverConfig,
    direct: tuple,
    rng_br: np.random.Generator,
    rng_ru: np.random.Generator,
) -> tuple[float, float]:
    legs = channel.sample_ris_legs(rf, bs, q, users, obstacles, rng_br, rng_ru)
    cs = channel.assemble_channel_set(*direct, legs)
    state = beamform.solve(cs, rf, cfg)
    return (
        beamform.min_sinr(cs, state, rf.sigma2),
        state.objective_history[-1] if state.objective_history else 0.0,
    )


def evaluate_candidate(
    q: Point2,
    users: Sequence[Point2],
    scenario: "Scenario",
    rng_seed: int,
    direct: Optional[tuple] = None,
) -> tuple[float, float]:
    """Joint beamforming at candidate q: (worst-user SINR, sum rate).

    With no users the minimum is vacuous: returns (+inf, 0.0) so the caller
    can drop the instantiation.  ``direct`` optionally carries pre-drawn
    direct links (the direct channels do not depend on q).
    """
    if not users:
        return (math.inf, 0.0)
    if direct is None:
        direct = channel.sample_direct(
            scenario.rf, scenario.bs, users, scenario.obstacles,
            substream(rng_seed, Stream.DIRECT),
        )
    return _evaluate(
        q,
        users,
        scenario.rf,
        scenario.bs,
        scenario.obstacles,
        scenario.solver,
        direct,
        substream(rng_seed, Stream.BS_RIS),
        substream(rng_seed, Stream.RIS_USER),
    )


def _run_instantiation(args) -> Optional[SolutionEntry]:
    scenario, circle, count, rng_seed, index = args
    users = sample_users(
        scenario.users, scenario.obstacles, substream(rng_seed, index, Stream.USERS)
    )
    if not users:
        return None
    d_ff = scenario.rf.fraunhofer()
    cands = build_candidate_set(
        scenario.bs,
        scenario.obstacles,
        circle,
        count,
        d_ff,
        substream(rng_seed, index, Stream.CANDIDATES),
        cell=scenario.cell,
    )
    direct = channel.sample_direct(
        scenario.rf,
        scenario.bs,
        users,
        scenario.obstacles,
        substream(rng_seed, index, Stream.DIRECT),
    )
    best = None
    for j, q in enumerate(cands.points):
        msinr, rate = _evaluate(
            q,
            users,
            scenario.rf,
            scenario.bs,
            scenario.obstacles,
            scenario.solver,
            direct,
            substream(rng_seed, index, j, Stream.BS_RIS),
            substream(rng_seed, index, j, Stream.RIS_USER),
        )
        # maximize min-SINR; break ties toward the circle center, then lexicographic
        key = (msinr, -q.distance_to(circle.center), -q.x, -q.y)
        if best is None or key > best[0]:
            best = (key, SolutionEntry(q, msinr, rate, len(users), index))
    return best[1]


def build_solution_set(
    scenario: "Scenario",
    circle: Cell,
    n_inst: int,
    count: int,
    rng_seed: int,
    threads: int = 1,
) -> SolutionSet:
    """One winning candidate per accepted instantiation (empty draws skipped)."""
    entries: list = []
    next_index = 0
    cap = max(100 * n_inst, 1000)
    with _pool(threads) as run:
        while len(entries) < n_inst:
            if next_index >= cap:
                raise RejectionOverflow(
                    "user model produced too many empty instantiations"
                )
            batch = range(next_index, next_index + (n_inst - len(entries)))
            args = [(scenario, circle, count, rng_seed, i) for i in batch]
            for entry in run(args):
                if entry is not None:
                    entries.append(entry)
            next_index = batch.stop
    return SolutionSet(entries=tuple(entries[:n_inst]), search_circle=circle)


class _pool:
    """Map runner: serial for one thread, process pool otherwise."""

    def __init__(self, threads: int):
        self.threads = max(1, int(threads))
        self._executor = None

    def __enter__(self):
        if self.threads == 1:
            return lambda args: map(_run_instantiation, args)
        self._executor = ProcessPoolExecutor(max_workers=self.threads)
        return lambda args: self._executor.map(_run_instantiation, args)

    def __exit__(self, *exc):
        if self._executor is not None:
            self._executor.shutdown()
        return False


def quantize(points: Sequence[Point2], d: float) -> list:
    """Snap each point to the lattice of step d, rounding half away from zero."""
    if d <= 0:
        raise ValueError("quantization step must be positive")

    def snap(v: float) -> float:
        return math.copysign(math.floor(abs(v) / d + 0.5), v) * d

    return [Point2(snap(p.x), snap(p.y)) for p in points]


def mode_cell(quantized: Sequence[Point2]) -> Point2:
    """Most frequent lattice point; ties broken lexicographically (x, then y)."""
    if not quantized:
        raise EmptyInput("mode of an empty multiset is undefined")
    counts = Counter((p.x, p.y) for p in quantized)
    top = max(counts.values())
    winner = min(xy for xy, c in counts.items() if c == top)
    return Point2(*winner)


def _snap_center_feasible(
    center: Point2, solutions: SolutionSet, scenario: "Scenario"
) -> Point2:
    """Quantization can push the mode onto an obstacle or out of the cell;
    fall back to the nearest actual solution point, which is feasible by
    construction."""
    if scenario.cell.contains(center) and not geom.point_in_obstacle(
        center, scenario.obstacles
    ):
        return center
    return min(solutions.points, key=lambda p: p.distance_to(center))


def recursive_refine(
    scenario: "Scenario",
    solutions: SolutionSet,
    d_start: float,
    d_p: float,
    r: Optional[float] = None,
    cfg: Optional[PlacementConfig] = None,
    threads: int = 1,
    rebuild: Optional[Callable[[Cell, int], SolutionSet]] = None,
) -> PlacementResult:
    """Coarse-to-fine mode search over successively rebuilt solution sets.

    Each level quantizes the current solution set at step d and finds the
    modal lattice cell.  While d exceeds the precision d_p, the solution set
    is rebuilt inside a circle around the mode (radius r, defaulting to d)
    and d is halved; the level at which d reaches d_p supplies the final
    center.  ``rebuild`` can replace the Monte-Carlo reconstruction (used by
    synthetic tests).
    """
    cfg = cfg or scenario.placement
    if rebuild is None:

        def rebuild(circle: Cell, level: int) -> SolutionSet:
            seed = int(
                substream(scenario.seed, Stream.LEVEL, level).integers(0, 2**63 - 1)
            )
            return build_solution_set(
                scenario, circle, cfg.instantiations, cfg.candidates, seed, threads
            )

    d = d_start if d_start >= d_p else d_p
    trace: list = []
    current = solutions
    level = 1
    while True:
        cells = quantize(current.points, d)
        mode = mode_cell(cells)
        if d <= d_p * (1.0 + 1e-12):
            trace.append(TraceLevel(step=d, mode=mode, circle=None, solutions=current))
            center = _snap_center_feasible(mode, current, scenario)
            break
        radius = r if r is not None else d
        circle = Cell(center=mode, radius=radius)
        trace.append(TraceLevel(step=d, mode=mode, circle=circle, solutions=current))
        current = rebuild(circle, level)
        d = max(d / 2.0, d_p)
        level += 1
    return PlacementResult(center=center, side=d_p, recursion_trace=trace)
