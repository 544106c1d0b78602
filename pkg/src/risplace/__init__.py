"""Placement planner for a reflecting surface in a multi-user cell.

Public surface: geometry primitives and coverage (geom), link synthesis and
rate metrics (channel), the joint beamforming solver (beamform), the
Monte-Carlo placement search (placement), and scenario I/O (scenario).
"""

from .beamform import FpState, SolverConfig, min_sinr, solve
from .channel import ChannelSet, RfParams, sample_channels, sinr, wsr
from .geom import Cell, Circle, CoverageMap, Point2, Wall, coverage, segment_blocked
from .placement import (
    CandidateSet,
    Homogeneous,
    Hotspots,
    PlacementConfig,
    PlacementResult,
    SolutionSet,
    build_candidate_set,
    build_solution_set,
    mode_cell,
    quantize,
    recursive_refine,
    sample_users,
)
from .scenario import Scenario, load_scenario, save_scenario

__version__ = "0.1.0"

__all__ = [
    "Cell",
    "CandidateSet",
    "ChannelSet",
    "Circle",
    "CoverageMap",
    "FpState",
    "Homogeneous",
    "Hotspots",
    "PlacementConfig",
    "PlacementResult",
    "Point2",
    "RfParams",
    "Scenario",
    "SolutionSet",
    "SolverConfig",
    "Wall",
    "build_candidate_set",
    "build_solution_set",
    "coverage",
    "load_scenario",
    "min_sinr",
    "mode_cell",
    "quantize",
    "recursive_refine",
    "sample_channels",
    "sample_users",
    "save_scenario",
    "segment_blocked",
    "sinr",
    "solve",
    "wsr",
]
