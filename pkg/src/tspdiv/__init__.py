"""Genetic and memetic TSP solvers that keep population diversity in balance
through greedy diversification."""
from .algorithms import (
    Algorithm,
    AlgorithmConfig,
    ConfigError,
    Evaluations,
    Generations,
    RunResult,
    RunTrace,
    WallClock,
    run,
)
from .tsp_core import Population, Tour, edge_distance, population_diversity, tour_cost
from .tsplib_io import Instance, TSPLIBError, UnsupportedFormatError, load_instance, parse_instance

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "AlgorithmConfig",
    "ConfigError",
    "Evaluations",
    "Generations",
    "Instance",
    "Population",
    "RunResult",
    "RunTrace",
    "TSPLIBError",
    "Tour",
    "UnsupportedFormatError",
    "WallClock",
    "edge_distance",
    "load_instance",
    "parse_instance",
    "population_diversity",
    "run",
    "tour_cost",
]
