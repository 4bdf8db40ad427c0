"""Reading TSPLIB ``.tsp`` files (EUC_2D only) and the bundled optimum table."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "Instance",
    "TSPLIBError",
    "UnsupportedFormatError",
    "parse_instance",
    "load_instance",
    "distance",
    "known_optimum",
    "bundled_instances",
]

# full matrix up to this size, on-demand distances above
MATRIX_LIMIT = 2000


class TSPLIBError(ValueError):
    """Malformed TSPLIB input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedFormatError(TSPLIBError):
    pass


def _euc_2d(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=-1))
    # TSPLIB nint(): round half up
    return np.floor(d + 0.5).astype(np.int64)


@dataclass(frozen=True, eq=False)
class Instance:
    """A symmetric Euclidean TSP instance.

    ``coords`` holds one ``(x, y)`` row per city, cities indexed from 0.
    ``optimum`` is the best known tour length and only used for reporting.
    """

    name: str
    coords: np.ndarray
    edge_weight_type: str = "EUC_2D"
    optimum: int | None = None
    comment: str = field(default="", repr=False)

    def __post_init__(self):
        coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError("coords must have shape (m, 2)")
        if coords.shape[0] < 3:
            raise ValueError(f"an instance needs at least 3 cities, got {coords.shape[0]}")
        if self.edge_weight_type != "EUC_2D":
            raise UnsupportedFormatError(f"unsupported format: EDGE_WEIGHT_TYPE {self.edge_weight_type}")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def m(self) -> int:
        return self.coords.shape[0]

    def __len__(self) -> int:
        return self.m

    @cached_property
    def dist(self) -> np.ndarray:
        """Full ``m x m`` integer distance matrix (read-only)."""
        d = _euc_2d(self.coords)
        d.setflags(write=False)
        return d

    def distance(self, i: int, j: int) -> int:
        m = self.m
        if not (0 <= i < m and 0 <= j < m):
            raise IndexError(f"city index out of range for m={m}: ({i}, {j})")
        if m <= MATRIX_LIMIT:
            return int(self.dist[i, j])
        dx, dy = self.coords[i] - self.coords[j]
        return int(math.floor(math.sqrt(dx * dx + dy * dy) + 0.5))


def distance(instance: Instance, i: int, j: int) -> int:
    return instance.distance(i, j)


def parse_instance(text: str, optimum: int | None = None) -> Instance:
    """Parse the contents of a TSPLIB ``.tsp`` file.

    If ``optimum`` is not given, the bundled table is consulted by NAME.
    """
    header: dict[str, str] = {}
    coords: list[tuple[float, float]] = []
    seen: set[int] = set()
    in_coords = False
    coord_line = None
    dim = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        if in_coords:
            parts = line.split()
            if len(parts) != 3:
                # another section starts
                if parts[0].endswith("_SECTION"):
                    raise UnsupportedFormatError(f"unsupported section {parts[0]}", lineno)
                raise TSPLIBError(f"expected 'index x y', got {line!r}", lineno)
            try:
                idx = int(parts[0])
                x, y = float(parts[1]), float(parts[2])
            except ValueError:
                raise TSPLIBError(f"bad coordinate record {line!r}", lineno) from None
            if dim is not None and not 1 <= idx <= dim:
                raise TSPLIBError(f"node index {idx} outside 1..{dim}", lineno)
            if idx in seen:
                raise TSPLIBError(f"duplicate node index {idx}", lineno)
            if idx != len(coords) + 1:
                raise TSPLIBError(f"node {idx} out of order (expected {len(coords) + 1})", lineno)
            seen.add(idx)
            coords.append((x, y))
            continue

        if line.startswith("NODE_COORD_SECTION"):
            in_coords = True
            coord_line = lineno
            ewt = header.get("EDGE_WEIGHT_TYPE")
            if ewt is None:
                raise TSPLIBError("EDGE_WEIGHT_TYPE missing before NODE_COORD_SECTION", lineno)
            if "DIMENSION" not in header:
                raise TSPLIBError("DIMENSION missing before NODE_COORD_SECTION", lineno)
            continue
        if line.endswith("_SECTION"):
            raise UnsupportedFormatError(f"unsupported section {line}", lineno)

        if ":" not in line:
            raise TSPLIBError(f"expected 'KEY : VALUE', got {line!r}", lineno)
        key, value = (s.strip() for s in line.split(":", 1))
        key = key.upper()
        header[key] = value
        if key == "EDGE_WEIGHT_TYPE" and value != "EUC_2D":
            raise UnsupportedFormatError(f"unsupported format: EDGE_WEIGHT_TYPE {value}", lineno)
        if key == "TYPE" and value not in ("TSP",):
            raise UnsupportedFormatError(f"unsupported format: TYPE {value}", lineno)
        if key == "DIMENSION":
            try:
                dim = int(value)
            except ValueError:
                raise TSPLIBError(f"DIMENSION is not an integer: {value!r}", lineno) from None
            if dim < 3:
                raise TSPLIBError(f"DIMENSION must be at least 3, got {dim}", lineno)

    if coord_line is None:
        raise TSPLIBError("NODE_COORD_SECTION missing", len(text.splitlines()))
    if len(coords) != dim:
        raise TSPLIBError(f"DIMENSION is {dim} but {len(coords)} coordinates were read", coord_line)

    name = header.get("NAME", "unnamed")
    if optimum is None:
        optimum = known_optimum(name)
    return Instance(
        name=name,
        coords=np.array(coords, dtype=np.float64),
        edge_weight_type="EUC_2D",
        optimum=optimum,
        comment=header.get("COMMENT", ""),
    )


def bundled_instances() -> list[str]:
    data = resources.files("tspdiv") / "data"
    return sorted(p.name[:-4] for p in data.iterdir() if p.name.endswith(".tsp"))


def load_instance(path_or_name: str | Path) -> Instance:
    """Load a ``.tsp`` file, or a bundled instance by bare name (``"berlin52"``)."""
    p = Path(path_or_name)
    if p.exists():
        return parse_instance(p.read_text())
    name = str(path_or_name)
    if name.endswith(".tsp"):
        name = name[:-4]
    res = resources.files("tspdiv") / "data" / f"{name}.tsp"
    if not res.is_file():
        raise FileNotFoundError(f"no such instance file or bundled instance: {path_or_name}")
    return parse_instance(res.read_text())


@lru_cache(maxsize=None)
def _optima() -> dict[str, int]:
    with (resources.files("tspdiv") / "data" / "optima.csv").open() as fh:
        return {row["name"]: int(row["optimum"]) for row in csv.DictReader(fh)}


def known_optimum(name: str) -> int | None:
    return _optima().get(name)
