"""Symmetric TSP instances: TSPLIB I/O, tour arithmetic, and exact small-n oracles."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "TsplibError",
    "TspInstance",
    "Tour",
    "parse_tsplib",
    "serialize_tsplib",
    "load_tsplib",
    "bundled_instance_path",
    "bundled_instances",
    "load_catalog",
    "tour_length",
    "check_permutation",
    "brute_force_optimum",
    "nearest_neighbour",
    "random_euclidean",
    "BRUTE_FORCE_LIMIT",
]

BRUTE_FORCE_LIMIT = 10
SOURCES = ("tsplib-euc2d", "tsplib-explicit", "qanalysis", "synthetic")
EXPLICIT_FORMATS = ("FULL_MATRIX", "UPPER_ROW", "LOWER_ROW", "UPPER_DIAG_ROW", "LOWER_DIAG_ROW")


class TsplibError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TspInstance:
    name: str
    cost: np.ndarray
    source: str = "synthetic"
    coords: np.ndarray | None = None
    comment: str = ""

    def __post_init__(self) -> None:
        cost = np.asarray(self.cost, dtype=float)
        if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
            raise ValueError(f"cost matrix must be square, got shape {cost.shape}")
        if not np.array_equal(cost, cost.T):
            raise ValueError("cost matrix must be symmetric")
        if np.any(np.diagonal(cost) != 0):
            raise ValueError("cost matrix must have a zero diagonal")
        if np.any(cost < 0) or not np.all(np.isfinite(cost)):
            raise ValueError("costs must be finite and nonnegative")
        if self.source not in SOURCES:
            raise ValueError(f"unknown instance source {self.source!r}")
        cost.setflags(write=False)
        object.__setattr__(self, "cost", cost)

    @property
    def n(self) -> int:
        return self.cost.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TspInstance):
            return NotImplemented
        return (self.name == other.name and self.source == other.source
                and np.array_equal(self.cost, other.cost))

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Tour:
    order: tuple[int, ...]
    length: float

    def edges(self) -> list[tuple[int, int]]:
        o = self.order
        return [(o[k], o[(k + 1) % len(o)]) for k in range(len(o))]


# --------------------------------------------------------------------------- TSPLIB


def _nint(x: float) -> int:
    # TSPLIB nint: (int)(x + 0.5)
    return int(math.floor(x + 0.5))


def euc2d_matrix(coords: np.ndarray) -> np.ndarray:
    n = len(coords)
    cost = np.zeros((n, n))
    for i in range(n):
        xi, yi = coords[i]
        for j in range(i + 1, n):
            xd, yd = xi - coords[j][0], yi - coords[j][1]
            cost[i, j] = cost[j, i] = _nint(math.sqrt(xd * xd + yd * yd))
    return cost


def _explicit_matrix(values: list[float], n: int, fmt: str) -> np.ndarray:
    if fmt == "FULL_MATRIX":
        cells = [(i, j) for i in range(n) for j in range(n)]
    elif fmt == "UPPER_ROW":
        cells = [(i, j) for i in range(n) for j in range(i + 1, n)]
    elif fmt == "LOWER_ROW":
        cells = [(i, j) for i in range(n) for j in range(i)]
    elif fmt == "UPPER_DIAG_ROW":
        cells = [(i, j) for i in range(n) for j in range(i, n)]
    elif fmt == "LOWER_DIAG_ROW":
        cells = [(i, j) for i in range(n) for j in range(i + 1)]
    else:
        raise TsplibError(f"unsupported EDGE_WEIGHT_FORMAT {fmt!r}")
    if len(values) != len(cells):
        raise TsplibError(f"EDGE_WEIGHT_SECTION has {len(values)} values, "
                          f"{fmt} with DIMENSION {n} needs {len(cells)}")
    m = np.zeros((n, n))
    for (i, j), v in zip(cells, values):
        m[i, j] = v
        if fmt != "FULL_MATRIX":
            m[j, i] = v
    if fmt == "FULL_MATRIX" and not np.array_equal(m, m.T):
        raise TsplibError("FULL_MATRIX is not symmetric")
    return m


def parse_tsplib(text: str) -> TspInstance:
    """Parse the symmetric EUC_2D / EXPLICIT subset of TSPLIB.

    EUC_2D distances are rounded to the nearest integer, halves up.
    """
    header: dict[str, str] = {}
    sections: dict[str, list[str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        key, sep, value = line.partition(":")
        key = key.strip().upper()
        if key.endswith("_SECTION"):
            current = key
            sections[current] = []
        elif sep:
            header[key] = value.strip()
            current = None
        elif current is not None:
            sections[current].append(line)
        else:
            raise TsplibError(f"unexpected line outside any section: {raw!r}")

    for key in ("DIMENSION", "EDGE_WEIGHT_TYPE"):
        if key not in header:
            raise TsplibError(f"missing mandatory key {key}")
    try:
        n = int(header["DIMENSION"])
    except ValueError:
        raise TsplibError(f"bad DIMENSION {header['DIMENSION']!r}") from None
    ptype = header.get("TYPE", "TSP").split()[0]
    if ptype != "TSP":
        raise TsplibError(f"unsupported problem TYPE {ptype!r}")
    name = header.get("NAME", "unnamed")
    comment = header.get("COMMENT", "")
    wtype = header["EDGE_WEIGHT_TYPE"].upper()

    if wtype == "EUC_2D":
        rows = sections.get("NODE_COORD_SECTION")
        if rows is None:
            raise TsplibError("EUC_2D instance lacks NODE_COORD_SECTION")
        if len(rows) != n:
            raise TsplibError(f"NODE_COORD_SECTION has {len(rows)} nodes, DIMENSION is {n}")
        coords = np.zeros((n, 2))
        for k, row in enumerate(rows):
            parts = row.split()
            if len(parts) != 3:
                raise TsplibError(f"bad coordinate line {row!r}")
            idx = int(parts[0])
            if not 1 <= idx <= n:
                raise TsplibError(f"node index {idx} outside 1..{n}")
            coords[idx - 1] = float(parts[1]), float(parts[2])
        return TspInstance(name, euc2d_matrix(coords), "tsplib-euc2d", coords, comment)
    if wtype == "EXPLICIT":
        fmt = header.get("EDGE_WEIGHT_FORMAT", "").upper()
        if not fmt:
            raise TsplibError("EXPLICIT instance lacks EDGE_WEIGHT_FORMAT")
        rows = sections.get("EDGE_WEIGHT_SECTION")
        if rows is None:
            raise TsplibError("EXPLICIT instance lacks EDGE_WEIGHT_SECTION")
        values = [float(v) for row in rows for v in row.split()]
        return TspInstance(name, _explicit_matrix(values, n, fmt), "tsplib-explicit",
                           None, comment)
    raise TsplibError(f"unsupported EDGE_WEIGHT_TYPE {wtype!r} (supported: EUC_2D, EXPLICIT)")


def _fmt_num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def serialize_tsplib(inst: TspInstance) -> str:
    """Write an instance as TSPLIB text.

    Instances carrying coordinates are written as EUC_2D; everything else as
    an EXPLICIT FULL_MATRIX.
    """
    lines = [f"NAME : {inst.name}", "TYPE : TSP"]
    if inst.comment:
        lines.append(f"COMMENT : {inst.comment}")
    lines.append(f"DIMENSION : {inst.n}")
    if inst.source == "tsplib-euc2d" and inst.coords is not None:
        lines += ["EDGE_WEIGHT_TYPE : EUC_2D", "NODE_COORD_SECTION"]
        for k, (x, y) in enumerate(inst.coords, start=1):
            lines.append(f"{k} {_fmt_num(x)} {_fmt_num(y)}")
    else:
        lines += ["EDGE_WEIGHT_TYPE : EXPLICIT", "EDGE_WEIGHT_FORMAT : FULL_MATRIX",
                  "EDGE_WEIGHT_SECTION"]
        for row in inst.cost:
            lines.append(" ".join(_fmt_num(v) for v in row))
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def load_tsplib(path: str | Path) -> TspInstance:
    return parse_tsplib(Path(path).read_text(encoding="utf-8"))


def _data_dir():
    return resources.files("antnav") / "data"


def bundled_instances() -> list[str]:
    return sorted(p.name[:-4] for p in _data_dir().iterdir() if p.name.endswith(".tsp"))


def bundled_instance_path(name: str) -> Path:
    """Path of a TSPLIB file shipped with the package, e.g. ``"berlin52"``."""
    name = name[:-4] if name.endswith(".tsp") else name
    p = _data_dir() / f"{name}.tsp"
    if not p.is_file():
        raise FileNotFoundError(f"no bundled instance {name!r}; have {bundled_instances()}")
    return Path(str(p))


def load_catalog(path: str | Path | None = None) -> dict[str, float]:
    """Best-known optimum per instance name from a CSV ``instance,best_known``."""
    src = Path(path) if path is not None else _data_dir() / "optima.csv"
    with src.open(encoding="utf-8", newline="") as fh:
        return {row["instance"]: float(row["best_known"]) for row in csv.DictReader(fh)}


# --------------------------------------------------------------------------- tours


def check_permutation(order: Sequence[int], n: int) -> None:
    if len(order) != n or sorted(int(c) for c in order) != list(range(n)):
        raise ValueError(f"order is not a permutation of 0..{n - 1}: {list(order)}")


def tour_length(inst: TspInstance | np.ndarray, order: Sequence[int]) -> float:
    """Length of the closed cycle visiting ``order``."""
    cost = inst.cost if isinstance(inst, TspInstance) else inst
    n = cost.shape[0]
    check_permutation(order, n)
    total = 0.0
    for k in range(n - 1):
        total += cost[order[k], order[k + 1]]
    total += cost[order[n - 1], order[0]]
    return float(total)


def brute_force_optimum(inst: TspInstance) -> Tour:
    """Exact optimum by enumeration, for at most ``BRUTE_FORCE_LIMIT`` cities.

    City 0 is fixed first and each cycle is enumerated in one direction only.
    Among equal-length optima the lexicographically smallest order wins.
    """
    n = inst.n
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force is limited to n <= {BRUTE_FORCE_LIMIT}, got n = {n}")
    if n < 3:
        raise ValueError(f"a cycle needs at least 3 cities, got {n}")
    best_order: tuple[int, ...] | None = None
    best = math.inf
    for rest in itertools.permutations(range(1, n)):
        if rest[0] > rest[-1]:
            continue
        order = (0,) + rest
        length = tour_length(inst, order)
        if length < best:
            best, best_order = length, order
    assert best_order is not None
    return Tour(best_order, best)


def nearest_neighbour(inst: TspInstance, start: int = 0) -> Tour:
    """Greedy tour from ``start``; ties go to the lowest city index."""
    n = inst.n
    if not 0 <= start < n:
        raise IndexError(f"start city {start} out of range for {n} cities")
    visited = np.zeros(n, dtype=bool)
    visited[start] = True
    order = [start]
    cur = start
    for _ in range(n - 1):
        row = np.where(visited, np.inf, inst.cost[cur])
        cur = int(np.argmin(row))  # argmin returns the first minimum
        visited[cur] = True
        order.append(cur)
    return Tour(tuple(order), tour_length(inst, order))


def random_euclidean(n: int, seed: int, name: str | None = None, scale: float = 100.0) -> TspInstance:
    """Uniform random points in a square with unrounded Euclidean costs."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, scale, size=(n, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    cost = np.sqrt((diff ** 2).sum(axis=-1))
    cost = (cost + cost.T) / 2
    np.fill_diagonal(cost, 0.0)
    return TspInstance(name or f"rand{n}-{seed}", cost, "synthetic", pts)
