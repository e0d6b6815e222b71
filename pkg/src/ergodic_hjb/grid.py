"""Uniform tensor grids on centered boxes and real-valued grid fields.

The computational domain is the box [-R, R]^m sampled with spacing h and an
odd node count per axis, so the origin is always a node and can serve as the
anchor for the additive normalization of solutions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "forward_diff",
    "backward_diff",
    "laplacian",
    "field_to_csv",
    "field_from_csv",
    "field_to_json",
    "field_from_json",
]

# 17 significant decimal digits round-trip any IEEE double exactly.
_FLOAT_FMT = ".17g"


def _fmt(x: float) -> str:
    return format(float(x), _FLOAT_FMT)


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [-R, R]^m; node coordinates along each axis are i*h."""

    m: int
    radius: float
    h: float

    def __post_init__(self) -> None:
        if int(self.m) < 1:
            raise ValueError(f"dimension must be >= 1, got {self.m}")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not (np.isfinite(self.h) and 0 < self.h <= self.radius):
            raise ValueError(f"spacing must lie in (0, radius], got {self.h}")

    @property
    def half_count(self) -> int:
        """Number of nodes on each side of the origin along one axis."""
        return int(round(self.radius / self.h))

    @property
    def n_per_axis(self) -> int:
        return 2 * self.half_count + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_per_axis,) * self.m

    @property
    def n_nodes(self) -> int:
        return self.n_per_axis**self.m

    def axis_coords(self) -> np.ndarray:
        k = self.half_count
        return np.arange(-k, k + 1, dtype=float) * self.h

    def meshgrid(self) -> list[np.ndarray]:
        ax = self.axis_coords()
        return list(np.meshgrid(*([ax] * self.m), indexing="ij"))

    def points(self) -> np.ndarray:
        """All node coordinates as an (n_nodes, m) array in C order."""
        mesh = self.meshgrid()
        return np.stack([g.ravel() for g in mesh], axis=-1)

    def radii(self) -> np.ndarray:
        """Euclidean distance of every node from the origin, grid-shaped."""
        mesh = self.meshgrid()
        return np.sqrt(sum(g**2 for g in mesh))

    def coords(self, node: tuple[int, ...]) -> np.ndarray:
        node = self.node_tuple(node)
        k = self.half_count
        return np.array([(i - k) * self.h for i in node])

    def node_tuple(self, node) -> tuple[int, ...]:
        if np.isscalar(node):
            node = (int(node),)
        node = tuple(int(i) for i in node)
        if len(node) != self.m:
            raise ValueError(f"node index has {len(node)} components, grid is {self.m}-dimensional")
        n = self.n_per_axis
        for i in node:
            if not 0 <= i < n:
                raise IndexError(f"node index {node} outside grid of shape {self.shape}")
        return node

    def index_of(self, point) -> tuple[int, ...]:
        """Grid index of a point that must coincide with a node."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        if point.shape != (self.m,):
            raise ValueError(f"point has shape {point.shape}, expected ({self.m},)")
        k = self.half_count
        idx = []
        for x in point:
            j = round(x / self.h)
            if abs(x - j * self.h) > 1e-9 * max(1.0, self.h):
                raise ValueError(f"point {point} does not lie on the grid (h={self.h})")
            if not -k <= j <= k:
                raise ValueError(f"point {point} outside the box of radius {self.radius}")
            idx.append(int(j + k))
        return tuple(idx)

    def is_boundary(self, node) -> bool:
        node = self.node_tuple(node)
        n = self.n_per_axis
        return any(i == 0 or i == n - 1 for i in node)

    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[(slice(1, -1),) * self.m] = True
        return mask

    def boundary_shell_mask(self) -> np.ndarray:
        return ~self.interior_mask()


@dataclass
class Field:
    """Real-valued grid function; values are stored grid-shaped in C order."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            if self.values.size == self.grid.n_nodes:
                self.values = self.values.reshape(self.grid.shape)
            else:
                raise ValueError(
                    f"values shape {self.values.shape} incompatible with grid shape {self.grid.shape}"
                )

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def at(self, node) -> float:
        return float(self.values[self.grid.node_tuple(node)])

    def anchored(self, anchor_node) -> "Field":
        """Return a copy normalized to vanish at the given node."""
        node = self.grid.node_tuple(anchor_node)
        return Field(self.grid, self.values - self.values[node])

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def zeros_field(grid: Grid) -> Field:
    return Field(grid, np.zeros(grid.shape))


def _shift_index(node: tuple[int, ...], axis: int, step: int) -> tuple[int, ...]:
    out = list(node)
    out[axis] += step
    return tuple(out)


def forward_diff(field: Field, axis: int, node) -> float:
    """(u(x + h e_axis) - u(x)) / h; raises if the stencil leaves the grid."""
    g = field.grid
    node = g.node_tuple(node)
    if node[axis] + 1 >= g.n_per_axis:
        raise IndexError(f"forward difference at {node} leaves the grid along axis {axis}")
    up = field.values[_shift_index(node, axis, 1)]
    return float((up - field.values[node]) / g.h)


def backward_diff(field: Field, axis: int, node) -> float:
    """(u(x) - u(x - h e_axis)) / h; raises if the stencil leaves the grid."""
    g = field.grid
    node = g.node_tuple(node)
    if node[axis] - 1 < 0:
        raise IndexError(f"backward difference at {node} leaves the grid along axis {axis}")
    down = field.values[_shift_index(node, axis, -1)]
    return float((field.values[node] - down) / g.h)


def laplacian(field: Field, node) -> float:
    """Central 3-point Laplacian; the node must be strictly interior."""
    g = field.grid
    node = g.node_tuple(node)
    if g.is_boundary(node):
        raise IndexError(f"laplacian stencil undefined at boundary node {node}")
    total = 0.0
    u0 = field.values[node]
    for axis in range(g.m):
        up = field.values[_shift_index(node, axis, 1)]
        down = field.values[_shift_index(node, axis, -1)]
        total += (up - 2.0 * u0 + down) / g.h**2
    return float(total)


# -- serialization ----------------------------------------------------------


def field_to_csv(field: Field) -> str:
    """One row per node, coordinates then value, C order, 17 significant digits."""
    g = field.grid
    header = ",".join(f"x{i + 1}" for i in range(g.m)) + ",value"
    pts = g.points()
    vals = field.values.ravel()
    lines = [header]
    for p, v in zip(pts, vals):
        lines.append(",".join(_fmt(c) for c in p) + "," + _fmt(v))
    return "\n".join(lines) + "\n"


def field_from_csv(text: str, grid: Grid) -> Field:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty CSV document")
    rows = lines[1:]
    if len(rows) != grid.n_nodes:
        raise ValueError(f"CSV has {len(rows)} rows, grid has {grid.n_nodes} nodes")
    vals = np.empty(grid.n_nodes)
    for k, row in enumerate(rows):
        parts = row.split(",")
        if len(parts) != grid.m + 1:
            raise ValueError(f"row {k + 2} has {len(parts)} columns, expected {grid.m + 1}")
        vals[k] = float(parts[-1])
    return Field(grid, vals.reshape(grid.shape))


def dump_json(obj) -> str:
    """Deterministic JSON with floats rendered to 17 significant digits."""
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {dump_json(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dump_json(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            return json.dumps(str(x))
        return _fmt(x)
    if isinstance(obj, np.ndarray):
        return dump_json(obj.tolist())
    return json.dumps(obj)


def field_to_json(field: Field) -> str:
    g = field.grid
    doc = {
        "grid": {"m": g.m, "radius": g.radius, "h": g.h},
        "values": field.values.ravel().tolist(),
    }
    return dump_json(doc) + "\n"


def field_from_json(text: str) -> Field:
    doc = json.loads(text)
    g = Grid(m=int(doc["grid"]["m"]), radius=float(doc["grid"]["radius"]), h=float(doc["grid"]["h"]))
    vals = np.asarray(doc["values"], dtype=float)
    return Field(g, vals.reshape(g.shape))
