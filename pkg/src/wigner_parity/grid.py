"""Velocity/space discretizations and the parity algebra on them.

The velocity grid is the symmetric offset grid ``v_j = +-(j + 1/2) dv``,
``j = 0..K-1``.  Zero is never a node, so 1/v is finite, and ``v -> -v``
maps the grid onto itself by reversing the signed node order.  Every
velocity integral is the midpoint rule on this grid.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError

PARITIES = ("even", "odd")


@dataclass(frozen=True)
class VelocityGrid:
    K: int
    dv: float

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ContractError("K must be a positive integer", field="velocity.K")
        if not self.dv > 0:
            raise ContractError("dv must be positive", field="velocity.dv")

    @property
    def size(self):
        return 2 * self.K

    @property
    def positive(self):
        return (np.arange(self.K) + 0.5) * self.dv

    @property
    def nodes(self):
        p = self.positive
        return np.concatenate([-p[::-1], p])

    @property
    def v_max(self):
        return (self.K - 0.5) * self.dv

    def refined(self, factor=2):
        """Grid with ``dv / factor`` covering the same velocity range."""
        return VelocityGrid(self.K * factor, self.dv / factor)


@dataclass(frozen=True)
class SpaceGrid:
    length: float
    M: int

    def __post_init__(self):
        if not self.length > 0:
            raise ContractError("domain length l must be positive", field="domain.l")
        if int(self.M) != self.M or self.M < 1:
            raise ContractError("M must be a positive integer", field="domain.M")

    @property
    def dx(self):
        return self.length / self.M

    @property
    def nodes(self):
        return -self.length / 2 + np.arange(self.M + 1) * self.dx

    @property
    def half_step_nodes(self):
        return -self.length / 2 + np.arange(2 * self.M + 1) * (self.dx / 2)

    def refined(self, factor=2):
        return SpaceGrid(self.length, self.M * factor)


class GridFunction:
    """The discrete f(x, .) at one position: values at the signed nodes.

    ``parity`` is advisory; call :meth:`validate_parity` to check it.
    """

    def __init__(self, grid, values, parity=None):
        values = np.array(values, dtype=float)
        if values.shape != (grid.size,):
            raise ContractError(f"expected {grid.size} values, got shape {values.shape}")
        if parity not in (None,) + PARITIES:
            raise ContractError(f"unknown parity tag {parity!r}")
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.parity = parity

    @classmethod
    def from_callable(cls, grid, func, parity=None):
        return cls(grid, func(grid.nodes), parity)

    def __repr__(self):
        return f"GridFunction(K={self.grid.K}, dv={self.grid.dv}, parity={self.parity})"

    def parity_defect(self, which):
        sign = 1.0 if which == "even" else -1.0
        v = self.values
        scale = max(float(np.max(np.abs(v))), np.finfo(float).tiny)
        return float(np.max(np.abs(v - sign * v[::-1]))) / scale if v.size else 0.0

    def validate_parity(self, tol=1e-12):
        if self.parity is not None and self.parity_defect(self.parity) > tol:
            raise ContractError(f"grid function is not {self.parity}",
                                defect=self.parity_defect(self.parity))
        return self

    def __add__(self, other):
        _check_same_grid(self.grid, other.grid)
        tag = self.parity if self.parity == other.parity else None
        return GridFunction(self.grid, self.values + other.values, tag)

    def __sub__(self, other):
        _check_same_grid(self.grid, other.grid)
        tag = self.parity if self.parity == other.parity else None
        return GridFunction(self.grid, self.values - other.values, tag)

    def __mul__(self, alpha):
        return GridFunction(self.grid, alpha * self.values, self.parity)

    __rmul__ = __mul__


def _check_same_grid(a, b):
    if a != b:
        raise ContractError("grid functions live on different velocity grids")


def parity_project(f, which):
    """P_e f = (f(v) + f(-v))/2 or P_o f = (f(v) - f(-v))/2."""
    if which not in PARITIES:
        raise ContractError(f"which must be 'even' or 'odd', got {which!r}")
    v = f.values
    mirrored = v[::-1]
    out = 0.5 * (v + mirrored) if which == "even" else 0.5 * (v - mirrored)
    return GridFunction(f.grid, out, which)


def inflow_restrict(f, side):
    """Values at the K positive ('plus') or K negative ('minus') nodes, in node order."""
    K = f.grid.K
    if side == "plus":
        return f.values[K:].copy()
    if side == "minus":
        return f.values[:K].copy()
    raise ContractError(f"side must be 'plus' or 'minus', got {side!r}")


def combine_inflow(grid, minus, plus):
    """Inverse of the two restrictions."""
    minus = np.asarray(minus, dtype=float)
    plus = np.asarray(plus, dtype=float)
    if minus.shape != (grid.K,) or plus.shape != (grid.K,):
        raise ContractError("half vectors must have length K")
    return GridFunction(grid, np.concatenate([minus, plus]))


def from_half(grid, half, parity):
    """Extend positive-node values to the full grid with the given parity."""
    half = np.asarray(half, dtype=float)
    sign = 1.0 if parity == "even" else -1.0
    return GridFunction(grid, np.concatenate([sign * half[::-1], half]), parity)


def velocity_moment(f, n):
    """J_n = dv * sum_j v_j^n f(v_j)."""
    if n < 0:
        raise ContractError("moment order must be non-negative")
    return float(f.grid.dv * np.dot(f.grid.nodes ** n, f.values))


def moments_of(values, grid, orders):
    """Moments of many slices at once: ``values`` has the velocity axis last."""
    v = grid.nodes
    powers = np.stack([v ** n for n in orders], axis=1)
    return grid.dv * np.asarray(values) @ powers


def l2_norm(f):
    return float(np.sqrt(f.grid.dv * np.dot(f.values, f.values)))


def _fmt(x):
    return repr(float(x))


def write_grid_function(path, f):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["v", "value"])
        for v, val in zip(f.grid.nodes, f.values):
            w.writerow([_fmt(v), _fmt(val)])


def read_grid_function(path, grid, parity=None):
    data = np.loadtxt(path, delimiter=",", comments="#", skiprows=1, ndmin=2)
    if data.shape != (grid.size, 2) or not np.allclose(data[:, 0], grid.nodes, rtol=1e-12, atol=0):
        raise ContractError(f"{path}: nodes do not match the velocity grid")
    return GridFunction(grid, data[:, 1], parity)


def write_field(path, xs, vgrid, values):
    """Field CSV with columns (x, v, value), x-major."""
    v = vgrid.nodes
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "v", "value"])
        for x, row in zip(xs, values):
            sx = _fmt(x)
            w.writerows([sx, _fmt(vj), _fmt(val)] for vj, val in zip(v, row))


def read_field(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    xs = np.unique(data[:, 0])
    return xs, data[:, 2].reshape(xs.size, -1)
