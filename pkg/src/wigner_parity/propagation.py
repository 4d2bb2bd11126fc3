"""Marching df/dx = B(x) f across the domain and the resulting transfer maps.

Classical RK4 with B sampled at the half-step nodes of the kernel table.
The right-to-left direction marches the same equation with a negative
step, so the two directional propagators are inverse to each other up to
the integration error.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError, DivergenceError
from .grid import PARITIES, GridFunction
from .potential import parity_matvec

DIRECTIONS = ("l_to_r", "r_to_l")


def _check_direction(direction):
    if direction not in DIRECTIONS:
        raise ContractError(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def rk4_march(table, Y, direction="l_to_r", sign=1.0):
    """March columns of ``Y`` (velocity axis first) through every space node.

    Returns an array of shape ``(M + 1,) + Y.shape`` ordered by increasing x,
    whatever the direction.  ``sign = -1`` marches df/dx = -B f instead.
    """
    _check_direction(direction)
    sgrid = table.sgrid
    M = sgrid.M
    h = sgrid.dx if direction == "l_to_r" else -sgrid.dx
    step = 1 if direction == "l_to_r" else -1
    fine = 0 if direction == "l_to_r" else 2 * M
    out = np.empty((M + 1,) + Y.shape)
    pos = 0 if direction == "l_to_r" else M
    out[pos] = Y
    def blocks(i):
        Se, So = table.parity_blocks(i, divide_by_v=True)
        return sign * Se, sign * So

    def B(blk, Z):
        return parity_matvec(blk, Z, 1.0)

    B0 = blocks(fine)
    for n in range(M):
        B1 = blocks(fine + step)
        B2 = blocks(fine + 2 * step)
        k1 = B(B0, Y)
        k2 = B(B1, Y + 0.5 * h * k1)
        k3 = B(B1, Y + 0.5 * h * k2)
        k4 = B(B2, Y + h * k3)
        Y = Y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        pos += step
        fine += 2 * step
        if not np.all(np.isfinite(Y)):
            raise DivergenceError("non-finite values while marching", x_reached=float(table.x[fine]))
        out[pos] = Y
        B0 = B2
    return out


def march_ivp(table, f0, parity, direction="l_to_r"):
    """Solve the IVP from the left (or right) end; returns slices, shape (M+1, 2K).

    ``f0`` must carry the declared parity (checked to 1e-12 relative).
    """
    if parity not in PARITIES + (None,):
        raise ContractError(f"unknown parity {parity!r}")
    if f0.grid != table.vgrid:
        raise ContractError("initial data and kernel table use different velocity grids")
    if parity is not None:
        GridFunction(f0.grid, f0.values, parity).validate_parity()
    return rk4_march(table, f0.values, direction)


def parity_basis(vgrid, parity):
    """Columns e_j + (+-)e_{-j}: unit value at positive node j, mirrored."""
    K = vgrid.K
    E = np.zeros((2 * K, K))
    j = np.arange(K)
    E[K + j, j] = 1.0
    E[K - 1 - j, j] = 1.0 if parity == "even" else -1.0
    return E


@dataclass(frozen=True, eq=False)
class PropagatorMatrix:
    """K x K map on positive-node coordinates of one parity subspace."""

    parity: str
    direction: str
    matrix: np.ndarray
    K: int
    dv: float
    length: float
    M: int
    scheme: str = "rk4"
    grid_regularized: bool = False

    @property
    def condition_number(self):
        return float(np.linalg.cond(self.matrix))

    def apply(self, half):
        return self.matrix @ np.asarray(half, dtype=float)

    def metadata(self):
        return {
            "parity": self.parity,
            "direction": self.direction,
            "grids": {"K": self.K, "dv": self.dv, "l": self.length, "M": self.M},
            "scheme": {"name": self.scheme, "dx": self.length / self.M},
            "grid_regularized": self.grid_regularized,
            "condition_number": self.condition_number,
        }

    def save(self, csv_path, json_path=None):
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for row in self.matrix:
                w.writerow([repr(float(a)) for a in row])
        if json_path is not None:
            with open(json_path, "w") as fh:
                json.dump(self.metadata(), fh, indent=2, sort_keys=True)


def build_propagator(table, parity, direction="l_to_r", sign=1.0):
    """Transfer map of one parity component across [-l/2, l/2].

    Column j is the march of the j-th parity basis vector; the K x K matrix
    acts on positive-node values, which determine the rest by parity.
    """
    if parity not in PARITIES:
        raise ContractError(f"parity must be 'even' or 'odd', got {parity!r}")
    vgrid = table.vgrid
    E = parity_basis(vgrid, parity)
    traj = rk4_march(table, E, direction, sign)
    end = traj[-1] if direction == "l_to_r" else traj[0]
    return PropagatorMatrix(parity, direction, end[vgrid.K:].copy(), vgrid.K, vgrid.dv,
                            table.sgrid.length, table.sgrid.M,
                            grid_regularized=(parity == "odd"))
