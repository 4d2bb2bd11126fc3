"""Discrete actions of Theta, B(x) and the regularized A(x).

On the offset grid ``(Theta f)(v_j) = dv * sum_k Vw(x, v_j - v_k) f(v_k)``
is a Toeplitz matrix-vector product, evaluated on the even and odd parts
of f separately so that the parity of the output is exact, not just exact
up to cancellation error; ``B = Theta / v`` nodewise and

    (A f)(v) = (1/v) * dv * sum_k [Vw(x, v - v_k) - Vw(x, -v_k)] f(v_k),

which coincides with B on even functions.
"""

import json

import numpy as np

from .exceptions import ContractError
from .grid import PARITIES, GridFunction, l2_norm, parity_project
from .potential import parity_matvec


def _check(table, f):
    if f.grid != table.vgrid:
        raise ContractError("grid function and kernel table use different velocity grids")


def _flip(parity):
    return {"even": "odd", "odd": "even"}.get(parity)


def apply_theta(table, x_index, f):
    _check(table, f)
    g = parity_matvec(table.parity_blocks(x_index), f.values, -1.0)
    return GridFunction(f.grid, g, _flip(f.parity))


def apply_B(table, x_index, f):
    _check(table, f)
    g = parity_matvec(table.parity_blocks(x_index, divide_by_v=True), f.values, 1.0)
    return GridFunction(f.grid, g, f.parity)


def apply_A(table, x_index, f):
    _check(table, f)
    v = f.grid.nodes
    theta = parity_matvec(table.parity_blocks(x_index), f.values, -1.0)
    # dv * sum_k Vw(x, -v_k) f(v_k); Vw is odd in v
    c = -f.grid.dv * np.dot(table.nodes[x_index], f.values)
    return GridFunction(f.grid, (theta - c) / v, f.parity)


def random_even_function(grid, rng, degree=6):
    """Gaussian-envelope random polynomial, symmetrized by P_e."""
    v = grid.nodes
    coeffs = rng.standard_normal(degree + 1)
    width = rng.uniform(0.5, 2.0)
    shift = rng.uniform(-1.0, 1.0)
    vals = np.polynomial.polynomial.polyval(v / 2, coeffs) * np.exp(-((v - shift) / width) ** 2 / 2)
    return parity_project(GridFunction(grid, vals), "even")


def random_function(grid, rng, parity=None, degree=6):
    f = random_even_function(grid, rng, degree)
    v = grid.nodes
    if parity == "even":
        return f
    g = GridFunction(grid, f.values * np.tanh(v) + rng.standard_normal() * f.values)
    return parity_project(g, parity) if parity in PARITIES else g


class BoundReport(dict):
    """Result of :func:`operator_bound_check`; a dict with a JSON dump."""

    def to_json(self):
        return json.dumps(self, sort_keys=True)


def operator_bound_check(table, x_index, trials=100, seed=0, tol=0.05):
    """Compare max ||A f|| / ||f|| over random even f with sqrt(8) ||Vw||_{H^1}."""
    if trials < 1:
        raise ContractError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(trials):
        f = random_even_function(table.vgrid, rng)
        nf = l2_norm(f)
        ratios.append(l2_norm(apply_A(table, x_index, f)) / nf if nf > 0 else 0.0)
    bound = float(np.sqrt(8.0) * table.h1_norm[x_index])
    max_ratio = float(max(ratios))
    return BoundReport(x=float(table.x[x_index]), bound=bound, max_ratio=max_ratio,
                       trials=int(trials), seed=int(seed), **{"pass": bool(max_ratio <= bound * (1 + tol))})


def subspace_norms(table, x_index):
    """Spectral norms of the grid B(x) restricted to the even and odd subspaces.

    On the odd subspace this grows as dv shrinks; the continuum operator is
    unbounded there.
    """
    B = table.b_matrix(x_index)
    K = table.vgrid.K
    flip = B[K:, :K][:, ::-1]
    return {"even": float(np.linalg.norm(B[K:, K:] + flip, 2)),
            "odd": float(np.linalg.norm(B[K:, K:] - flip, 2))}
