"""Closed odd-moment hierarchy of the odd part and its transfer maps.

For odd f only odd moments survive and

    dJ_n/dx = sum_{k = 1, 3, ..., n-2} C(n-1, k) Vw_k(x) J_{n-1-k}(x),   n = 1, 3, 5, ...

so J_1 is constant and each J_n is a running integral of strictly lower
moments.  Each space interval is integrated with Gauss-Legendre
collocation (spectral integration matrix), so the accuracy is set by the
kernel moments rather than by the space step.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from numpy.polynomial import legendre as L
from scipy.special import eval_hermite, gammaln

from .exceptions import CapabilityError, ContractError, IllPosedError
from .grid import GridFunction, moments_of
from .potential import TABULATED_MAX_DERIV, kernel_moments
from .propagation import DIRECTIONS

DEFAULT_ORDER = 8


@dataclass(frozen=True)
class MomentVector:
    """Odd moments [J_1, J_3, ..., J_{2N-1}] at position ``x``."""

    values: tuple
    x: float = 0.0

    def __post_init__(self):
        vals = tuple(float(a) for a in np.atleast_1d(self.values))
        if not vals:
            raise ContractError("a moment vector needs at least one moment")
        object.__setattr__(self, "values", vals)

    @property
    def order(self):
        return len(self.values)

    @property
    def orders(self):
        return np.arange(1, 2 * self.order, 2)

    @classmethod
    def from_grid_function(cls, f, N, x=0.0):
        return cls(tuple(moments_of(f.values, f.grid, range(1, 2 * N, 2))), x)


@lru_cache(maxsize=8)
def _collocation(p):
    """Gauss-Legendre nodes on [0, 1], weights and the integration matrix S.

    ``S[q, r] = int_0^{t_q} l_r(s) ds`` for the Lagrange basis l_r.
    """
    t, w = L.leggauss(p)
    inv = np.linalg.inv(L.legvander(t, p - 1))
    S = np.empty((p, p))
    for r in range(p):
        antider = L.legint(inv[:, r], lbnd=-1.0)
        S[:, r] = L.legval(t, antider)
    # map [-1, 1] -> [0, 1]
    return (t + 1) / 2, w / 2, S / 2


def _check_order(spec, N):
    if N < 1:
        raise ContractError("need at least one moment")
    needed = 2 * N - 3
    if spec.family == "tabulated" and needed > TABULATED_MAX_DERIV:
        raise CapabilityError(
            f"tabulated potentials provide kernel moments up to order {TABULATED_MAX_DERIV}; "
            f"N = {N} needs order {needed}", max_N=(TABULATED_MAX_DERIV + 3) // 2)


def solve_hierarchy(spec, sgrid, J0, direction="l_to_r", points_per_interval=10):
    """Odd moments at every space node, shape (M + 1, N), rows by increasing x.

    ``J0`` is given at x = -l/2 for ``l_to_r`` and at x = +l/2 for ``r_to_l``.
    The reverse direction integrates the same system backwards in x, which
    is the sign-flipped system in the marching variable l/2 - x; the two
    directional maps are therefore mutually inverse.
    """
    if direction not in DIRECTIONS:
        raise ContractError(f"direction must be one of {DIRECTIONS}")
    J0 = J0 if isinstance(J0, MomentVector) else MomentVector(J0)
    N = J0.order
    _check_order(spec, N)
    t, w, S = _collocation(points_per_interval)
    xs = sgrid.nodes
    h = sgrid.dx
    M = sgrid.M
    # quadrature points of every interval, shape (M, p)
    xq = xs[:-1, None] + h * t[None, :]
    Vq = kernel_moments(spec, xq, max(2 * N - 3, 1))
    start = 0 if direction == "l_to_r" else M
    J_nodes = np.empty((M + 1, N))
    J_quad = np.empty((M, t.size, N))
    for i, n in enumerate(range(1, 2 * N, 2)):
        g = np.zeros((M, t.size))
        for k in range(1, n - 1, 2):
            g += comb(n - 1, k) * Vq[:, :, k // 2] * J_quad[:, :, (n - 1 - k) // 2]
        local = h * g @ S.T
        totals = h * g @ w
        run = np.concatenate([[0.0], np.cumsum(totals)])
        offset = J0.values[i] - run[start]
        J_nodes[:, i] = offset + run
        J_quad[:, :, i] = offset + run[:-1, None] + local
    return J_nodes


def build_moment_Q(spec, sgrid, N=DEFAULT_ORDER, direction="l_to_r"):
    """N x N transfer matrix on odd-moment coordinates (unit lower triangular)."""
    cols = []
    end = -1 if direction == "l_to_r" else 0
    for m in range(N):
        e = np.zeros(N)
        e[m] = 1.0
        cols.append(solve_hierarchy(spec, sgrid, MomentVector(e), direction)[end])
    return np.column_stack(cols)


def hermite_function(k, v):
    """Orthonormal Hermite function H_k(v) exp(-v^2/2) / sqrt(2^k k! sqrt(pi))."""
    log_norm = 0.5 * (k * np.log(2.0) + gammaln(k + 1) + 0.5 * np.log(np.pi))
    return eval_hermite(k, v) * np.exp(-v * v / 2 - log_norm)


def reconstruct_odd(moments, vgrid, max_condition=1e12):
    """Odd representative with the given odd moments, from N odd Hermite functions.

    Solves the N x N moment-matching system on the grid.  The result is one
    truncated representative, not the unique function carrying these moments.
    """
    J = np.asarray(moments.values if isinstance(moments, MomentVector) else moments, dtype=float)
    N = J.size
    if N < 1:
        raise ContractError("need at least one moment")
    v = vgrid.nodes
    basis = np.stack([hermite_function(2 * m - 1, v) for m in range(1, N + 1)], axis=1)
    A = moments_of(basis.T, vgrid, range(1, 2 * N, 2)).T
    # equilibrate before judging conditioning; raw moments span many decades
    r = 1.0 / np.max(np.abs(A), axis=1)
    As = A * r[:, None]
    c = 1.0 / np.max(np.abs(As), axis=0)
    As = As * c[None, :]
    cond = float(np.linalg.cond(As))
    if not cond <= max_condition:
        raise IllPosedError("moment-matching system is ill-conditioned; use fewer moments",
                            condition_number=cond, N=N)
    coeffs = c * np.linalg.solve(As, r * J)
    return GridFunction(vgrid, basis @ coeffs, "odd")


def orthogonality_residual(table, values):
    """Per-x residual dv * sum_j Vw(x, v_j) f(x, v_j) of the odd-part condition.

    ``values`` holds slices at the space nodes, shape (M + 1, 2K).
    """
    vw = table.nodes[::2]
    return table.vgrid.dv * np.einsum("ij,ij->i", vw, np.asarray(values))
