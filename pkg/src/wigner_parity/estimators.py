"""scikit-learn style front end.

``fit`` samples the kernel and builds whatever transfer maps the solver
needs; ``transform`` maps rows of inflow data to the full distribution at
the left boundary; ``solve`` returns the whole field.  A row of inflow data
lives on the signed velocity grid: the K negative-node entries are f_R,
the K positive-node entries are f_L.

    >>> from wigner_parity import ParityBVPSolver, PotentialSpec
    >>> est = ParityBVPSolver(PotentialSpec("gaussian"), n_velocities=16, dv=0.6, n_cells=40)
    >>> est.fit().transform(X).shape   # doctest: +SKIP
    (n_samples, 32)
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .bvp import BoundaryData, assemble_boundary, assembly_condition, solve_bvp, symmetric_boundary
from .exceptions import ContractError
from .grid import SpaceGrid, VelocityGrid
from .odd_moments import build_moment_Q
from .oracle import solve_direct
from .potential import PotentialSpec, build_kernel_table
from .propagation import build_propagator


class _InflowSolverBase(BaseEstimator):
    def __init__(self, potential=None, length=10.0, n_cells=200, n_velocities=64, dv=0.15):
        self.potential = potential
        self.length = length
        self.n_cells = n_cells
        self.n_velocities = n_velocities
        self.dv = dv

    def _fit_table(self):
        spec = self.potential if self.potential is not None else PotentialSpec("zero")
        if not isinstance(spec, PotentialSpec):
            raise ContractError("potential must be a PotentialSpec")
        self.vgrid_ = VelocityGrid(int(self.n_velocities), float(self.dv))
        self.sgrid_ = SpaceGrid(float(self.length), int(self.n_cells))
        self.table_ = build_kernel_table(spec, self.vgrid_, self.sgrid_, max_moment_order=1)
        self.n_features_in_ = self.vgrid_.size

    def _rows(self, X):
        check_is_fitted(self, "table_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ContractError(f"expected {self.n_features_in_} columns (2K signed nodes), got {X.shape[1]}")
        K = self.vgrid_.K
        return [BoundaryData(self.vgrid_, row[K:], row[:K]) for row in X]

    def solve(self, f_L, f_R):
        check_is_fitted(self, "table_")
        return self._solve(BoundaryData(self.vgrid_, f_L, f_R))

    def transform(self, X):
        return np.stack([self._left_state(bd) for bd in self._rows(X)])


class ParityBVPSolver(_InflowSolverBase):
    """Inflow solver built on the even/odd transfer maps.

    mode : 'general' assembles with the computed maps; 'symmetric_shortcut'
    takes them to be the identity (even potentials only).
    """

    def __init__(self, potential=None, length=10.0, n_cells=200, n_velocities=64, dv=0.15, mode="general"):
        super().__init__(potential, length, n_cells, n_velocities, dv)
        self.mode = mode

    def fit(self, X=None, y=None):
        self._fit_table()
        if self.mode == "general":
            self.R_lr_ = build_propagator(self.table_, "even", "l_to_r")
            self.Q_rl_ = build_propagator(self.table_, "odd", "r_to_l")
            self.condition_number_ = assembly_condition(self.R_lr_, self.Q_rl_)
        elif self.mode == "symmetric_shortcut":
            if not self.table_.spec.is_even:
                raise ContractError("symmetric_shortcut requires an even potential")
            self.condition_number_ = 1.0
        else:
            raise ContractError(f"unknown mode {self.mode!r}")
        return self

    def _left_state(self, bd):
        if self.mode == "general":
            e, o = assemble_boundary(bd, self.R_lr_, self.Q_rl_)
        else:
            e, o = symmetric_boundary(bd)
        return e.values + o.values

    def _solve(self, bd):
        return solve_bvp(self.table_, bd, self.mode)


class UpwindBVPSolver(_InflowSolverBase):
    """Direct first-order upwind solver with the same interface (cross-check)."""

    def fit(self, X=None, y=None):
        self._fit_table()
        return self

    def _left_state(self, bd):
        return self._solve(bd).values[0]

    def _solve(self, bd):
        return solve_direct(self.table_, bd)


class OddMomentMap(TransformerMixin, BaseEstimator):
    """Transfer of odd moments (J_1, ..., J_{2N-1}) across the domain."""

    def __init__(self, potential=None, length=10.0, n_cells=200, n_moments=8, direction="l_to_r"):
        self.potential = potential
        self.length = length
        self.n_cells = n_cells
        self.n_moments = n_moments
        self.direction = direction

    def fit(self, X=None, y=None):
        spec = self.potential if self.potential is not None else PotentialSpec("zero")
        self.Q_ = build_moment_Q(spec, SpaceGrid(float(self.length), int(self.n_cells)),
                                 int(self.n_moments), self.direction)
        self.n_features_in_ = int(self.n_moments)
        return self

    def transform(self, X):
        check_is_fitted(self, "Q_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ContractError(f"expected {self.n_features_in_} moment columns")
        return X @ self.Q_.T
