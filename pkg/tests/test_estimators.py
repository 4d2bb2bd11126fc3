import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from wigner_parity import (
    ContractError,
    OddMomentMap,
    ParityBVPSolver,
    PotentialSpec,
    UpwindBVPSolver,
    build_moment_Q,
)
from wigner_parity.grid import SpaceGrid

from conftest import maxwellian

SMALL = dict(length=10.0, n_cells=40, n_velocities=16, dv=0.5)


def inflow_rows(est, n, rng):
    v = est.vgrid_.nodes
    K = est.vgrid_.K
    rows = []
    for _ in range(n):
        a, b = rng.uniform(0, 1, 2)
        rows.append(np.concatenate([b * maxwellian(v[:K]), a * maxwellian(v[K:])]))
    return np.array(rows)


class TestParitySolver:
    def test_params_round_trip(self):
        est = ParityBVPSolver(PotentialSpec("gaussian"), mode="symmetric_shortcut", **SMALL)
        params = est.get_params()
        assert params["mode"] == "symmetric_shortcut" and params["n_cells"] == 40
        other = clone(est)
        assert other.get_params()["dv"] == 0.5 and not hasattr(other, "table_")

    def test_transform_matches_solve(self, rng):
        est = ParityBVPSolver(PotentialSpec("gaussian"), **SMALL).fit()
        X = inflow_rows(est, 3, rng)
        out = est.transform(X)
        assert out.shape == (3, 32)
        K = est.vgrid_.K
        for row, left in zip(X, out):
            sol = est.solve(row[K:], row[:K])
            assert np.allclose(sol.values[0], left, rtol=1e-13, atol=1e-15)
            assert np.allclose(left[K:], row[K:], rtol=0, atol=1e-15)
        assert est.condition_number_ >= 1.0

    def test_linear_in_rows(self, rng):
        est = ParityBVPSolver(PotentialSpec("gaussian"), **SMALL).fit()
        X = inflow_rows(est, 2, rng)
        Y = est.transform(np.vstack([X, X[0] + 2 * X[1]]))
        assert np.allclose(Y[2], Y[0] + 2 * Y[1], rtol=1e-12, atol=1e-15)

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            ParityBVPSolver(**SMALL).transform(np.zeros((1, 32)))

    def test_column_count(self, rng):
        est = ParityBVPSolver(**SMALL).fit()
        with pytest.raises(ContractError):
            est.transform(np.zeros((1, 5)))

    def test_shortcut_needs_even_potential(self):
        with pytest.raises(ContractError):
            ParityBVPSolver(PotentialSpec("gaussian", center=1.0), mode="symmetric_shortcut", **SMALL).fit()

    def test_unknown_mode(self):
        with pytest.raises(ContractError):
            ParityBVPSolver(mode="fast", **SMALL).fit()


class TestUpwindSolver:
    def test_zero_potential_free_streaming(self, rng):
        est = UpwindBVPSolver(**SMALL).fit()
        X = rng.standard_normal((4, 32))
        assert np.allclose(est.transform(X), X, rtol=0, atol=1e-12)

    def test_same_interface(self, rng):
        p = ParityBVPSolver(PotentialSpec("gaussian"), **SMALL).fit()
        u = UpwindBVPSolver(PotentialSpec("gaussian"), **SMALL).fit()
        X = inflow_rows(p, 2, rng)
        assert p.transform(X).shape == u.transform(X).shape


class TestOddMomentMap:
    def test_matches_moment_Q(self):
        spec = PotentialSpec("gaussian", center=1.0)
        m = OddMomentMap(spec, n_cells=100, n_moments=4).fit()
        Q = build_moment_Q(spec, SpaceGrid(10.0, 100), 4)
        X = np.arange(8.0).reshape(2, 4)
        assert np.array_equal(m.transform(X), X @ Q.T)
        assert np.array_equal(m.fit_transform(X), X @ Q.T)

    def test_inverse_direction(self):
        spec = PotentialSpec("gaussian", center=1.0)
        f = OddMomentMap(spec, n_cells=100, n_moments=5).fit()
        b = OddMomentMap(spec, n_cells=100, n_moments=5, direction="r_to_l").fit()
        X = np.eye(5)
        assert np.allclose(b.transform(f.transform(X)), X, atol=1e-10)

    def test_width_checked(self):
        with pytest.raises(ContractError):
            OddMomentMap(n_moments=3).fit().transform(np.zeros((1, 4)))
