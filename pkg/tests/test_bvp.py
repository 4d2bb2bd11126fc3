import numpy as np
import pytest

from wigner_parity import (
    AssemblyError,
    BoundaryData,
    ContractError,
    GridFunction,
    PotentialSpec,
    PropagatorMatrix,
    SpaceGrid,
    VelocityGrid,
    assemble_boundary,
    build_kernel_table,
    build_propagator,
    check_sign_convention,
    march_ivp,
    solve_bvp,
)
from wigner_parity.bvp import symmetric_boundary
from wigner_parity.grid import moments_of

from conftest import maxwellian


def identity_maps(vgrid, scale=1.0):
    K = vgrid.K
    R = PropagatorMatrix("even", "l_to_r", np.eye(K), K, vgrid.dv, 10.0, 200)
    Q = PropagatorMatrix("odd", "r_to_l", scale * np.eye(K), K, vgrid.dv, 10.0, 200)
    return R, Q


class TestBoundaryData:
    def test_lengths(self, vgrid):
        with pytest.raises(ContractError):
            BoundaryData(vgrid, np.ones(3), np.ones(vgrid.K))

    def test_finite(self, vgrid):
        bad = np.ones(vgrid.K)
        bad[2] = np.nan
        with pytest.raises(ContractError):
            BoundaryData(vgrid, bad, np.ones(vgrid.K))

    def test_from_functions_samples_the_right_half(self, vgrid):
        bd = BoundaryData.from_functions(vgrid, lambda v: v, lambda v: v)
        assert np.all(bd.f_L > 0) and np.all(bd.f_R < 0)

    def test_algebra(self, vgrid, rng):
        a = BoundaryData(vgrid, rng.standard_normal(vgrid.K), rng.standard_normal(vgrid.K))
        b = a.scaled(2.0) + a
        assert np.array_equal(b.f_L, 3.0 * a.f_L)


class TestAssemble:
    def test_zero_potential_averages(self, vgrid, rng):
        gp, gm = rng.standard_normal(vgrid.K), rng.standard_normal(vgrid.K)
        bd = BoundaryData(vgrid, gp, gm)
        e, o = assemble_boundary(bd, *identity_maps(vgrid))
        K = vgrid.K
        assert np.array_equal(e.values[K:], 0.5 * (gp + gm[::-1]))
        # o = f_L - e, so it matches the average up to one rounding
        assert np.allclose(o.values[K:], 0.5 * (gp - gm[::-1]), rtol=0, atol=1e-15 * np.abs(gp).max())
        assert (e.parity, o.parity) == ("even", "odd")
        e.validate_parity()
        o.validate_parity()

    def test_mirror_inflow_has_no_odd_part(self, vgrid, rng):
        g = rng.standard_normal(vgrid.K)
        e, o = assemble_boundary(BoundaryData(vgrid, g, g[::-1]), *identity_maps(vgrid))
        assert np.all(o.values == 0)

    def test_general_matches_shortcut_for_even_potential(self, gauss_table, barrier_bd):
        R = build_propagator(gauss_table, "even", "l_to_r")
        Q = build_propagator(gauss_table, "odd", "r_to_l")
        e, o = assemble_boundary(barrier_bd, R, Q)
        es, os_ = symmetric_boundary(barrier_bd)
        dv = gauss_table.vgrid.dv
        diff = np.sqrt(dv) * np.linalg.norm((e.values + o.values) - (es.values + os_.values))
        assert diff <= 1e-5

    def test_singular_system(self, vgrid, barrier_bd):
        with pytest.raises(AssemblyError) as info:
            assemble_boundary(barrier_bd, *identity_maps(vgrid, scale=-1.0))
        assert "condition_number" in info.value.to_dict()

    def test_wrong_roles(self, vgrid, barrier_bd):
        R, Q = identity_maps(vgrid)
        with pytest.raises(ContractError):
            assemble_boundary(barrier_bd, Q, R)


class TestSolve:
    def test_free_streaming(self, zero_table, vgrid, rng):
        bd = BoundaryData(vgrid, rng.standard_normal(vgrid.K), rng.standard_normal(vgrid.K))
        sol = solve_bvp(zero_table, bd)
        expected = np.concatenate([bd.f_R, bd.f_L])
        assert np.max(np.abs(sol.values - expected)) <= 1e-12
        assert sol.provenance["residuals"]["orthogonality"]["max"] == 0.0

    @pytest.mark.parametrize("mode", ["general", "symmetric_shortcut"])
    def test_zero_inflow(self, gauss_table, vgrid, mode):
        sol = solve_bvp(gauss_table, BoundaryData(vgrid, np.zeros(vgrid.K), np.zeros(vgrid.K)), mode)
        assert np.all(sol.values == 0)

    def test_barrier_residuals(self, barrier_solution):
        res = barrier_solution.provenance["residuals"]
        assert res["inflow"]["left"] <= 1e-6
        # f_R = 0 here, so only the recorded discretization term remains
        assert res["inflow"]["right_abs"] <= barrier_solution.provenance["inflow_discretization_term"]
        assert res["current_drift"] <= 1e-8
        assert barrier_solution.provenance["condition_number"] >= 1.0

    def test_two_sided_inflow_relative_residuals(self, gauss_table, vgrid):
        bd = BoundaryData.from_functions(vgrid, maxwellian, lambda v: 0.5 * maxwellian(v))
        res = solve_bvp(gauss_table, bd).provenance["residuals"]["inflow"]
        assert res["left"] <= 1e-6 and res["right"] <= 1e-6

    def test_superposition(self, gauss_table, vgrid, rng):
        a = BoundaryData.from_functions(vgrid, maxwellian, None)
        b = BoundaryData.from_functions(vgrid, None, lambda v: v ** 2 * maxwellian(v))
        lhs = solve_bvp(gauss_table, a.scaled(1.5) + b.scaled(-2.0)).values
        rhs = 1.5 * solve_bvp(gauss_table, a).values - 2.0 * solve_bvp(gauss_table, b).values
        assert np.linalg.norm(lhs - rhs) <= 1e-11 * np.linalg.norm(rhs)

    def test_parity_split(self, gauss_table, barrier_solution):
        sol = barrier_solution
        vg = gauss_table.vgrid
        even = march_ivp(gauss_table, GridFunction(vg, sol.even[0], "even"), "even")
        odd = march_ivp(gauss_table, GridFunction(vg, sol.odd[0], "odd"), "odd")
        scale = np.abs(sol.values).max()
        assert np.max(np.abs(sol.parity_part("even") - even)) <= 1e-11 * scale
        assert np.max(np.abs(sol.parity_part("odd") - odd)) <= 1e-11 * scale

    def test_boundary_moment_symmetry(self, barrier_solution, vgrid):
        J = moments_of(barrier_solution.values[[0, -1]], vgrid, [1, 3, 5, 7])
        assert np.all(np.abs(J[0] - J[1]) <= 1e-6 * np.abs(J[0]))

    def test_moment_q_discrepancy_reported(self, barrier_solution):
        assert 0 <= barrier_solution.provenance["moment_Q_discrepancy"] < 1e-4

    def test_shortcut_needs_even_potential(self, vgrid, sgrid, barrier_bd):
        table = build_kernel_table(PotentialSpec("gaussian", center=1.0), vgrid, SpaceGrid(10.0, 20))
        with pytest.raises(ContractError):
            solve_bvp(table, barrier_bd, "symmetric_shortcut")

    def test_unknown_mode(self, gauss_table, barrier_bd):
        with pytest.raises(ContractError):
            solve_bvp(gauss_table, barrier_bd, "oracle")

    def test_grid_mismatch(self, gauss_table):
        vg = VelocityGrid(8, 0.15)
        with pytest.raises(ContractError):
            solve_bvp(gauss_table, BoundaryData(vg, np.ones(8), np.ones(8)))


class TestSignConvention:
    def test_zero_potential(self, zero_table, barrier_bd):
        assert check_sign_convention(zero_table, barrier_bd)["signs_identical"]

    def test_even_gaussian(self, gauss_table, barrier_bd):
        r = check_sign_convention(gauss_table, barrier_bd)
        assert r["consistent_sign"] == "+B" and not r["signs_identical"]
        assert r["+B"]["inflow"]["right"] <= 1e-6
        assert r["-B"]["inflow"]["right"] > 1e-6
        assert r["+B"]["kinetic_residual"] < 0.01 < 1.0 < r["-B"]["kinetic_residual"]

    def test_symmetric_data_gap_documented(self, gauss_table, vgrid):
        bd = BoundaryData.from_functions(vgrid, maxwellian, maxwellian)
        r = check_sign_convention(gauss_table, bd)
        assert r["-B"]["inflow"]["right"] > r["+B"]["inflow"]["right"]
        assert r["consistent_sign"] == "+B"

    def test_shifted_gaussian(self, vgrid, barrier_bd):
        table = build_kernel_table(PotentialSpec("gaussian", center=1.0), vgrid, SpaceGrid(10.0, 200))
        r = check_sign_convention(table, barrier_bd)
        assert r["+B"]["inflow_under_kinetic_dynamics"]["right"] <= 1e-6
        assert r["-B"]["inflow_under_kinetic_dynamics"]["right"] > 1e-2
        assert r["consistent_sign"] == "+B"
