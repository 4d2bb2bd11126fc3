"""Inflow boundary value problem assembled from the parity transfer maps.

Unknowns are the even and odd parts of f(-l/2) on positive nodes.  The
left inflow fixes their sum, the right inflow fixes ``R e - Q o`` (parity
turns the negative-node values at x = l/2 into positive-node ones), which
gives

    (Q_rl R_lr + I) e = Q_rl f_R(-v) + f_L(v),      o = f_L - e,      v > 0.

Both parts are then marched from -l/2 and summed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import AssemblyError, ContractError
from .grid import GridFunction, from_half, moments_of
from .odd_moments import build_moment_Q, orthogonality_residual
from .propagation import build_propagator, rk4_march

MODES = ("general", "symmetric_shortcut")


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Inflow data: ``f_L`` on positive nodes, ``f_R`` on negative nodes (node order)."""

    vgrid: object
    f_L: np.ndarray
    f_R: np.ndarray

    def __post_init__(self):
        K = self.vgrid.K
        for name in ("f_L", "f_R"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (K,):
                raise ContractError(f"{name} must have length K = {K}", field=f"boundary.{name}")
            if not np.all(np.isfinite(arr)):
                raise ContractError(f"{name} has non-finite values", field=f"boundary.{name}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_functions(cls, vgrid, left=None, right=None):
        """Sample callables on positive (left) / negative (right) nodes; None means zero."""
        v = vgrid.nodes
        K = vgrid.K
        fl = left(v[K:]) if left is not None else np.zeros(K)
        fr = right(v[:K]) if right is not None else np.zeros(K)
        return cls(vgrid, fl, fr)

    def scaled(self, alpha):
        return BoundaryData(self.vgrid, alpha * self.f_L, alpha * self.f_R)

    def __add__(self, other):
        return BoundaryData(self.vgrid, self.f_L + other.f_L, self.f_R + other.f_R)


@dataclass(frozen=True, eq=False)
class SolutionField:
    """Slices f(x_i, .) at the M + 1 space nodes plus a provenance record."""

    vgrid: object
    sgrid: object
    values: np.ndarray
    provenance: dict = field(default_factory=dict)
    even: np.ndarray | None = None
    odd: np.ndarray | None = None

    def __post_init__(self):
        shape = (self.sgrid.M + 1, self.vgrid.size)
        if self.values.shape != shape:
            raise ContractError(f"field must have shape {shape}")

    def slice(self, i):
        return GridFunction(self.vgrid, self.values[i])

    def moments(self, orders):
        return moments_of(self.values, self.vgrid, orders)

    def parity_part(self, which):
        sign = 1.0 if which == "even" else -1.0
        return 0.5 * (self.values + sign * self.values[:, ::-1])


def assembly_matrix(R_lr, Q_rl):
    return Q_rl.matrix @ R_lr.matrix + np.eye(R_lr.K)


def assembly_condition(R_lr, Q_rl):
    return float(np.linalg.cond(assembly_matrix(R_lr, Q_rl)))


def assemble_boundary(bd, R_lr, Q_rl, max_condition=1e12):
    """Even and odd parts of f(-l/2) from inflow data and the two transfer maps."""
    if R_lr.parity != "even" or R_lr.direction != "l_to_r":
        raise ContractError("R_lr must be the even left-to-right propagator")
    if Q_rl.parity != "odd" or Q_rl.direction != "r_to_l":
        raise ContractError("Q_rl must be the odd right-to-left propagator")
    if not (R_lr.K == Q_rl.K == bd.vgrid.K):
        raise ContractError("propagators and boundary data use different grids")
    S = assembly_matrix(R_lr, Q_rl)
    cond = float(np.linalg.cond(S))
    if not cond <= max_condition:
        raise AssemblyError("assembly system (Q_rl R_lr + I) is singular or ill-conditioned",
                            condition_number=cond)
    fR_mirror = bd.f_R[::-1]
    e = np.linalg.solve(S, Q_rl.matrix @ fR_mirror + bd.f_L)
    o = bd.f_L - e
    return from_half(bd.vgrid, e, "even"), from_half(bd.vgrid, o, "odd")


def symmetric_boundary(bd):
    """Boundary split when both transfer maps are the identity."""
    fR_mirror = bd.f_R[::-1]
    e = 0.5 * (bd.f_L + fR_mirror)
    o = 0.5 * (bd.f_L - fR_mirror)
    return from_half(bd.vgrid, e, "even"), from_half(bd.vgrid, o, "odd")


def _rel(res, ref):
    return res / ref if ref > 0 else res


def inflow_residuals(bd, values):
    dv = bd.vgrid.dv
    K = bd.vgrid.K
    left = np.sqrt(dv) * np.linalg.norm(values[0, K:] - bd.f_L)
    right = np.sqrt(dv) * np.linalg.norm(values[-1, :K] - bd.f_R)
    nl = np.sqrt(dv) * np.linalg.norm(bd.f_L)
    nr = np.sqrt(dv) * np.linalg.norm(bd.f_R)
    return {"left": float(_rel(left, nl)), "right": float(_rel(right, nr)),
            "left_abs": float(left), "right_abs": float(right)}


def current_drift(vgrid, values):
    J1 = moments_of(values, vgrid, [1])[:, 0]
    return float(np.max(np.abs(J1 - J1[0])) / (1.0 + abs(J1[0])))


def solve_bvp(table, bd, mode="general", n_moments=None, sign=1.0):
    """Solve the inflow problem on the table's grids.

    ``general`` builds R_lr and the grid-level Q_rl and solves the assembly
    system; ``symmetric_shortcut`` requires an even potential and takes both
    maps to be the identity.  Inflow residuals, current drift, the odd-part
    orthogonality residual and (if ``n_moments``) the grid-Q versus moment-Q
    discrepancy are recorded in ``provenance``.
    """
    if mode not in MODES:
        raise ContractError(f"mode must be one of {MODES}, got {mode!r}", field="mode")
    if bd.vgrid != table.vgrid:
        raise ContractError("boundary data and kernel table use different velocity grids")
    prov = {"mode": mode,
            "resolutions": {"K": table.vgrid.K, "dv": table.vgrid.dv,
                            "l": table.sgrid.length, "M": table.sgrid.M}}
    if mode == "symmetric_shortcut":
        if not table.spec.is_even:
            raise ContractError("symmetric_shortcut requires an even potential V(-x) = V(x)")
        even0, odd0 = symmetric_boundary(bd)
    else:
        R_lr = build_propagator(table, "even", "l_to_r", sign)
        Q_rl = build_propagator(table, "odd", "r_to_l", sign)
        prov["condition_number"] = assembly_condition(R_lr, Q_rl)
        prov["propagator_conditions"] = {"R_lr": R_lr.condition_number, "Q_rl": Q_rl.condition_number}
        even0, odd0 = assemble_boundary(bd, R_lr, Q_rl)
        # right-inflow residual equals (Q_rl^{-1} - Q_lr) o exactly
        Q_lr = build_propagator(table, "odd", "l_to_r", sign)
        defect = np.linalg.norm(np.linalg.inv(Q_rl.matrix) - Q_lr.matrix, 2)
        o_half = odd0.values[table.vgrid.K:]
        prov["inflow_discretization_term"] = float(defect * np.sqrt(table.vgrid.dv) * np.linalg.norm(o_half))
        prov["inverse_defect"] = float(np.linalg.norm(Q_lr.matrix @ Q_rl.matrix - np.eye(table.vgrid.K), 2))
    both = np.stack([even0.values, odd0.values], axis=1)
    traj = rk4_march(table, both, "l_to_r", sign)
    even, odd = traj[:, :, 0], traj[:, :, 1]
    values = even + odd
    values.setflags(write=False)
    orth = orthogonality_residual(table, odd)
    prov["residuals"] = {
        "inflow": inflow_residuals(bd, values),
        "current_drift": current_drift(table.vgrid, values),
        "orthogonality": {"max": float(np.max(np.abs(orth))), "per_x": orth.tolist()},
    }
    if n_moments:
        prov["moment_Q_discrepancy"] = moment_q_discrepancy(table, odd, n_moments)
    return SolutionField(table.vgrid, table.sgrid, values, prov, even, odd)


def moment_q_discrepancy(table, odd, N):
    """Relative mismatch between grid-marched odd moments at l/2 and Q_moment J(-l/2)."""
    orders = range(1, 2 * N, 2)
    J = moments_of(odd[[0, -1]], table.vgrid, orders)
    Q = build_moment_Q(table.spec, table.sgrid, N, "l_to_r")
    pred = Q @ J[0]
    scale = np.maximum(np.abs(pred), np.abs(J[1]))
    scale[scale == 0] = 1.0
    return float(np.max(np.abs(pred - J[1]) / scale))


def kinetic_residual(table, values, sign=1.0):
    """Relative residual of v df/dx - Theta f on the interior nodes (central differences)."""
    v = table.vgrid.nodes
    dx = table.sgrid.dx
    dfdx = (values[2:] - values[:-2]) / (2 * dx)
    theta = np.stack([table.theta_matrix(2 * i) @ values[i] for i in range(1, values.shape[0] - 1)])
    res = v * dfdx - theta
    ref = max(np.linalg.norm(theta), np.linalg.norm(v * dfdx))
    return float(np.linalg.norm(res) / ref) if ref > 0 else float(np.linalg.norm(res))


def check_sign_convention(table, bd):
    """Compare df/dx = +B f against df/dx = -B f, each composed with the assembly.

    For each sign: the self-consistent inflow residuals, the right-inflow
    residual when the assembled data evolves under the kinetic equation
    v df/dx = Theta f, and the residual of that kinetic equation on the
    field the sign produces.  The consistent sign is the one with the
    smaller kinetic residual.
    """
    report = {}
    for sign, label in ((1.0, "+B"), (-1.0, "-B")):
        sol = solve_bvp(table, bd, "general", sign=sign)
        f0 = sol.values[0]
        evolved = rk4_march(table, f0, "l_to_r", 1.0)
        report[label] = {
            "inflow": sol.provenance["residuals"]["inflow"],
            "inflow_under_kinetic_dynamics": inflow_residuals(bd, evolved),
            "kinetic_residual": kinetic_residual(table, sol.values),
            "condition_number": sol.provenance["condition_number"],
        }
    plus, minus = report["+B"]["kinetic_residual"], report["-B"]["kinetic_residual"]
    report["consistent_sign"] = "+B" if plus <= minus else "-B"
    report["signs_identical"] = bool(np.isclose(plus, minus, rtol=1e-12, atol=1e-300))
    return report
