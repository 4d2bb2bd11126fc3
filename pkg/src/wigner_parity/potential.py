"""Potentials V(x), the Wigner kernel Vw(x, v) and its velocity moments.

Conventions: hbar = e = m = 1 and the Fourier pair

    F[f](y) = int f(v) exp(-i v y) dv,   F^{-1}[g](v) = (1/2pi) int g(y) exp(i v y) dy.

The kernel ``Vw(x, v) = i F^{-1}_{y->v}[V(x + y/2) - V(x - y/2)]`` is real
and odd in v.  Because the symbol difference is odd in y it reduces to a
sine transform,

    Vw(x, v) = -(1/pi) int_0^inf D_V(x, y) sin(v y) dy,

which is what the quadrature routes evaluate.  For the Gaussian family
``V = A exp(-(x - c)^2 / a)`` the transform is closed form,

    Vw(x, v) = 2 A sqrt(a / pi) exp(-a v^2) sin(2 (x - c) v).

Odd velocity moments follow from derivatives of V at y = 0:
``Vw_n(x) = i^(n+1) V^(n)(x) / 2^(n-1)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.special import eval_hermite

from .exceptions import CapabilityError, ContractError, DomainError, QuadratureError

FAMILIES = ("zero", "gaussian", "tabulated")

# Higher derivatives of a cubic interpolant are noise.
TABULATED_MAX_DERIV = 3


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """Analytic or tabulated description of V(x).

    ``samples`` is an ``(x, V)`` pair of 1-D arrays for the tabulated family;
    ``amplitude`` multiplies every family so barrier sweeps reuse the shape.
    ``y_max`` truncates the sine transform in the quadrature routes.
    """

    family: str = "zero"
    amplitude: float = 1.0
    width_a: float = 1.0
    center: float = 0.0
    samples: tuple | None = None
    y_max: float | None = None
    _spline: CubicSpline | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ContractError(f"unknown potential family {self.family!r}", field="potential.family")
        if not math.isfinite(self.amplitude):
            raise ContractError("amplitude must be finite", field="potential.amplitude")
        if self.family == "gaussian" and not self.width_a > 0:
            raise ContractError("width_a must be positive for the gaussian family", field="potential.width_a")
        if self.y_max is not None and not self.y_max > 0:
            raise ContractError("y_max must be positive", field="potential.y_max")
        if self.family == "tabulated":
            if self.samples is None:
                raise ContractError("tabulated potential needs samples", field="potential.samples")
            xs, vs = (np.asarray(s, dtype=float) for s in self.samples)
            if xs.ndim != 1 or xs.shape != vs.shape or xs.size < 4:
                raise ContractError("samples must be two 1-D arrays of equal length >= 4",
                                    field="potential.samples")
            if np.any(np.diff(xs) <= 0):
                raise ContractError("sample positions must be strictly increasing", field="potential.samples")
            object.__setattr__(self, "samples", (xs, vs))
            object.__setattr__(self, "_spline", CubicSpline(xs, vs))

    @property
    def is_even(self):
        """True when V(-x) = V(x) holds by construction."""
        if self.family == "zero":
            return True
        if self.family == "gaussian":
            return self.center == 0.0
        xs = np.linspace(*self.table_range, 101)
        xs = xs[np.abs(xs) <= min(-self.table_range[0], self.table_range[1])]
        return bool(np.allclose(eval_potential(self, xs), eval_potential(self, -xs), rtol=0, atol=1e-12))

    @property
    def table_range(self):
        if self.family != "tabulated":
            return (-np.inf, np.inf)
        xs = self.samples[0]
        return (float(xs[0]), float(xs[-1]))

    def default_y_max(self, half_length=0.0):
        """Truncation of the y-integral used when ``y_max`` is not set."""
        if self.y_max is not None:
            return self.y_max
        if self.family == "gaussian":
            return 40.0 * math.sqrt(self.width_a) + 2.0 * abs(self.center)
        if self.family == "tabulated":
            lo, hi = self.table_range
            return 2.0 * min(hi - half_length, -half_length - lo)
        return 1.0

    def to_dict(self):
        d = {"family": self.family, "amplitude": self.amplitude}
        if self.family == "gaussian":
            d.update(width_a=self.width_a, center=self.center)
        if self.y_max is not None:
            d["y_max"] = self.y_max
        if self.family == "tabulated":
            d["n_samples"] = int(self.samples[0].size)
            d["range"] = list(self.table_range)
        return d


def load_potential_csv(path, amplitude=1.0, y_max=None):
    """Read a two-column ``x, V`` CSV ('#' comments) into a tabulated spec."""
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ContractError(f"{path}: expected two columns (x, V)", field="potential.samples")
    return PotentialSpec("tabulated", amplitude=amplitude, samples=(data[:, 0], data[:, 1]), y_max=y_max)


def eval_potential(spec, x, deriv_order=0):
    """V^(deriv_order)(x); vectorized over ``x``."""
    if deriv_order < 0:
        raise ContractError("deriv_order must be non-negative")
    x = np.asarray(x, dtype=float)
    if spec.family == "zero":
        return np.zeros_like(x)[()]
    if spec.family == "gaussian":
        s = math.sqrt(spec.width_a)
        u = (x - spec.center) / s
        n = deriv_order
        return (spec.amplitude * (-1.0 / s) ** n * eval_hermite(n, u) * np.exp(-u * u))[()]
    if deriv_order > TABULATED_MAX_DERIV:
        raise CapabilityError(
            f"tabulated potentials support derivatives up to order {TABULATED_MAX_DERIV}",
            requested=deriv_order)
    lo, hi = spec.table_range
    if np.any(x < lo) or np.any(x > hi):
        raise DomainError(f"x outside tabulated range [{lo}, {hi}]", range=[lo, hi])
    return (spec.amplitude * spec._spline(x, deriv_order))[()]


def eval_DV(spec, x, y):
    """Symbol difference V(x + y/2) - V(x - y/2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return eval_potential(spec, x + y / 2) - eval_potential(spec, x - y / 2)


def _gaussian_kernel(spec, x, v):
    a = spec.width_a
    return 2.0 * spec.amplitude * np.sqrt(a / np.pi) * np.exp(-a * v * v) * np.sin(2.0 * (x - spec.center) * v)


def _gaussian_kernel_dv(spec, x, v):
    a = spec.width_a
    xc = x - spec.center
    env = 2.0 * spec.amplitude * np.sqrt(a / np.pi) * np.exp(-a * v * v)
    return env * (2.0 * xc * np.cos(2.0 * xc * v) - 2.0 * a * v * np.sin(2.0 * xc * v))


def kernel_quadrature(spec, x, v, y_max=None, tol=1e-10):
    """Vw(x, v) by adaptive oscillatory quadrature of the sine transform.

    Independent of the closed forms; used for tabulated potentials and as
    the oracle for the Gaussian formula.
    """
    if v == 0.0 or spec.family == "zero":
        return 0.0
    y_max = spec.default_y_max(abs(x)) if y_max is None else y_max
    with warnings.catch_warnings():
        # convergence is judged below from the returned error estimate
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(lambda y: float(eval_DV(spec, x, y)), 0.0, y_max,
                                  weight="sin", wvar=v, limit=400, epsabs=tol * 1e-2, epsrel=1e-13)
    if not err <= tol:
        raise QuadratureError("kernel quadrature did not converge", x=x, v=v, error_estimate=err)
    return -val / np.pi


def eval_kernel(spec, x, v):
    """Real-valued Wigner kernel Vw(x, v)."""
    if spec.family == "zero":
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(v)).shape)[()]
    if spec.family == "gaussian":
        return _gaussian_kernel(spec, np.asarray(x, float), np.asarray(v, float))[()]
    xb, vb = np.broadcast_arrays(np.asarray(x, float), np.asarray(v, float))
    out = np.array([kernel_quadrature(spec, xi, vi) for xi, vi in zip(xb.ravel(), vb.ravel())])
    return out.reshape(xb.shape)[()]


def _moment_orders(max_order):
    if max_order < 1 or max_order % 2 == 0:
        raise ContractError("max_order must be an odd integer >= 1", max_order=max_order)
    return np.arange(1, max_order + 1, 2)


def kernel_moments(spec, x, max_order):
    """[Vw_1(x), Vw_3(x), ..., Vw_max_order(x)] from derivatives of V.

    ``x`` may be an array; the moment index is the last axis.
    """
    orders = _moment_orders(max_order)
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (orders.size,))
    for i, n in enumerate(orders):
        # i^(n+1) is real for odd n
        sign = -1.0 if ((n + 1) // 2) % 2 else 1.0
        out[..., i] = sign * eval_potential(spec, x, int(n)) / 2.0 ** (n - 1)
    return out


def kernel_moment_quadrature(spec, x, n):
    """Vw_n(x) = int v^n Vw(x, v) dv by direct quadrature (oracle route)."""
    if spec.family == "zero":
        return 0.0
    val, _ = integrate.quad(lambda v: v ** n * float(eval_kernel(spec, x, v)), -np.inf, np.inf,
                            limit=400, epsabs=1e-13, epsrel=1e-12)
    return val


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Kernel samples on a velocity grid and the half-step space grid.

    ``x`` holds the 2M+1 half-step nodes of ``sgrid`` (index ``2*i`` is
    space node ``i``).  ``offsets[i, m + 2K - 1]`` is ``Vw(x_i, m dv)`` for
    ``|m| <= 2K - 1``, which covers every difference ``v_j - v_k``.
    ``nodes`` and ``dnodes`` hold Vw and its velocity derivative at the grid
    nodes themselves; ``moments[i]`` lists Vw_1, Vw_3, ... at ``x_i``.
    """

    spec: PotentialSpec
    vgrid: object
    sgrid: object
    x: np.ndarray
    offsets: np.ndarray
    nodes: np.ndarray
    dnodes: np.ndarray
    moments: np.ndarray
    h1_norm: np.ndarray
    derivative_method: str

    @property
    def moment_orders(self):
        return np.arange(1, 2 * self.moments.shape[1], 2)

    def index_of(self, x):
        i = int(np.argmin(np.abs(self.x - x)))
        if not np.isclose(self.x[i], x, rtol=0, atol=1e-12 * max(1.0, abs(x))):
            raise ContractError(f"x = {x} is not a node of the kernel table")
        return i

    def theta_matrix(self, x_index):
        """Dense Toeplitz matrix of the discrete convolution dv * Vw(x, v_j - v_k)."""
        n2 = self.vgrid.size
        j = np.arange(n2)
        return self.vgrid.dv * self.offsets[x_index][j[:, None] - j[None, :] + n2 - 1]

    def b_matrix(self, x_index):
        return self.theta_matrix(x_index) / self.vgrid.nodes[:, None]

    def parity_blocks(self, x_index, divide_by_v=False):
        """K x K blocks (S_e, S_o) of Theta (or B) on positive-node halves.

        Theta maps the even part e to the odd extension of S_e e and the odd
        part o to the even extension of S_o o.
        """
        K = self.vgrid.K
        T = self.theta_matrix(x_index)
        TP, TN = T[K:, K:], T[K:, :K][:, ::-1]
        Se, So = TP + TN, TP - TN
        if divide_by_v:
            v = self.vgrid.positive[:, None]
            Se, So = Se / v, So / v
        return Se, So


def parity_matvec(blocks, Y, odd_output_sign=-1.0):
    """Apply parity blocks to ``Y`` (velocity axis first), mirroring exactly.

    ``odd_output_sign`` is -1 for Theta (even input -> odd output) and +1
    for B, whose 1/v factor turns the parity flip back.
    """
    Se, So = blocks
    K = Se.shape[0]
    P, N = Y[K:], Y[:K][::-1]
    a = Se @ (0.5 * (P + N))
    b = So @ (0.5 * (P - N))
    if odd_output_sign < 0:
        return np.concatenate([(b - a)[::-1], a + b])
    return np.concatenate([(a - b)[::-1], a + b])


def _simpson_weights(n, h):
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def _tabulated_sine_transform(spec, xs, vs, y_max, tol, derivative=False):
    """-(1/pi) int_0^y_max D_V(x, y) sin(v y) dy on a uniform y grid (Simpson).

    With ``derivative`` the integrand becomes ``y D_V cos(v y)``, giving
    d/dv Vw.  The error estimate is the change against the half-resolution
    rule; it must stay below ``tol``.
    """
    vmax = max(float(np.max(np.abs(vs))), 1e-12)
    spacing = float(np.min(np.diff(spec.samples[0])))
    h = min(np.pi / (16.0 * vmax), spacing / 4.0)
    n = int(np.ceil(y_max / h))
    n += n % 2  # even number of panels, and n/2 even for the coarse rule
    n += 2 * ((n // 2) % 2)
    y = np.linspace(0.0, y_max, n + 1)
    h = y[1] - y[0]
    D = eval_DV(spec, xs[:, None], y[None, :])
    if derivative:
        D = D * y[None, :]
        basis = np.cos(np.outer(y, vs))
        scale = -1.0 / np.pi
    else:
        basis = np.sin(np.outer(y, vs))
        scale = -1.0 / np.pi
    fine = scale * (D * _simpson_weights(n + 1, h)) @ basis
    coarse = scale * (D[:, ::2] * _simpson_weights(n // 2 + 1, 2 * h)) @ basis[::2]
    err = float(np.max(np.abs(fine - coarse))) if fine.size else 0.0
    if err > tol:
        raise QuadratureError("tabulated kernel quadrature above tolerance", error_estimate=err, tol=tol)
    return fine


def build_kernel_table(spec, vgrid, sgrid, max_moment_order=15, quad_tol=1e-8):
    """Sample the kernel on ``vgrid`` x half-step nodes of ``sgrid``.

    For tabulated potentials the moment order is capped at the interpolant's
    smoothness and the kernel comes from quadrature; the spline table must
    cover ``[-l/2 - y_max/2, l/2 + y_max/2]``.
    """
    x = sgrid.half_step_nodes
    n2 = vgrid.size
    m = np.arange(-(n2 - 1), n2)
    offs_v = m * vgrid.dv
    v = vgrid.nodes
    if spec.family == "tabulated":
        max_moment_order = min(max_moment_order, TABULATED_MAX_DERIV)
        half = sgrid.length / 2
        y_max = spec.default_y_max(half)
        lo, hi = spec.table_range
        if y_max <= 0 or -half - y_max / 2 < lo - 1e-12 or half + y_max / 2 > hi + 1e-12:
            raise DomainError(
                "tabulated samples must cover [-l/2 - y_max/2, l/2 + y_max/2]",
                needed=[-half - y_max / 2, half + y_max / 2], range=[lo, hi])
        pos = offs_v[n2:]
        half_table = _tabulated_sine_transform(spec, x, pos, y_max, quad_tol)
        offsets = np.concatenate([-half_table[:, ::-1], np.zeros((x.size, 1)), half_table], axis=1)
        vpos = v[n2 // 2:]
        knode = _tabulated_sine_transform(spec, x, vpos, y_max, quad_tol)
        dnode = _tabulated_sine_transform(spec, x, vpos, y_max, quad_tol, derivative=True)
        nodes = np.concatenate([-knode[:, ::-1], knode], axis=1)
        dnodes = np.concatenate([dnode[:, ::-1], dnode], axis=1)
        method = "sine-transform quadrature"
    elif spec.family == "gaussian":
        offsets = _gaussian_kernel(spec, x[:, None], offs_v[None, :])
        offsets[:, n2 - 1] = 0.0
        nodes = _gaussian_kernel(spec, x[:, None], v[None, :])
        dnodes = _gaussian_kernel_dv(spec, x[:, None], v[None, :])
        method = "analytic"
    else:
        offsets = np.zeros((x.size, m.size))
        nodes = np.zeros((x.size, n2))
        dnodes = np.zeros((x.size, n2))
        method = "analytic"
    max_moment_order = max_moment_order if max_moment_order % 2 else max_moment_order - 1
    moments = kernel_moments(spec, x, max_moment_order)
    h1 = np.sqrt(vgrid.dv * np.sum(nodes ** 2 + dnodes ** 2, axis=1))
    for arr in (x, offsets, nodes, dnodes, moments, h1):
        arr.setflags(write=False)
    return KernelTable(spec, vgrid, sgrid, x, offsets, nodes, dnodes, moments, h1, method)


def kernel_h1_norm(table, x_index):
    """Discrete H^1 norm of Vw(x, .) over the velocity grid (midpoint rule)."""
    return float(table.h1_norm[x_index])
