"""Initial-state preparations and the correlation functions nu1, nu2, v0, v1, v2.

The two correlated preparations entangle the cavity with the first waveguide
resonator b1 only. Their correlation functions then reduce to the waveguide
convolution F(t) through the Bloch-mode amplitudes sqrt(2/pi) sin k of b1.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .propagator import trapezoid_convolution
from .reservoir import Occupation, _occupation_values

SQRT_2PI = np.sqrt(2 * np.pi)


@dataclass(frozen=True)
class UncorrelatedThermal:
    """Product state: Gaussian cavity state times a thermal reservoir."""

    occupation: Occupation = 0.0
    mean0: complex = 0.0
    n0: float = 0.0
    s0: complex = 0.0

    def __post_init__(self):
        if not callable(self.occupation) and self.occupation < 0:
            raise ValueError("occupation must be non-negative")
        _check_cavity(self.mean0, self.n0, self.s0)

    def cavity_moments(self):
        return complex(self.mean0), float(self.n0), complex(self.s0)

    @property
    def vacuum_reservoir(self):
        return not callable(self.occupation) and float(self.occupation) == 0.0


@dataclass(frozen=True)
class SqueezedVacuumCorrelated:
    """Two-mode squeezed vacuum of the cavity and b1, rest of the waveguide empty."""

    r_s: float
    theta_s: float = 0.0

    def __post_init__(self):
        if self.r_s < 0:
            raise ValueError("squeezing magnitude r_s must be non-negative")

    def cavity_moments(self):
        return 0j, float(np.sinh(self.r_s) ** 2), 0j


@dataclass(frozen=True)
class BeamSplitterThermal:
    """Thermal cavity and b1 states mixed by exp[(vartheta/2)(a b1^+ - a^+ b1)]."""

    vartheta: float
    nbar_a: float
    nbar_b1: float = 0.0

    def __post_init__(self):
        if self.nbar_a < 0 or self.nbar_b1 < 0:
            raise ValueError("thermal occupations must be non-negative")

    @property
    def n_cavity(self):
        return 0.5 * (self.nbar_a + self.nbar_b1 + (self.nbar_a - self.nbar_b1) * np.cos(self.vartheta))

    @property
    def n_b1(self):
        return 0.5 * (self.nbar_a + self.nbar_b1 - (self.nbar_a - self.nbar_b1) * np.cos(self.vartheta))

    @property
    def cross(self):
        """<a(0) b1^+(0)> = <a^+(0) b1(0)>, real in this convention."""
        return 0.5 * np.sin(self.vartheta) * (self.nbar_a - self.nbar_b1)

    def cavity_moments(self):
        return 0j, float(self.n_cavity), 0j


def _check_cavity(mean, n0, s0):
    if n0 < 0:
        raise ValueError("cavity occupation must be non-negative")
    if abs(mean) ** 2 > n0 + 1e-12:
        raise ValueError("|<a(0)>|^2 cannot exceed n(0)")
    if n0 + 0.5 < abs(s0):
        raise ValueError("unphysical cavity moments: n(0) + 1/2 < |s(0)|")


def uncorrelated_counterpart(spec):
    """Same reduced cavity state, no correlations, reservoir in its vacuum."""
    mean, n0, s0 = spec.cavity_moments()
    return UncorrelatedThermal(0.0, mean, n0, s0)


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CorrelationFunctions:
    grid: object
    nu1: np.ndarray = field(repr=False)
    nu2: np.ndarray = field(repr=False)
    v0: np.ndarray = field(repr=False)
    v1: np.ndarray = field(repr=False)
    v2: np.ndarray = field(repr=False)
    nu1_dot: Optional[np.ndarray] = field(default=None, repr=False)
    nu2_dot: Optional[np.ndarray] = field(default=None, repr=False)
    v1_dot: Optional[np.ndarray] = field(default=None, repr=False)
    v2_dot: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("nu1", "nu2", "v0", "v2", "nu1_dot", "nu2_dot", "v2_dot"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _frozen(value))
        for name in ("v1", "v1_dot"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _frozen(np.real(value), float))

    @property
    def has_derivatives(self):
        return all(getattr(self, n) is not None for n in ("nu1_dot", "nu2_dot", "v1_dot", "v2_dot"))


def _zeros(n):
    return np.zeros(n, complex)


def thermal_v1(sol, gtilde):
    """v1(t) = int int u*(x) g~(x - y) u(y) dx dy over [0, t]^2 and its derivative.

    The double trapezoid is updated incrementally: going from node n to n+1
    only the weights of nodes n and n+1 change, so each step costs one O(n)
    dot product. g~ at negative argument is the conjugate of g~ at |.|.
    """
    u = sol.u
    g = gtilde.values
    h = sol.grid.dt
    n = len(u)
    v1 = np.zeros(n)
    # weighted samples A_j; v1 = A^+ G A with G_ij = g~(t_i - t_j)
    A = np.zeros(n, complex)
    total = 0.0
    for m in range(1, n):
        d0, d1 = 0.5 * h * u[m - 1], 0.5 * h * u[m]
        # rows m-1 and m of G restricted to columns 0..m-1 (A_old lives there)
        row_lo = g[m - 1::-1]
        row_hi = g[m:0:-1]
        cross = np.conj(d0) * np.dot(row_lo, A[:m]) + np.conj(d1) * np.dot(row_hi, A[:m])
        self_term = (abs(d0) ** 2 + abs(d1) ** 2) * g[0].real + 2 * (np.conj(d1) * g[1] * d0).real
        total += 2 * cross.real + self_term
        A[m - 1] += d0
        A[m] = d1
        v1[m] = total
    v1_dot = 2 * np.real(np.conj(u) * trapezoid_convolution(g, u, h))
    return v1, v1_dot


def correlation_functions(spec, sol, F=None, gtilde=None):
    """Correlation functions for one of the built-in preparations.

    ``F`` is the waveguide convolution (needed by the correlated variants),
    ``gtilde`` the occupation-weighted kernel (needed by a thermal reservoir).
    """
    grid = sol.grid
    n = len(grid)
    if F is not None:
        grid.check_same(F.grid)
    if gtilde is not None:
        grid.check_same(gtilde.grid)
    zero = _zeros(n)

    if isinstance(spec, UncorrelatedThermal):
        if spec.vacuum_reservoir:
            v1 = np.zeros(n)
            v1_dot = np.zeros(n)
        else:
            if gtilde is None:
                raise ValueError("a thermal reservoir needs the occupation-weighted kernel")
            v1, v1_dot = thermal_v1(sol, gtilde)
        return CorrelationFunctions(grid, zero, zero, zero, v1, zero, zero, zero, v1_dot, zero)

    if F is None:
        raise ValueError(f"{type(spec).__name__} needs the waveguide convolution F")
    abs_F2 = np.abs(F.F) ** 2
    abs_F2_dot = 2 * np.real(np.conj(F.F) * F.F_dot)

    if isinstance(spec, SqueezedVacuumCorrelated):
        c2 = -1j * np.sinh(2 * spec.r_s) * np.exp(1j * spec.theta_s) / SQRT_2PI
        occ = np.sinh(spec.r_s) ** 2
        return CorrelationFunctions(
            grid, zero, c2 * F.F, zero, (2 / np.pi) * occ * abs_F2, zero,
            zero, c2 * F.F_dot, (2 / np.pi) * occ * abs_F2_dot, zero,
        )

    if isinstance(spec, BeamSplitterThermal):
        c1 = -1j * (spec.nbar_a - spec.nbar_b1) * np.sin(spec.vartheta) / SQRT_2PI
        occ = spec.n_b1
        return CorrelationFunctions(
            grid, c1 * F.F, zero, zero, (2 / np.pi) * occ * abs_F2, zero,
            c1 * F.F_dot, zero, (2 / np.pi) * occ * abs_F2_dot, zero,
        )

    raise TypeError(f"unsupported initial state {type(spec).__name__}")


def mode_amplitudes(sol, omegas):
    """phi_k(t) = int_0^t exp(-i w_k s) u(t - s) ds for each discrete mode, shape (modes, nodes).

    Uses phi_k(t) = exp(-i w_k t) int_0^t exp(i w_k s) u(s) ds with a cumulative
    trapezoid; the derivative is exact: d phi_k/dt = u(t) - i w_k phi_k.
    """
    t = sol.grid.times
    h = sol.grid.dt
    omegas = np.asarray(omegas, float)
    integrand = np.exp(1j * np.outer(omegas, t)) * sol.u
    cum = np.zeros_like(integrand)
    cum[:, 1:] = np.cumsum(0.5 * h * (integrand[:, 1:] + integrand[:, :-1]), axis=1)
    phi = np.exp(-1j * np.outer(omegas, t)) * cum
    phi_dot = sol.u - 1j * omegas[:, None] * phi
    return phi, phi_dot


def discrete_mode_correlations(sol, modes, adag_b=None, a_b=None, b_mean=None, bdag_b=None, b_b=None):
    """General correlation functions for a discrete-mode reservoir.

    Arguments are the initial moments <a^+ b_k>, <a b_k>, <b_k>, the matrix
    <b_k^+ b_k'> and the matrix <b_k b_k'>; any may be omitted (zero). With
    f(t) = -i sum_k V_k b_k(0) phi_k(t) all five functions are bilinear in phi.
    """
    n = len(sol.grid)
    V = modes.couplings
    phi, phi_dot = mode_amplitudes(sol, modes.omegas)
    Vphi = V[:, None] * phi
    Vphi_dot = V[:, None] * phi_dot

    def linear(weights):
        if weights is None:
            return _zeros(n), _zeros(n)
        w = np.asarray(weights, complex)
        return -1j * (w @ Vphi), -1j * (w @ Vphi_dot)

    nu1, nu1_dot = linear(adag_b)
    nu2, nu2_dot = linear(a_b)
    v0, _ = linear(b_mean)
    if bdag_b is None:
        v1 = v1_dot = np.zeros(n)
    else:
        B = np.asarray(bdag_b, complex)
        BV = B @ Vphi
        v1 = np.real(np.sum(np.conj(Vphi) * BV, axis=0))
        v1_dot = 2 * np.real(np.sum(np.conj(Vphi_dot) * BV, axis=0))
    if b_b is None:
        v2 = v2_dot = _zeros(n)
    else:
        C = np.asarray(b_b, complex)
        CV = C @ Vphi
        v2 = -np.sum(Vphi * CV, axis=0)
        v2_dot = -2 * np.sum(Vphi_dot * CV, axis=0)
    return CorrelationFunctions(sol.grid, nu1, nu2, v0, v1, v2, nu1_dot, nu2_dot, v1_dot, v2_dot)


def initial_chain_moments(spec, chain_size, model=None):
    """Second moments over (cavity, b_1, ..., b_N) in the site basis.

    Returns (mean, M, S) with M_ij = <c_i^+ c_j>, S_ij = <c_i c_j>. A thermal
    reservoir with frequency-dependent occupation is diagonal in the chain's
    eigenmodes, so ``model`` is needed unless the occupation is constant.
    """
    if chain_size < 1:
        raise ValueError("chain needs at least one resonator")
    dim = chain_size + 1
    mean = np.zeros(dim, complex)
    M = np.zeros((dim, dim), complex)
    S = np.zeros((dim, dim), complex)
    if isinstance(spec, SqueezedVacuumCorrelated):
        M[0, 0] = M[1, 1] = np.sinh(spec.r_s) ** 2
        S[0, 1] = S[1, 0] = 0.5 * np.sinh(2 * spec.r_s) * np.exp(1j * spec.theta_s)
    elif isinstance(spec, BeamSplitterThermal):
        M[0, 0] = spec.n_cavity
        M[1, 1] = spec.n_b1
        M[0, 1] = M[1, 0] = spec.cross
    elif isinstance(spec, UncorrelatedThermal):
        mean[0], M[0, 0], S[0, 0] = spec.cavity_moments()
        if not spec.vacuum_reservoir:
            if callable(spec.occupation):
                if model is None:
                    raise ValueError("frequency-dependent occupation needs the waveguide model")
                j = np.arange(1, chain_size + 1)
                k = np.pi * j / (chain_size + 1)
                modes = np.sqrt(2 / (chain_size + 1)) * np.sin(np.outer(j, k))
                nbar = _occupation_values(spec.occupation, model.omega0 - 2 * model.lambda0 * np.cos(k))
                M[1:, 1:] = (modes * nbar) @ modes.T
            else:
                M[1:, 1:] = np.eye(chain_size) * float(spec.occupation)
    else:
        raise TypeError(f"unsupported initial state {type(spec).__name__}")
    from .oracle import GaussianMoments

    return GaussianMoments(mean, M, S)
