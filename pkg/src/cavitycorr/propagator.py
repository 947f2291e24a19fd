"""Propagating function u(t) and the waveguide convolution F(t).

u solves du/dt = -i w_c u - int_0^t g(t - s) u(s) ds with u(0) = 1. The
stepper works on v = exp(i w_c t) u, which removes the fast free rotation
(w_c dt is not small on the default grid) without changing the trapezoidal
convolution sums: g(t-s) u(s) and g_rot(t-s) v(s) differ only by the common
phase exp(-i w_c t).
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import StepRejectedError

ZERO_THRESHOLD = 1e-8
STEP_BOUND = 1 + 1e-3


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PropagatorSolution:
    grid: object
    omega_c: float
    u: np.ndarray = field(repr=False)
    u_dot: np.ndarray = field(repr=False)
    zero_flags: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "u", _frozen(self.u))
        object.__setattr__(self, "u_dot", _frozen(self.u_dot))
        object.__setattr__(self, "zero_flags", _frozen(np.abs(self.u) < ZERO_THRESHOLD, bool))


@dataclass(frozen=True)
class ConvolutionSeries:
    grid: object
    F: np.ndarray = field(repr=False)
    F_dot: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "F", _frozen(self.F))
        object.__setattr__(self, "F_dot", _frozen(self.F_dot))


def solve_u(kernel, omega_c, grid):
    """Trapezoidal product integration with one predictor-corrector pass per step.

    ``u_dot`` is the right-hand side evaluated at the accepted value, using the
    same trapezoidal convolution as the stepper.
    """
    grid.check_same(kernel.grid)
    if not np.isfinite(omega_c):
        raise ValueError("omega_c must be finite")
    h = grid.dt
    t = grid.times
    k = kernel.values * np.exp(1j * omega_c * t)
    n = len(grid)
    v = np.zeros(n, complex)
    vdot = np.zeros(n, complex)
    v[0] = 1.0
    half_k0 = 0.5 * h * k[0]
    for j in range(1, n):
        # trapezoidal history: endpoint s = 0 with weight 1/2, interior nodes with weight 1
        hist = h * (0.5 * k[j] * v[0] + np.dot(k[j - 1:0:-1], v[1:j]))
        predictor = v[j - 1] + h * vdot[j - 1]
        f_pred = -(hist + half_k0 * predictor)
        v[j] = v[j - 1] + 0.5 * h * (vdot[j - 1] + f_pred)
        vdot[j] = -(hist + half_k0 * v[j])
        if abs(v[j]) > STEP_BOUND:
            raise StepRejectedError(j, abs(v[j]), STEP_BOUND)
    phase = np.exp(-1j * omega_c * t)
    u = phase * v
    u[0] = 1.0
    u_dot = phase * vdot - 1j * omega_c * u
    return PropagatorSolution(grid, omega_c, u, u_dot)


def trapezoid_convolution(a, b, dt):
    """c_j = int_0^{t_j} a(s) b(t_j - s) ds by the trapezoidal rule, for every node j."""
    full = np.convolve(a, b)[: len(a)]
    out = dt * (full - 0.5 * a[0] * b - 0.5 * a * b[0])
    out[0] = 0.0
    return out


def rhs_residual(kernel, sol):
    """Independent recomputation of -i w_c u - int g(t-s) u(s) ds on the grid."""
    conv = trapezoid_convolution(kernel.values, sol.u, sol.grid.dt)
    return -1j * sol.omega_c * sol.u - conv


def compute_F(h, sol):
    """F(t) = int_0^t h(s) u(t - s) ds and its derivative h(t) u(0) + int h(s) u_dot(t - s) ds."""
    sol.grid.check_same(h.grid)
    dt = sol.grid.dt
    F = trapezoid_convolution(h.values, sol.u, dt)
    F_dot = h.values * sol.u[0] + trapezoid_convolution(h.values, sol.u_dot, dt)
    return ConvolutionSeries(sol.grid, F, F_dot)


def logarithmic_derivative(sol, j):
    """u_dot/u at node j; NaN when u has a zero there."""
    if sol.zero_flags[j]:
        return complex(np.nan, np.nan)
    return complex(sol.u_dot[j] / sol.u[j])


def log_derivative_series(sol):
    out = np.full(len(sol.u), np.nan + 1j * np.nan)
    ok = ~sol.zero_flags
    out[ok] = sol.u_dot[ok] / sol.u[ok]
    return out
