"""Cavity moments from the closed-form solution and their squeezed-thermal characterization."""
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

PHYSICAL_TOL = 1e-9
CLAMP_MARGIN = 1e-12


class UnphysicalMomentsWarning(RuntimeWarning):
    pass


class Squeezing(NamedTuple):
    r: float
    theta: float
    nbar: float
    physical: bool


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ObservableTrajectory:
    grid: object
    mean: np.ndarray = field(repr=False)
    n: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    nbar: np.ndarray = field(repr=False)
    physical_flags: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name, dtype in (("mean", complex), ("n", float), ("s", complex), ("r", float),
                            ("theta", float), ("nbar", float), ("physical_flags", bool)):
            object.__setattr__(self, name, _frozen(getattr(self, name), dtype))

    @classmethod
    def from_moments(cls, grid, mean, n, s, warn=True):
        r, theta, nbar, physical = squeezing_series(n, s, warn=warn)
        return cls(grid, mean, n, s, r, theta, nbar, physical)


def is_physical(n, s):
    """Uncertainty relation (n + 1/2)^2 - |s|^2 >= 1/4, i.e. symplectic eigenvalue >= 1/2."""
    return (np.asarray(n) + 0.5) ** 2 - np.abs(s) ** 2 >= 0.25 - PHYSICAL_TOL


def squeezing_series(n, s, warn=True):
    """Vectorized squeezing_decomposition; returns arrays (r, theta, nbar, physical)."""
    n = np.asarray(n, float)
    s = np.asarray(s, complex)
    abs_s = np.abs(s)
    physical = is_physical(n, s)
    over = n + 0.5 < abs_s
    if np.any(over):
        if warn:
            warnings.warn(
                f"{int(over.sum())} node(s) with n + 1/2 < |s|; |s| clamped to n + 1/2",
                UnphysicalMomentsWarning, stacklevel=3,
            )
        abs_s = np.where(over, n + 0.5 - CLAMP_MARGIN, abs_s)
    r = 0.25 * np.log((n + abs_s + 0.5) / (n - abs_s + 0.5))
    theta = np.where(abs_s > 0, np.angle(s), 0.0)
    nbar = np.sqrt(np.clip((n + 0.5) ** 2 - abs_s**2, 0.0, None)) - 0.5
    return r, theta, nbar, physical


def squeezing_decomposition(n, s):
    """Squeezing magnitude r, phase theta and thermal occupation nbar of a zero-mean Gaussian state.

    The state is S(xi) rho_th S(xi)^+ with xi = r exp(i theta); n and s are
    <a^+ a> and <a a>. If n + 1/2 < |s| the input cannot come from any state:
    |s| is clamped just below n + 1/2, a warning is issued, and ``physical`` is False.
    """
    if n < 0:
        raise ValueError("occupation n must be non-negative")
    r, theta, nbar, physical = squeezing_series(np.array([n]), np.array([s]), warn=True)
    return Squeezing(float(r[0]), float(theta[0]), float(nbar[0]), bool(physical[0]))


def squeezed_thermal_moments(r, theta, nbar):
    """Inverse of squeezing_decomposition: (n, s) of S(r e^{i theta}) rho_th(nbar) S^+."""
    n = (nbar + 0.5) * np.cosh(2 * r) - 0.5
    s = (nbar + 0.5) * np.sinh(2 * r) * np.exp(1j * theta)
    return n, s


def covariance_matrix(n, s):
    """Symmetrized covariance of X = (a + a^+)/sqrt 2 and Y = (a - a^+)/(i sqrt 2) for zero mean."""
    if n < 0:
        raise ValueError("occupation n must be non-negative")
    s = complex(s)
    return np.array([[0.5 + n + s.real, s.imag], [s.imag, 0.5 + n - s.real]])


def evolve_observables(sol, corr, spec):
    """Closed-form <a>, n and s from u and the correlation functions."""
    sol.grid.check_same(corr.grid)
    mean0, n0, s0 = spec.cavity_moments()
    u = sol.u
    mean = u * mean0 + corr.v0
    n = np.abs(u) ** 2 * n0 + 2 * np.real(np.conj(u) * corr.nu1) + corr.v1
    s = u**2 * s0 + 2 * u * corr.nu2 + corr.v2
    return ObservableTrajectory.from_moments(sol.grid, mean, n, s)
