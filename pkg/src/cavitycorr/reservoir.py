"""Reservoir models, time grids and memory kernels.

Frequencies are measured in units of the waveguide resonator frequency, so a
coupled-resonator waveguide with ``omega0 = 1`` sets the scale and times are in
units of ``1/omega0``.
"""
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.special import j1

from . import quadrature
from .errors import GridMismatchError

Occupation = Union[float, Callable[[np.ndarray], np.ndarray]]

QUAD_RTOL = 1e-10


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_j = j*dt for j = 0..n_steps."""

    dt: float
    n_steps: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 2:
            raise ValueError(f"need at least 2 steps, got {self.n_steps}")

    @classmethod
    def from_tmax(cls, dt, t_max):
        return cls(dt, int(round(t_max / dt)))

    @property
    def times(self):
        return self.dt * np.arange(self.n_steps + 1)

    @property
    def t_max(self):
        return self.dt * self.n_steps

    def __len__(self):
        return self.n_steps + 1

    def check_same(self, *others):
        for other in others:
            if other != self:
                raise GridMismatchError(f"grid mismatch: {self} vs {other}")


@dataclass(frozen=True)
class Crow:
    """Semi-infinite coupled-resonator waveguide with end coupling ``lam``."""

    omega0: float = 1.0
    lambda0: float = 0.025
    lam: float = 0.05

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise ValueError("hopping lambda0 must be positive")
        if self.lam < 0:
            raise ValueError("coupling lam must be non-negative")

    @classmethod
    def from_eta(cls, eta, lambda0=0.025, omega0=1.0):
        return cls(omega0=omega0, lambda0=lambda0, lam=eta * lambda0)

    @property
    def eta(self):
        return self.lam / self.lambda0

    @property
    def band(self):
        return (self.omega0 - 2 * self.lambda0, self.omega0 + 2 * self.lambda0)

    def discretize(self, n_modes):
        """Bloch modes of an ``n_modes``-site open chain, k_j = j*pi/(n_modes+1).

        The couplings carry the sqrt(dk) weight so that sums over modes
        approach the continuum integrals over k in [0, pi].
        """
        k = np.pi * np.arange(1, n_modes + 1) / (n_modes + 1)
        dk = np.pi / (n_modes + 1)
        omegas = self.omega0 - 2 * self.lambda0 * np.cos(k)
        couplings = np.sqrt(2 / np.pi) * self.lam * np.sin(k) * np.sqrt(dk)
        return DiscreteModes(omegas, couplings.astype(complex))


@dataclass(frozen=True)
class DiscreteModes:
    omegas: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        omegas = np.atleast_1d(np.asarray(self.omegas, float))
        couplings = np.atleast_1d(np.asarray(self.couplings, complex))
        if omegas.size == 0 or omegas.shape != couplings.shape:
            raise ValueError("need a non-empty list of (omega_k, V_k) pairs")
        if not (np.all(np.isfinite(omegas)) and np.all(np.isfinite(couplings))):
            raise ValueError("mode frequencies and couplings must be finite")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "couplings", couplings)


@dataclass(frozen=True)
class Tabulated:
    """Spectral density sampled on ``omega`` and linearly interpolated.

    J vanishes outside ``[omega[0], omega[-1]]``.
    """

    omega: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, float)
        J = np.asarray(self.J, float)
        if omega.ndim != 1 or omega.shape != J.shape or omega.size < 2:
            raise ValueError("omega and J must be matching 1-d arrays with >= 2 samples")
        if np.any(np.diff(omega) <= 0):
            raise ValueError("omega samples must be strictly increasing")
        if np.any(J < 0):
            raise ValueError("spectral density must be non-negative")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "J", J)

    @property
    def band(self):
        return (self.omega[0], self.omega[-1])

    def __call__(self, omega):
        return np.interp(omega, self.omega, self.J, left=0.0, right=0.0)


ReservoirModel = Union[Crow, DiscreteModes, Tabulated]


@dataclass(frozen=True)
class KernelSeries:
    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, complex)
        if values.shape != (len(self.grid),):
            raise ValueError(f"kernel has {values.shape} samples, grid has {len(self.grid)}")
        if not np.all(np.isfinite(values)):
            raise ValueError("kernel samples must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def crow_spectral_density(model, omega):
    """J(w) = (lam/lambda0)^2 sqrt(4 lambda0^2 - (w - omega0)^2) inside the band, else 0."""
    x = 4 * model.lambda0**2 - (np.asarray(omega, float) - model.omega0) ** 2
    return model.eta**2 * np.sqrt(np.clip(x, 0.0, None))


def _bessel_ratio(x):
    """J1(x)/x with the x -> 0 limit 1/2 taken exactly."""
    x = np.asarray(x, float)
    out = np.full(x.shape, 0.5)
    nz = x != 0
    out[nz] = j1(x[nz]) / x[nz]
    return out


def _occupation_values(occupation, omega):
    if callable(occupation):
        nbar = np.asarray(occupation(omega), float)
    else:
        nbar = np.full(np.shape(omega), float(occupation))
    if np.any(nbar < 0):
        raise ValueError("occupation must be non-negative on the band")
    return nbar


def _band_kernel(weight, band, taus, breakpoints=()):
    """int dw/2pi weight(w) exp(-i w tau), vectorized over taus."""
    taus = np.asarray(taus, float)

    def integrand(w):
        return weight(w)[:, None] * np.exp(-1j * np.outer(w, taus)) / (2 * np.pi)

    return quadrature.integrate(integrand, band[0], band[1], breakpoints=breakpoints, rtol=QUAD_RTOL)


def memory_kernel(model, grid):
    """g(tau) = int dw/2pi J(w) exp(-i w tau) sampled on the grid."""
    tau = grid.times
    if isinstance(model, Crow):
        values = model.lam**2 * np.exp(-1j * model.omega0 * tau) * 2 * _bessel_ratio(2 * model.lambda0 * tau)
    elif isinstance(model, DiscreteModes):
        values = np.exp(-1j * np.outer(tau, model.omegas)) @ np.abs(model.couplings) ** 2
    elif isinstance(model, Tabulated):
        values = _band_kernel(model, model.band, tau, breakpoints=model.omega)
    else:
        raise TypeError(f"unsupported reservoir model {type(model).__name__}")
    return KernelSeries(grid, values)


def thermal_kernel(model, occupation, grid):
    """Occupation-weighted kernel g~(tau) = sum_k |V_k|^2 nbar_k exp(-i w_k tau).

    ``occupation`` is either a constant or a function of frequency.
    """
    tau = grid.times
    if not callable(occupation) and float(occupation) == 0.0:
        return KernelSeries(grid, np.zeros(len(grid), complex))
    if isinstance(model, Crow):
        # k-parametrization w = omega0 - 2 lambda0 cos k makes the integrand smooth
        def weight_k(k):
            w = model.omega0 - 2 * model.lambda0 * np.cos(k)
            return (2 / np.pi) * model.lam**2 * np.sin(k) ** 2 * _occupation_values(occupation, w)

        def integrand(k):
            w = model.omega0 - 2 * model.lambda0 * np.cos(k)
            return weight_k(k)[:, None] * np.exp(-1j * np.outer(w, tau))

        values = quadrature.integrate(integrand, 0.0, np.pi, rtol=QUAD_RTOL)
    elif isinstance(model, DiscreteModes):
        nbar = _occupation_values(occupation, model.omegas)
        values = np.exp(-1j * np.outer(tau, model.omegas)) @ (np.abs(model.couplings) ** 2 * nbar)
    elif isinstance(model, Tabulated):
        values = _band_kernel(
            lambda w: model(w) * _occupation_values(occupation, w), model.band, tau, breakpoints=model.omega
        )
    else:
        raise TypeError(f"unsupported reservoir model {type(model).__name__}")
    return KernelSeries(grid, values)


def f_kernel(model, grid):
    """h(tau) = sum_k g_k sin(k) exp(-i w_k tau) for the waveguide.

    Closed form (lam/lambda0) sqrt(pi/2) exp(-i omega0 tau) J1(2 lambda0 tau)/tau,
    with h(0) = lam sqrt(pi/2).
    """
    if not isinstance(model, Crow):
        raise TypeError("f_kernel is defined for the waveguide model only")
    tau = grid.times
    values = (
        model.lam * np.sqrt(np.pi / 2) * np.exp(-1j * model.omega0 * tau)
        * 2 * _bessel_ratio(2 * model.lambda0 * tau)
    )
    return KernelSeries(grid, values)


def crow_band_kernel(model, taus, which="g"):
    """Direct band quadrature of the waveguide kernels in the frequency variable.

    ``which="g"`` integrates J(w)/2pi, ``which="h"`` integrates
    eta/sqrt(2 pi) * sin k(w). Independent of the Bessel closed forms and used
    to check them.
    """
    if which == "g":
        def weight(w):
            return crow_spectral_density(model, w)
        return _band_kernel(weight, model.band, taus)
    if which == "h":
        def weight(w):
            sin_k = np.sqrt(np.clip(4 * model.lambda0**2 - (w - model.omega0) ** 2, 0, None)) / (2 * model.lambda0)
            # _band_kernel divides by 2 pi
            return 2 * np.pi * model.eta / np.sqrt(2 * np.pi) * sin_k
        return _band_kernel(weight, model.band, taus)
    raise ValueError(f"unknown kernel {which!r}")


def bose_einstein(temperature):
    """Occupation function 1/(exp(w/T) - 1); zero at T = 0."""
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0:
        return 0.0

    def nbar(omega):
        return 1.0 / np.expm1(np.asarray(omega, float) / temperature)

    return nbar
