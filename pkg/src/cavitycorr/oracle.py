"""Exact finite-chain reference: cavity plus N waveguide resonators.

The Hamiltonian is quadratic, so every observable follows from the
one-particle propagator W(t) = exp(-i H t) on the (N+1)-dimensional site space.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ValidityWindowError

VALIDITY_FRACTION = 0.9
CHUNK = 2048


@dataclass(frozen=True)
class GaussianMoments:
    """First and second moments over the sites: mean_i = <c_i>, M_ij = <c_i^+ c_j>, S_ij = <c_i c_j>."""

    mean: np.ndarray
    M: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, complex)
        M = np.asarray(self.M, complex)
        S = np.asarray(self.S, complex)
        d = mean.shape[0]
        if M.shape != (d, d) or S.shape != (d, d):
            raise ValueError("moment shapes do not match")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "S", S)

    def physicality_matrix(self):
        """[[M, S*], [S, M^T + 1]] built from the displacement-free moments; PSD for any state."""
        d = len(self.mean)
        M = self.M - np.outer(np.conj(self.mean), self.mean)
        S = self.S - np.outer(self.mean, self.mean)
        return np.block([[M, np.conj(S)], [S, M.T + np.eye(d)]])

    def min_eigenvalue(self):
        C = self.physicality_matrix()
        return float(np.linalg.eigvalsh(0.5 * (C + C.conj().T))[0])

    def is_physical(self, tol=1e-10):
        return self.min_eigenvalue() >= -tol


@dataclass(frozen=True)
class ChainHamiltonian:
    """Cavity (site 0, frequency omega_c) coupled with strength lam to the end of an N-site chain.

    Chain sites have frequency omega0 and nearest-neighbour hopping -lambda0, so
    the Bloch modes have w_k = omega0 - 2 lambda0 cos k.
    """

    model: object
    n_sites: int
    omega_c: float

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("chain needs at least one resonator")

    @cached_property
    def matrix(self):
        d = self.n_sites + 1
        H = np.zeros((d, d))
        H[0, 0] = self.omega_c
        H[np.arange(1, d), np.arange(1, d)] = self.model.omega0
        H[0, 1] = H[1, 0] = self.model.lam
        idx = np.arange(1, d - 1)
        H[idx, idx + 1] = H[idx + 1, idx] = -self.model.lambda0
        return H

    @cached_property
    def eigensystem(self):
        return np.linalg.eigh(self.matrix)

    @property
    def validity_time(self):
        """Time before a wavefront reflected at the far end can return to the cavity."""
        return VALIDITY_FRACTION * self.n_sites / (2 * self.model.lambda0)

    def check_window(self, t_max):
        if t_max >= self.validity_time:
            raise ValidityWindowError(
                f"t_max = {t_max:g} is outside the finite-chain validity window "
                f"t < {self.validity_time:g}; use a longer chain"
            )

    def one_particle_evolution(self, t):
        """W(t) = exp(-i H t) as a dense matrix."""
        E, V = self.eigensystem
        return (V * np.exp(-1j * E * t)) @ V.T

    def cavity_rows(self, times):
        """Row 0 of W(t) for every time, shape (len(times), N+1)."""
        E, V = self.eigensystem
        times = np.asarray(times, float)
        out = np.empty((len(times), len(E)), complex)
        for lo in range(0, len(times), CHUNK):
            phases = np.exp(-1j * np.outer(times[lo:lo + CHUNK], E))
            out[lo:lo + CHUNK] = (phases * V[0]) @ V.T
        return out


def _chain(model, n_sites, omega_c, grid):
    chain = ChainHamiltonian(model, n_sites, omega_c)
    chain.check_window(grid.t_max)
    return chain


def oracle_u(model, n_sites, omega_c, grid):
    """u(t) = W_00(t)."""
    chain = _chain(model, n_sites, omega_c, grid)
    E, V = chain.eigensystem
    out = np.empty(len(grid), complex)
    t = grid.times
    w = V[0] ** 2
    for lo in range(0, len(t), CHUNK):
        out[lo:lo + CHUNK] = np.exp(-1j * np.outer(t[lo:lo + CHUNK], E)) @ w
    return out


def oracle_F(model, n_sites, omega_c, grid):
    """F(t) = i sqrt(pi/2) W_01(t): the b1 component of the cavity propagator."""
    chain = _chain(model, n_sites, omega_c, grid)
    E, V = chain.eigensystem
    out = np.empty(len(grid), complex)
    t = grid.times
    w = V[0] * V[1]
    for lo in range(0, len(t), CHUNK):
        out[lo:lo + CHUNK] = np.exp(-1j * np.outer(t[lo:lo + CHUNK], E)) @ w
    return 1j * np.sqrt(np.pi / 2) * out


@dataclass(frozen=True)
class OracleTrajectory:
    grid: object
    mean: np.ndarray = field(repr=False)
    n: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)


def oracle_moments(model, n_sites, omega_c, grid, initial):
    """Cavity <a>, n and s by exact transport of the chain's Gaussian moments.

    With a(t) = sum_j w_j(t) c_j(0), w = row 0 of W(t):
    <a> = w . mean, n = w^* M w, s = w S w.
    """
    if initial.M.shape[0] != n_sites + 1:
        raise ValueError("initial moments do not match the chain size")
    chain = _chain(model, n_sites, omega_c, grid)
    rows = chain.cavity_rows(grid.times)
    mean = rows @ initial.mean
    n = np.real(np.sum((np.conj(rows) @ initial.M) * rows, axis=1))
    s = np.sum((rows @ initial.S) * rows, axis=1)
    return OracleTrajectory(grid, mean, n, s)
