"""Time-local master equation: coefficients, moment equations and a Fock-space validator.

The generator is

    d rho/dt = -i Delta [a^+a, rho]
             + gamma1 (2 a rho a^+ - a^+a rho - rho a^+a)
             + gamma2 (a rho a^+ + a^+ rho a - a^+a rho - rho a a^+)
             + gamma3^* (2 a rho a - a a rho - rho a a)
             + gamma3 (2 a^+ rho a^+ - a^+a^+ rho - rho a^+a^+)

which gives d<a>/dt = -(gamma1 + i Delta)<a>, dn/dt = -2 gamma1 n + gamma2 and
ds/dt = -2 (gamma1 + i Delta) s - 2 gamma3.
"""
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import SingularGeneratorError, TruncationError
from .observables import squeezing_decomposition
from .propagator import log_derivative_series

TOP_LEVEL_LIMIT = 1e-4
TOP_LEVEL_INITIAL = 1e-8
TRACE_DRIFT = 1e-9
STIFFNESS_LIMIT = 2.5


class TruncationWarning(RuntimeWarning):
    pass


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MasterEqCoefficients:
    grid: object
    omega_c: float
    delta: np.ndarray = field(repr=False)
    gamma1: np.ndarray = field(repr=False)
    gamma2: np.ndarray = field(repr=False)
    gamma3: np.ndarray = field(repr=False)
    valid_flags: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name, dtype in (("delta", float), ("gamma1", float), ("gamma2", float),
                            ("gamma3", complex), ("valid_flags", bool)):
            object.__setattr__(self, name, _frozen(getattr(self, name), dtype))


def extract_coefficients(sol, corr):
    """Delta, gamma1, gamma2, gamma3 from u, du/dt and the correlation functions.

    With w = (du/dt)/u:
      Delta = -Im w, gamma1 = -Re w,
      gamma2 = dv1/dt + 2 Re[u dnu1^*/dt - w (v1 + u^* nu1)],
      gamma3 = -dv2/dt / 2 + w v2 - u dnu2/dt + (du/dt) nu2.
    Nodes where u vanishes carry NaN and valid_flags = False.
    """
    sol.grid.check_same(corr.grid)
    if not corr.has_derivatives:
        raise ValueError("correlation functions lack the derivative series needed by the coefficients")
    u, u_dot = sol.u, sol.u_dot
    w = log_derivative_series(sol)
    valid = ~sol.zero_flags
    delta = -w.imag
    gamma1 = -w.real
    gamma2 = corr.v1_dot + 2 * np.real(u * np.conj(corr.nu1_dot) - w * (corr.v1 + np.conj(u) * corr.nu1))
    gamma3 = -0.5 * corr.v2_dot + w * corr.v2 - u * corr.nu2_dot + u_dot * corr.nu2
    gamma2 = np.where(valid, gamma2, np.nan)
    gamma3 = np.where(valid, gamma3, np.nan + 1j * np.nan)
    return MasterEqCoefficients(sol.grid, sol.omega_c, delta, gamma1, gamma2, gamma3, valid)


@dataclass(frozen=True)
class MomentResiduals:
    """Per-node residuals of the three moment equations, relative to the largest slope."""

    grid: object
    mean: np.ndarray = field(repr=False)
    n: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    used: np.ndarray = field(repr=False)

    @property
    def max_mean(self):
        return _masked_max(self.mean, self.used)

    @property
    def max_n(self):
        return _masked_max(self.n, self.used)

    @property
    def max_s(self):
        return _masked_max(self.s, self.used)

    @property
    def max(self):
        return max(self.max_mean, self.max_n, self.max_s)


def _masked_max(values, mask):
    return float(np.max(values[mask])) if np.any(mask) else 0.0


SLOPE_FLOOR = 1e-6


def _relative(residual, slope, mask):
    # floor keeps roundoff over a vanishing slope from reading as a large relative error
    scale = max(_masked_max(np.abs(slope), mask), SLOPE_FLOOR)
    return np.abs(residual) / scale


def moment_ode_residuals(coeffs, traj):
    """Central-difference check of the moment equations at interior unflagged nodes.

    <a> and s are compared in the frame rotating at omega_c, where they vary on
    the slow reservoir time scale; in the lab frame omega_c dt is too large for
    a second-order difference to resolve the free rotation.
    """
    coeffs.grid.check_same(traj.grid)
    t = traj.grid.times
    dt = traj.grid.dt
    wc = coeffs.omega_c
    rot = np.exp(1j * wc * t)
    A = rot * traj.mean
    S = rot**2 * traj.s
    used = np.zeros(len(t), bool)
    used[1:-1] = coeffs.valid_flags[1:-1]
    z = coeffs.gamma1 + 1j * (coeffs.delta - wc)
    rhs_a = -z * A
    rhs_n = -2 * coeffs.gamma1 * traj.n + coeffs.gamma2
    rhs_s = -2 * z * S - 2 * coeffs.gamma3 * rot**2

    def central(x):
        d = np.zeros_like(x)
        d[1:-1] = (x[2:] - x[:-2]) / (2 * dt)
        return d

    res_a = np.where(used, central(A) - rhs_a, 0)
    res_n = np.where(used, central(traj.n) - rhs_n, 0)
    res_s = np.where(used, central(S) - rhs_s, 0)
    return MomentResiduals(
        traj.grid,
        _relative(res_a, rhs_a, used),
        _relative(res_n, rhs_n, used),
        _relative(res_s, rhs_s, used),
        used,
    )


@dataclass(frozen=True)
class FockDensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        rho = np.array(self.entries, complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(rho) - 1) > 1e-10:
            raise ValueError("density matrix must have unit trace")
        if np.min(np.real(np.diag(rho))) < -1e-12:
            raise ValueError("density matrix has negative populations")
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self):
        return self.entries.shape[0]

    @property
    def n_max(self):
        return self.dim - 1


def _annihilation(dim):
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def fock_state(k, n_max):
    rho = np.zeros((n_max + 1, n_max + 1), complex)
    rho[k, k] = 1.0
    return FockDensityMatrix(rho)


def thermal_state(nbar, n_max):
    """Thermal populations truncated at n_max and renormalized."""
    if nbar < 0:
        raise ValueError("thermal occupation must be non-negative")
    k = np.arange(n_max + 1)
    if nbar == 0:
        p = (k == 0).astype(float)
    else:
        p = (nbar / (nbar + 1)) ** k / (nbar + 1)
    return FockDensityMatrix(np.diag(p / p.sum()).astype(complex))


def gaussian_state(mean, n, s, n_max, padding=60):
    """Displaced squeezed thermal state with the given <a>, <a^+a>, <aa>.

    Built in a larger space of n_max + padding levels and truncated, so that
    truncation of the operators does not distort the low levels.
    """
    nc = n - abs(mean) ** 2
    sc = s - mean**2
    r, theta, nbar, physical = squeezing_decomposition(nc, sc)
    if not physical:
        raise ValueError("moments do not describe a physical state")
    big = n_max + 1 + padding
    a = _annihilation(big)
    ad = a.conj().T
    k = np.arange(big)
    rho = np.diag((nbar / (nbar + 1)) ** k / (nbar + 1) if nbar > 0 else (k == 0).astype(float)).astype(complex)
    # S = exp[(xi^* a^2 - xi a^+2)/2] with xi = -r e^{i theta} gives <aa> = (nbar + 1/2) sinh 2r e^{i theta}
    xi = -r * np.exp(1j * theta)
    S = scipy.linalg.expm(0.5 * (np.conj(xi) * a @ a - xi * ad @ ad))
    D = scipy.linalg.expm(mean * ad - np.conj(mean) * a)
    U = D @ S
    rho = (U @ rho @ U.conj().T)[: n_max + 1, : n_max + 1]
    rho = 0.5 * (rho + rho.conj().T)
    return FockDensityMatrix(rho / np.trace(rho).real)


def _superoperators(dim):
    """Sparse generators for row-major vec(rho); vec(A rho B) = kron(A, B^T) vec(rho)."""
    a = sp.csr_matrix(_annihilation(dim))
    ad = a.conj().T.tocsr()
    eye = sp.identity(dim, complex, format="csr")
    N = ad @ a
    aad = a @ ad
    aa = a @ a
    adad = ad @ ad

    def left(A):
        return sp.kron(A, eye)

    def right(B):
        return sp.kron(eye, B.T)

    def both(A, B):
        return sp.kron(A, B.T)

    L_H = -1j * (left(N) - right(N))
    L_1 = 2 * both(a, ad) - left(N) - right(N)
    L_2 = both(a, ad) + both(ad, a) - left(N) - right(aad)
    L_3c = 2 * both(a, a) - left(aa) - right(aa)
    L_3 = 2 * both(ad, ad) - left(adad) - right(adad)
    return sp.vstack([L_H, L_1, L_2, L_3c, L_3]).tocsr()


@dataclass
class FockTrajectory:
    """Moments from the Fock-space integration, on every second grid node."""

    times: np.ndarray
    indices: np.ndarray
    mean: np.ndarray
    n: np.ndarray
    s: np.ndarray
    trace: np.ndarray
    top_occupation: np.ndarray
    renormalizations: int = 0
    completed: bool = True
    failure: Optional[str] = None


def _moments(rho, a):
    mean = np.trace(a @ rho)
    n = np.real(np.trace(a.conj().T @ a @ rho))
    s = np.trace(a @ a @ rho)
    return mean, n, s


def fock_evolve(coeffs, rho0, grid, check_initial=True):
    """Fourth-order Runge-Kutta integration of the master equation in a truncated Fock space.

    Works in the frame rotating at omega_c. Each step spans two grid nodes so
    that the Runge-Kutta stages fall on nodes n, n+1, n+2 and the coefficients
    are used without interpolation. Raises TruncationError if the top Fock
    level gets populated beyond 1e-4 and SingularGeneratorError if the
    coefficients are undefined or too large for the step (near zeros of u);
    the latter carries the trajectory computed so far.
    """
    grid.check_same(coeffs.grid)
    dim = rho0.dim
    n_max = dim - 1
    top0 = float(np.real(rho0.entries[-1, -1]))
    if check_initial and top0 > TOP_LEVEL_INITIAL:
        warnings.warn(
            f"initial top-level population {top0:.2e} exceeds {TOP_LEVEL_INITIAL:g}; consider a larger cutoff",
            TruncationWarning, stacklevel=2,
        )
    stack = _superoperators(dim)
    D = dim * dim
    a = _annihilation(dim)
    wc = coeffs.omega_c
    t = grid.times
    rot2 = np.exp(2j * wc * t)
    c_all = np.stack([
        coeffs.delta - wc,
        coeffs.gamma1,
        coeffs.gamma2,
        np.conj(coeffs.gamma3 * rot2),
        coeffs.gamma3 * rot2,
    ], axis=1).astype(complex)
    rate_bound = (
        np.abs(coeffs.delta - wc) * n_max
        + 2 * np.abs(coeffs.gamma1) * n_max
        + 2 * np.abs(coeffs.gamma2) * (2 * n_max + 1)
        + 4 * np.abs(coeffs.gamma3) * (n_max + 1)
    )
    H = 2 * grid.dt
    steps = (len(grid) - 1) // 2

    def rhs(j, x):
        y = (stack @ x).reshape(5, D)
        return c_all[j] @ y

    x = rho0.entries.reshape(-1).astype(complex)
    count = steps + 1
    idx = 2 * np.arange(count)
    mean = np.zeros(count, complex)
    n = np.zeros(count)
    s = np.zeros(count, complex)
    trace = np.zeros(count)
    top = np.zeros(count)
    renorm = 0

    def record(m, rho):
        mean[m], n[m], s[m] = _moments(rho, a)
        trace[m] = np.real(np.trace(rho))
        top[m] = np.real(rho[-1, -1])

    def partial(m, reason):
        rot = np.exp(-1j * wc * t[idx[:m]])
        return FockTrajectory(t[idx[:m]], idx[:m], rot * mean[:m], n[:m].copy(), rot**2 * s[:m],
                              trace[:m].copy(), top[:m].copy(), renorm, False, reason)

    record(0, rho0.entries)
    for m in range(steps):
        j = 2 * m
        window = slice(j, j + 3)
        if not np.all(np.isfinite(c_all[window])):
            raise SingularGeneratorError(
                f"master-equation coefficients undefined near t = {t[j]:g} (zero of u)", t[j],
                partial(m + 1, "undefined coefficients"),
            )
        if H * np.max(rate_bound[window]) > STIFFNESS_LIMIT:
            raise SingularGeneratorError(
                f"generator too stiff for the step near t = {t[j]:g} "
                f"(rate bound {np.max(rate_bound[window]):.3g} for step {H:g}); the rates diverge "
                "at zeros of u",
                t[j], partial(m + 1, "stiff generator"),
            )
        k1 = rhs(j, x)
        k2 = rhs(j + 1, x + 0.5 * H * k1)
        k3 = rhs(j + 1, x + 0.5 * H * k2)
        k4 = rhs(j + 2, x + H * k3)
        x = x + (H / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = x.reshape(dim, dim)
        tr = np.real(np.trace(rho))
        if abs(tr - 1) > TRACE_DRIFT:
            x = x / tr
            rho = x.reshape(dim, dim)
            renorm += 1
        record(m + 1, rho)
        if top[m + 1] > TOP_LEVEL_LIMIT:
            raise TruncationError(
                f"top Fock level population {top[m + 1]:.2e} at t = {t[j + 2]:g} exceeds "
                f"{TOP_LEVEL_LIMIT:g}; increase the cutoff beyond {n_max}"
            )
    rot = np.exp(-1j * wc * t[idx])
    return FockTrajectory(t[idx], idx, rot * mean, n, rot**2 * s, trace, top, renorm)
