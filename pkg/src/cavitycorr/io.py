"""CSV export with fixed column schemas: header row, comma separated, %.12e numbers."""
from pathlib import Path

import numpy as np

KERNEL_COLUMNS = ("tau", "re", "im")
U_COLUMNS = ("t", "re_u", "im_u", "abs_u2", "re_udot", "im_udot")
CORRELATION_COLUMNS = ("t", "re_nu1", "im_nu1", "re_nu2", "im_nu2", "v1", "re_v2", "im_v2")
OBSERVABLE_COLUMNS = ("t", "re_mean", "im_mean", "n", "re_s", "im_s", "r", "theta", "nbar", "physical")
COEFFICIENT_COLUMNS = ("t", "delta", "gamma1", "gamma2", "re_gamma3", "im_gamma3", "valid")
COMPARISON_COLUMNS = ("t", "n_correlated", "n_uncorrelated", "difference")


def _format(value, integer):
    if integer:
        return str(int(value))
    return "%.12e" % value


def write_csv(path, columns, data, integer_columns=()):
    """Write equal-length 1-d arrays under ``columns``; names in ``integer_columns`` print as 0/1."""
    path = Path(path)
    arrays = [np.asarray(d) for d in data]
    if len(arrays) != len(columns) or len({a.shape for a in arrays}) != 1:
        raise ValueError("columns and data must match in count and length")
    ints = [c in integer_columns for c in columns]
    with path.open("w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in zip(*arrays):
            fh.write(",".join(_format(v, i) for v, i in zip(row, ints)) + "\n")
    return path


def read_csv(path):
    """Read a file written by write_csv into a dict of float arrays."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


def write_kernel(path, kernel):
    v = kernel.values
    return write_csv(path, KERNEL_COLUMNS, (kernel.grid.times, v.real, v.imag))


def write_propagator(path, sol):
    u, ud = sol.u, sol.u_dot
    return write_csv(path, U_COLUMNS, (sol.grid.times, u.real, u.imag, np.abs(u) ** 2, ud.real, ud.imag))


def write_correlations(path, corr):
    return write_csv(path, CORRELATION_COLUMNS, (
        corr.grid.times, corr.nu1.real, corr.nu1.imag, corr.nu2.real, corr.nu2.imag,
        corr.v1, corr.v2.real, corr.v2.imag,
    ))


def write_observables(path, traj):
    return write_csv(path, OBSERVABLE_COLUMNS, (
        traj.grid.times, traj.mean.real, traj.mean.imag, traj.n, traj.s.real, traj.s.imag,
        traj.r, traj.theta, traj.nbar, traj.physical_flags.astype(int),
    ), integer_columns=("physical",))


def write_oracle(path, grid, mean, n, s):
    """Chain-oracle moments in the observables schema, squeezing columns filled in."""
    from .observables import squeezing_series

    r, theta, nbar, physical = squeezing_series(n, s, warn=False)
    return write_csv(path, OBSERVABLE_COLUMNS, (
        grid.times, mean.real, mean.imag, n, s.real, s.imag, r, theta, nbar, physical.astype(int),
    ), integer_columns=("physical",))


def write_coefficients(path, coeffs):
    """Flagged nodes keep their row with NaN values and valid = 0."""
    g3 = coeffs.gamma3
    return write_csv(path, COEFFICIENT_COLUMNS, (
        coeffs.grid.times, coeffs.delta, coeffs.gamma1, coeffs.gamma2, g3.real, g3.imag,
        coeffs.valid_flags.astype(int),
    ), integer_columns=("valid",))


def write_comparison(path, grid, n_corr, n_uncorr):
    return write_csv(path, COMPARISON_COLUMNS, (grid.times, n_corr, n_uncorr, n_corr - n_uncorr))
