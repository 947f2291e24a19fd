import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavitycorr.correlations import (
    BeamSplitterThermal,
    SqueezedVacuumCorrelated,
    UncorrelatedThermal,
    correlation_functions,
    discrete_mode_correlations,
    initial_chain_moments,
    mode_amplitudes,
    thermal_v1,
)
from cavitycorr.errors import GridMismatchError
from cavitycorr.propagator import compute_F, solve_u
from cavitycorr.reservoir import Crow, TimeGrid, f_kernel, memory_kernel, thermal_kernel

SINH2 = 3.626860407847019
SINH1_SQ = 1.3810978455418155
GRID = TimeGrid.from_tmax(0.2, 2000)


def _pipeline(eta, grid=GRID):
    model = Crow.from_eta(eta)
    sol = solve_u(memory_kernel(model, grid), 1.0, grid)
    return model, sol, compute_F(f_kernel(model, grid), sol)


@pytest.fixture(scope="module")
def eta12():
    return _pipeline(1.2)


def test_vacuum_reservoir_gives_zero_functions(eta12):
    _, sol, F = eta12
    corr = correlation_functions(UncorrelatedThermal(0.0, 0.0, 1.0, 0.0), sol, F)
    for name in ("nu1", "nu2", "v0", "v1", "v2", "nu1_dot", "nu2_dot", "v1_dot", "v2_dot"):
        assert np.all(getattr(corr, name) == 0)


def test_squeezed_closed_form_prefactor(eta12):
    _, sol, F = eta12
    corr = correlation_functions(SqueezedVacuumCorrelated(1.0, 0.0), sol, F)
    np.testing.assert_allclose(corr.nu2, -1j * SINH2 / math.sqrt(2 * math.pi) * F.F, rtol=1e-14)
    np.testing.assert_allclose(corr.v1, (2 / math.pi) * SINH1_SQ * np.abs(F.F) ** 2, rtol=1e-14)
    assert np.all(corr.nu1 == 0) and np.all(corr.v2 == 0) and np.all(corr.v0 == 0)


def test_beam_splitter_moments_and_prefactor(eta12):
    spec = BeamSplitterThermal(math.pi / 2, 6.0, 0.0)
    assert spec.n_cavity == pytest.approx(3.0)
    assert spec.n_b1 == pytest.approx(3.0)
    assert spec.cross == pytest.approx(3.0)
    _, sol, F = eta12
    corr = correlation_functions(spec, sol, F)
    np.testing.assert_allclose(corr.nu1, -1j * 6 / math.sqrt(2 * math.pi) * F.F, rtol=1e-14)
    np.testing.assert_allclose(corr.v1, (2 / math.pi) * 3.0 * np.abs(F.F) ** 2, rtol=1e-14)
    assert np.all(corr.nu2 == 0)


@pytest.mark.parametrize("spec", [SqueezedVacuumCorrelated(1.0, 0.3), BeamSplitterThermal(1.1, 4.0, 1.5)])
def test_functions_vanish_at_zero_and_v1_non_negative(eta12, spec):
    _, sol, F = eta12
    corr = correlation_functions(spec, sol, F)
    for name in ("nu1", "nu2", "v0", "v1", "v2"):
        assert getattr(corr, name)[0] == 0
    assert np.min(corr.v1) >= 0


@pytest.mark.parametrize("spec", [SqueezedVacuumCorrelated(1.0, 0.0), BeamSplitterThermal(math.pi / 2, 6.0, 0.0)])
@pytest.mark.parametrize("eta", [0.4, 1.2, 2.0])
def test_derivatives_match_central_differences(spec, eta):
    _, sol, F = _pipeline(eta)
    corr = correlation_functions(spec, sol, F)
    dt = GRID.dt
    for f, fdot in (("nu1", "nu1_dot"), ("nu2", "nu2_dot"), ("v1", "v1_dot")):
        x = getattr(corr, f)
        d = getattr(corr, fdot)
        central = (x[2:] - x[:-2]) / (2 * dt)
        second = np.max(np.abs(x[2:] - 2 * x[1:-1] + x[:-2])) / dt**2
        # O(dt^2) in both the differences and the scheme; scale by the third-derivative size
        bound = 10 * dt**2 * max(second, 1e-30) + 1e-12
        assert np.max(np.abs(central - d[1:-1])) <= bound


def _bloch_vector(n_modes):
    # amplitude of b1 in each Bloch mode of an open chain
    k = np.pi * np.arange(1, n_modes + 1) / (n_modes + 1)
    return np.sqrt(2 / (n_modes + 1)) * np.sin(k)


def test_discrete_squeezed_reproduces_closed_form(eta12):
    model, sol, F = eta12
    modes = model.discretize(400)
    c = _bloch_vector(400)
    a_b = 0.5 * SINH2 * c  # <a b_k> = sinh(2r)/sqrt(2 pi) sin k sqrt(dk)
    disc = discrete_mode_correlations(sol, modes, a_b=a_b, bdag_b=SINH1_SQ * np.outer(c, c))
    closed = correlation_functions(SqueezedVacuumCorrelated(1.0, 0.0), sol, F)
    assert np.max(np.abs(disc.nu2 - closed.nu2)) < 1e-3
    assert np.max(np.abs(disc.v1 - closed.v1)) < 1e-3
    assert np.max(np.abs(disc.nu2_dot - closed.nu2_dot)) < 1e-3


def test_discrete_beam_splitter_reproduces_closed_form(eta12):
    model, sol, F = eta12
    spec = BeamSplitterThermal(math.pi / 2, 6.0, 0.0)
    c = _bloch_vector(400)
    disc = discrete_mode_correlations(sol, model.discretize(400), adag_b=spec.cross * c,
                                      bdag_b=spec.n_b1 * np.outer(c, c))
    closed = correlation_functions(spec, sol, F)
    assert np.max(np.abs(disc.nu1 - closed.nu1)) < 1e-3
    assert np.max(np.abs(disc.v1 - closed.v1)) < 1e-3


def test_reservoir_two_photon_correlation_path(eta12):
    # <b1 b1> = s_b gives v2 = -s_b (2/pi) F^2 through the same Bloch map
    model, sol, F = eta12
    c = _bloch_vector(400)
    s_b = 0.4 + 0.2j
    disc = discrete_mode_correlations(sol, model.discretize(400), b_b=s_b * np.outer(c, c))
    assert np.max(np.abs(disc.v2 - (-s_b * (2 / np.pi) * F.F**2))) < 1e-3
    # v2 carries exp(-2i t); difference the slowly varying envelope instead
    t, dt = GRID.times, GRID.dt
    env = disc.v2 * np.exp(2j * t)
    env_dot = (disc.v2_dot + 2j * disc.v2) * np.exp(2j * t)
    central = (env[2:] - env[:-2]) / (2 * dt)
    assert np.max(np.abs(central - env_dot[1:-1])) < 1e-3 * np.max(np.abs(disc.v2_dot))


def test_mode_amplitude_derivative_identity(eta12):
    _, sol, _ = eta12
    omegas = np.array([0.97, 1.0, 1.03])
    phi, phi_dot = mode_amplitudes(sol, omegas)
    assert np.all(phi[:, 0] == 0)
    np.testing.assert_allclose(phi_dot[:, 0], 1.0)


def test_thermal_v1_matches_brute_force_double_sum():
    grid = TimeGrid(0.5, 120)
    model, sol, _ = _pipeline(1.2, grid)
    gt = thermal_kernel(model, 0.8, grid)
    v1, _ = thermal_v1(sol, gt)
    h = grid.dt
    u = sol.u
    g = gt.values
    for m in (1, 2, 7, 60, 120):
        w = np.full(m + 1, h)
        w[0] = w[-1] = 0.5 * h
        A = w * u[: m + 1]
        idx = np.arange(m + 1)
        d = idx[:, None] - idx[None, :]
        G = np.where(d >= 0, g[np.abs(d)], np.conj(g[np.abs(d)]))
        brute = np.real(np.conj(A) @ G @ A)
        assert v1[m] == pytest.approx(brute, rel=1e-12, abs=1e-15)


def test_thermal_v1_derivative_and_sign():
    grid = TimeGrid.from_tmax(0.2, 400)
    model, sol, F = _pipeline(0.4, grid)
    gt = thermal_kernel(model, 1.5, grid)
    corr = correlation_functions(UncorrelatedThermal(1.5, 0.0, 0.0, 0.0), sol, F, gt)
    assert np.min(corr.v1) >= 0
    central = (corr.v1[2:] - corr.v1[:-2]) / (2 * grid.dt)
    scale = np.max(np.abs(corr.v1_dot))
    assert np.max(np.abs(central - corr.v1_dot[1:-1])) < 1e-3 * scale


def test_thermal_requires_kernel(eta12):
    _, sol, F = eta12
    with pytest.raises(ValueError):
        correlation_functions(UncorrelatedThermal(0.5), sol, F)


def test_correlated_requires_F(eta12):
    _, sol, _ = eta12
    with pytest.raises(ValueError):
        correlation_functions(SqueezedVacuumCorrelated(1.0), sol)


def test_grid_mismatch(eta12):
    _, sol, _ = eta12
    _, _, other = _pipeline(1.2, TimeGrid(0.2, 100))
    with pytest.raises(GridMismatchError):
        correlation_functions(SqueezedVacuumCorrelated(1.0), sol, other)


def test_spec_validation():
    with pytest.raises(ValueError):
        SqueezedVacuumCorrelated(-0.1)
    with pytest.raises(ValueError):
        BeamSplitterThermal(0.3, -1.0, 0.0)
    with pytest.raises(ValueError):
        UncorrelatedThermal(-1.0)
    with pytest.raises(ValueError):
        UncorrelatedThermal(0.0, mean0=2.0, n0=1.0)
    with pytest.raises(ValueError):
        UncorrelatedThermal(0.0, n0=0.2, s0=1.0)


def test_initial_chain_moments_examples():
    vac = initial_chain_moments(SqueezedVacuumCorrelated(0.0), 5)
    assert np.all(vac.M == 0) and np.all(vac.S == 0)
    sq = initial_chain_moments(SqueezedVacuumCorrelated(1.0), 5)
    assert sq.M[0, 0] == pytest.approx(SINH1_SQ)
    assert abs(sq.S[0, 1]) == pytest.approx(0.5 * SINH2)
    assert sq.M[0, 0] * (sq.M[1, 1] + 1) >= abs(sq.S[0, 1]) ** 2 - 1e-12
    bs = initial_chain_moments(BeamSplitterThermal(math.pi / 2, 6.0, 0.0), 5)
    assert (bs.M[0, 0], bs.M[1, 1], bs.M[0, 1]) == pytest.approx((3.0, 3.0, 3.0))
    assert np.all(bs.S == 0)
    th = initial_chain_moments(UncorrelatedThermal(0.5, 0.0, 2.0, 0.0), 4)
    np.testing.assert_allclose(np.diag(th.M).real, [2.0, 0.5, 0.5, 0.5, 0.5])


def test_frequency_dependent_thermal_chain_moments():
    model = Crow.from_eta(1.0)
    nbar = lambda w: 1.0 + 10 * (w - 1.0)  # noqa: E731
    th = initial_chain_moments(UncorrelatedThermal(nbar, 0.0, 0.0, 0.0), 30, model)
    # trace over the reservoir equals the sum of the mode occupations
    k = np.pi * np.arange(1, 31) / 31
    assert np.trace(th.M[1:, 1:]).real == pytest.approx(np.sum(nbar(1 - 0.05 * np.cos(k))))
    with pytest.raises(ValueError):
        initial_chain_moments(UncorrelatedThermal(nbar), 30)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2), st.floats(0, 2 * math.pi), st.floats(0, math.pi), st.floats(0, 10), st.floats(0, 10))
def test_initial_moments_are_physical(r, theta, vartheta, na, nb):
    for spec in (SqueezedVacuumCorrelated(r, theta), BeamSplitterThermal(vartheta, na, nb)):
        m = initial_chain_moments(spec, 3)
        assert m.is_physical(tol=1e-9 * (1 + np.max(np.abs(m.M))))
        mean, n0, s0 = spec.cavity_moments()
        assert n0 + 0.5 >= abs(s0) and abs(mean) ** 2 <= n0 + 1e-12


@settings(max_examples=40)
@given(st.floats(0, math.pi), st.floats(0, 10), st.floats(0, 10))
def test_beam_splitter_conserves_photons(vartheta, na, nb):
    spec = BeamSplitterThermal(vartheta, na, nb)
    assert spec.n_cavity + spec.n_b1 == pytest.approx(na + nb)
    # Cauchy-Schwarz for the cross moment
    assert spec.cross**2 <= spec.n_cavity * spec.n_b1 + 1e-9
