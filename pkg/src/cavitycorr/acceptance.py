"""Acceptance suite: eleven numbered criteria, each reported as one pass/fail line."""
import math
import sys
import time
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .correlations import (
    BeamSplitterThermal,
    SqueezedVacuumCorrelated,
    UncorrelatedThermal,
    correlation_functions,
    initial_chain_moments,
    uncorrelated_counterpart,
)
from .errors import SingularGeneratorError, TruncationError
from .observables import covariance_matrix, evolve_observables
from .oracle import oracle_moments, oracle_u
from .propagator import compute_F, log_derivative_series, solve_u
from .reservoir import Crow, TimeGrid, bose_einstein, crow_band_kernel, f_kernel, memory_kernel, thermal_kernel
from .scenario import DEFAULT_DT, DEFAULT_TMAX, PRESET_NAMES, preset
from .tcl import extract_coefficients, fock_evolve, gaussian_state, moment_ode_residuals

TOL = 1e-3
CHAIN_N = 400
ORACLE_DT = 0.2
FOCK_NMAX = {"fig2": 30, "fig3": 60}
# criterion 7 and 8 thresholds
MONOTONE_SKIP = 0.01
MONOTONE_STEP_TOL = 1e-6
DECAY_FRACTION = 0.02
R_FINAL = 0.02
MIN_MAXIMA = 10
FLOOR_FRACTION = 0.05
R_AMPLITUDE = 0.05
WASHOUT = 0.01


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:2d}: {self.title}: {self.detail}"


def _grid(dt=DEFAULT_DT):
    return TimeGrid.from_tmax(dt, DEFAULT_TMAX)


@lru_cache(maxsize=None)
def _propagator(eta, dt):
    model = Crow.from_eta(eta)
    grid = _grid(dt)
    sol = solve_u(memory_kernel(model, grid), 1.0, grid)
    return model, grid, sol, compute_F(f_kernel(model, grid), sol)


@lru_cache(maxsize=None)
def _oracle_u(eta, dt):
    model = Crow.from_eta(eta)
    return oracle_u(model, CHAIN_N, 1.0, _grid(dt))


@lru_cache(maxsize=None)
def _scenario(name, dt=DEFAULT_DT):
    cfg = preset(name, dt=dt)
    model, grid, sol, F = _propagator(cfg.eta, dt)
    spec = cfg.initial_state
    corr = correlation_functions(spec, sol, F)
    traj = evolve_observables(sol, corr, spec)
    coeffs = extract_coefficients(sol, corr)
    return cfg, spec, sol, F, corr, traj, coeffs


def _eta(name):
    return preset(name).eta


def criterion_1():
    parts, ok = [], True
    for name in PRESET_NAMES:
        start = time.perf_counter()
        _, _, sol, _ = _propagator(_eta(name), ORACLE_DT)
        err = float(np.max(np.abs(sol.u - _oracle_u(_eta(name), ORACLE_DT))))
        elapsed = time.perf_counter() - start
        ok &= err <= TOL
        parts.append(f"{name} {err:.1e} ({elapsed:.1f} s)")
    return ok, "max |u - u_chain| at dt=0.2, N=400: " + ", ".join(parts)


def criterion_2():
    parts, ok = [], True
    for name in PRESET_NAMES:
        cfg, spec, sol, F, corr, traj, coeffs = _scenario(name)
        ref = oracle_moments(cfg.model, CHAIN_N, 1.0, sol.grid, initial_chain_moments(spec, CHAIN_N))
        en = float(np.max(np.abs(traj.n - ref.n)))
        es = float(np.max(np.abs(traj.s - ref.s)))
        ok &= max(en, es) <= TOL
        parts.append(f"{name} n {en:.1e} s {es:.1e}")
    return ok, ", ".join(parts)


def fock_round_trip(name):
    """(passed, max error or nan, note) for one preset."""
    cfg, spec, sol, F, corr, traj, coeffs = _scenario(name)
    mean0, n0, s0 = spec.cavity_moments()
    rho0 = gaussian_state(mean0, n0, s0, FOCK_NMAX[name[:4]])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            fock = fock_evolve(coeffs, rho0, sol.grid)
            note = ""
        except SingularGeneratorError as exc:
            fock = exc.partial
            note = f"singular generator at t={exc.time:.1f}"
        except TruncationError:
            return False, math.nan, "truncation breach"
    i = fock.indices
    err = float(max(np.max(np.abs(fock.mean - traj.mean[i])), np.max(np.abs(fock.n - traj.n[i])),
                    np.max(np.abs(fock.s - traj.s[i]))))
    return fock.completed and err <= TOL, err, note


def criterion_3():
    parts, ok = [], True
    for name in PRESET_NAMES:
        passed, err, note = fock_round_trip(name)
        ok &= passed
        parts.append(f"{name} {'ok' if passed else 'fail'} ({err:.1e}{', ' + note if note else ''})")
    return ok, ", ".join(parts)


def criterion_4():
    parts, ok = [], True
    for name in PRESET_NAMES:
        *_, traj, coeffs = _scenario(name)
        res = moment_ode_residuals(coeffs, traj).max
        ok &= res <= TOL
        parts.append(f"{name} {res:.1e}")
    return ok, "max relative residual: " + ", ".join(parts)


def criterion_5():
    parts, ok = [], True
    for label, occupation in (("nbar=0.5", 0.5), ("T=0.5", bose_einstein(0.5))):
        model, grid, sol, F = _propagator(1.2, DEFAULT_DT)
        spec = UncorrelatedThermal(occupation, 0.0, 1.0, 0.0)
        corr = correlation_functions(spec, sol, F, thermal_kernel(model, occupation, grid))
        coeffs = extract_coefficients(sol, corr)
        valid = coeffs.valid_flags
        g3 = float(np.max(np.abs(coeffs.gamma3[valid]))) if valid.any() else 0.0
        w = log_derivative_series(sol)
        reduced = corr.v1_dot - 2 * np.real(w) * corr.v1
        g2 = float(np.max(np.abs(coeffs.gamma2[valid] - reduced[valid])))
        ok &= g3 <= 1e-10 and g2 <= 1e-10 and valid.all()
        parts.append(f"{label} |g3| {g3:.1e} dg2 {g2:.1e} flagged {int((~valid).sum())}")
    return ok, ", ".join(parts)


def criterion_6():
    parts, ok = [], True
    grid = _grid(ORACLE_DT)
    for eta in (0.4, 1.2, 2.0):
        model = Crow.from_eta(eta)
        eg = float(np.max(np.abs(memory_kernel(model, grid).values - crow_band_kernel(model, grid.times, "g"))))
        eh = float(np.max(np.abs(f_kernel(model, grid).values - crow_band_kernel(model, grid.times, "h"))))
        ok &= max(eg, eh) <= 1e-8
        parts.append(f"eta={eta} g {eg:.1e} h {eh:.1e}")
    return ok, ", ".join(parts)


def _local_maxima(x):
    return int(np.count_nonzero((x[1:-1] > x[:-2]) & (x[1:-1] >= x[2:])))


def criterion_7():
    _, _, _, _, _, a, _ = _scenario("fig2a")
    n0 = a.n[0]
    start = int(MONOTONE_SKIP * (len(a.n) - 1))
    rises = np.diff(a.n[start:])
    worst = float(np.max(rises)) / n0
    mono = worst <= MONOTONE_STEP_TOL
    end = a.n[-1] / n0
    ra = float(a.r[-1])
    ok_a = mono and end < DECAY_FRACTION and ra < R_FINAL

    _, _, _, _, _, c, _ = _scenario("fig2c")
    n0c = c.n[0]
    half = len(c.n) // 2
    quarter = 3 * len(c.n) // 4
    maxima = _local_maxima(c.n[half:])
    floor = float(np.min(c.n[quarter:])) / n0c
    r_amp = 0.5 * float(np.max(c.r[quarter:]) - np.min(c.r[quarter:]))
    ok_c = maxima >= MIN_MAXIMA and floor > FLOOR_FRACTION and r_amp > R_AMPLITUDE
    detail = (
        f"(a) largest rise {worst:.1e} n0 (limit {MONOTONE_STEP_TOL:g}), n_end {end:.1e} n0, r_end {ra:.1e}; "
        f"(c) {maxima} maxima, floor {floor:.2f} n0, r amplitude {r_amp:.2f}"
    )
    return ok_a and ok_c, detail


def _difference(name):
    cfg, spec, sol, F, corr, traj, coeffs = _scenario(name)
    base = uncorrelated_counterpart(spec)
    plain = evolve_observables(sol, correlation_functions(base, sol, F), base)
    return np.abs(traj.n - plain.n) / traj.n[0]


def criterion_8():
    da = _difference("fig3a")
    dc = _difference("fig3c")
    end_a = float(da[-1])
    late_c = float(np.max(dc[3 * len(dc) // 4:]))
    ok = end_a < WASHOUT and late_c > WASHOUT
    return ok, f"fig3a |dn(t_max)| {end_a:.1e} n0, fig3c max |dn| last quarter {late_c:.2f} n0"


def criterion_9():
    parts, ok = [], True
    for name in PRESET_NAMES:
        _, _, sol, _, corr, traj, _ = _scenario(name)
        m = ~sol.zero_flags
        n, s = traj.n[m], traj.s[m]
        det = np.array([np.linalg.det(covariance_matrix(max(x, 0.0), y)) for x, y in zip(n, s)])
        checks = (
            float(np.min(n)) >= 0,
            bool(np.all(n + 0.5 >= np.abs(s) - 1e-9)),
            float(np.min(det)) >= 0.25 - 1e-9,
            float(np.min(corr.v1[m])) >= 0,
        )
        ok &= all(checks)
        parts.append(f"{name} {'ok' if all(checks) else 'fail'} (min det {np.min(det):.4f})")
    return ok, ", ".join(parts)


def criterion_10():
    parts, ok = [], True
    for eta in (0.4, 1.2, 2.0):
        errs = []
        for dt in (ORACLE_DT, ORACLE_DT / 2):
            _, _, sol, _ = _propagator(eta, dt)
            errs.append(float(np.max(np.abs(sol.u - _oracle_u(eta, dt)))))
        ratio = errs[0] / errs[1]
        ok &= ratio >= 3.5
        parts.append(f"eta={eta} ratio {ratio:.2f}")
    return ok, ", ".join(parts)


def criterion_11():
    parts, ok = [], True
    for eta in (0.4, 1.2, 2.0):
        model, grid, sol, F = _propagator(eta, DEFAULT_DT)
        specs = (SqueezedVacuumCorrelated(1.0, 0.0), BeamSplitterThermal(math.pi / 2, 6.0, 0.0))
        co = [extract_coefficients(sol, correlation_functions(sp, sol, F)) for sp in specs]
        same = all(getattr(co[0], k).tobytes() == getattr(co[1], k).tobytes() for k in ("gamma1", "delta"))
        ok &= same
        parts.append(f"eta={eta} {'identical' if same else 'differ'}")
    return ok, ", ".join(parts)


CRITERIA = (
    (1, "propagator vs chain oracle", criterion_1),
    (2, "moments vs chain oracle", criterion_2),
    (3, "master-equation Fock round trip", criterion_3),
    (4, "moment-ODE residuals", criterion_4),
    (5, "thermal reduction", criterion_5),
    (6, "kernel closed forms", criterion_6),
    (7, "fig 2 regimes", criterion_7),
    (8, "fig 3 regimes", criterion_8),
    (9, "physicality", criterion_9),
    (10, "second-order convergence", criterion_10),
    (11, "variant independence of gamma1, Delta", criterion_11),
)


def evaluate(number):
    for num, title, fn in CRITERIA:
        if num == number:
            passed, detail = fn()
            return CriterionResult(num, title, bool(passed), detail)
    raise KeyError(number)


def run_acceptance(numbers=None, stream=None):
    results = []
    for num, _, _ in CRITERIA:
        if numbers is not None and num not in numbers:
            continue
        result = evaluate(num)
        results.append(result)
        if stream is not None:
            print(result.line(), file=stream, flush=True)
    return results


if __name__ == "__main__":
    sys.exit(0 if all(r.passed for r in run_acceptance(stream=sys.stdout)) else 1)
