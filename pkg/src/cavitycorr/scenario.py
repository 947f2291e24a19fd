"""Scenario configuration, figure presets and the end-to-end pipeline."""
import dataclasses
import math
import re
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .correlations import (
    BeamSplitterThermal,
    SqueezedVacuumCorrelated,
    UncorrelatedThermal,
    correlation_functions,
    initial_chain_moments,
    uncorrelated_counterpart,
)
from .errors import ConfigError, SingularGeneratorError, TruncationError
from .observables import evolve_observables
from .oracle import oracle_F, oracle_moments, oracle_u
from .propagator import compute_F, solve_u
from .reservoir import Crow, TimeGrid, f_kernel, memory_kernel, thermal_kernel
from .tcl import extract_coefficients, fock_evolve, gaussian_state, moment_ode_residuals

TOLERANCE = 1e-3
STATES = ("squeezed", "beamsplitter", "thermal")
PRESET_NAMES = ("fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c")
DEFAULT_DT = 0.1
DEFAULT_TMAX = 2000.0


@dataclass(frozen=True)
class ScenarioConfig:
    preset: str = "custom"
    state: str = "squeezed"
    omega_c: float = 1.0
    omega0: float = 1.0
    lambda0: float = 0.025
    eta: float = 0.4
    r_s: float = 1.0
    theta_s: float = 0.0
    vartheta: float = math.pi / 2
    nbar_a: float = 6.0
    nbar_b1: float = 0.0
    occupation: float = 0.0
    n0: float = 0.0
    dt: float = DEFAULT_DT
    t_max: float = DEFAULT_TMAX
    run_oracle: bool = True
    run_fock: bool = True
    oracle_N: int = 400
    fock_nmax: Optional[int] = None
    out: str = "out"

    def __post_init__(self):
        if self.preset not in PRESET_NAMES + ("custom",):
            raise ConfigError(f"preset: unknown preset {self.preset!r}")
        if self.state not in STATES:
            raise ConfigError(f"state: must be one of {', '.join(STATES)}, got {self.state!r}")
        checks = (
            ("dt", self.dt > 0, "must be positive"),
            ("t_max", self.t_max > 2 * self.dt, "must exceed two time steps"),
            ("lambda0", self.lambda0 > 0, "must be positive"),
            ("eta", self.eta >= 0, "must be non-negative"),
            ("r_s", self.r_s >= 0, "must be non-negative"),
            ("nbar_a", self.nbar_a >= 0, "must be non-negative"),
            ("nbar_b1", self.nbar_b1 >= 0, "must be non-negative"),
            ("occupation", self.occupation >= 0, "must be non-negative"),
            ("n0", self.n0 >= 0, "must be non-negative"),
            ("oracle_N", self.oracle_N >= 1, "must be at least 1"),
            ("fock_nmax", self.fock_nmax is None or self.fock_nmax >= 1, "must be at least 1"),
        )
        for name, ok, message in checks:
            if not ok:
                raise ConfigError(f"{name}: {message}")
        for name in ("omega_c", "omega0", "dt", "t_max", "eta"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name}: must be finite")

    @property
    def model(self):
        return Crow.from_eta(self.eta, lambda0=self.lambda0, omega0=self.omega0)

    @property
    def grid(self):
        return TimeGrid.from_tmax(self.dt, self.t_max)

    @property
    def initial_state(self):
        if self.state == "squeezed":
            return SqueezedVacuumCorrelated(self.r_s, self.theta_s)
        if self.state == "beamsplitter":
            return BeamSplitterThermal(self.vartheta, self.nbar_a, self.nbar_b1)
        return UncorrelatedThermal(self.occupation, 0.0, self.n0, 0.0)

    @property
    def fock_cutoff(self):
        if self.fock_nmax is not None:
            return self.fock_nmax
        return 60 if self.state == "beamsplitter" else 30

    @property
    def correlated(self):
        return self.state in ("squeezed", "beamsplitter")


_FIG_ETAS = {"a": 0.4, "b": 1.2, "c": 2.0}


def preset_values(name):
    """Parameter values a preset fixes; everything else keeps its default."""
    if name not in PRESET_NAMES:
        raise ConfigError(f"preset: unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    common = {"preset": name, "omega_c": 1.0, "omega0": 1.0, "lambda0": 0.025, "eta": _FIG_ETAS[name[-1]]}
    if name.startswith("fig2"):
        return {**common, "state": "squeezed", "r_s": 1.0, "theta_s": 0.0}
    return {**common, "state": "beamsplitter", "nbar_a": 6.0, "nbar_b1": 0.0, "vartheta": math.pi / 2}


def preset(name, **overrides):
    return make_config({**preset_values(name), **overrides})


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_BOOL = {"true": True, "yes": True, "on": True, "1": True, "false": False, "no": False, "off": False, "0": False}


def _convert(name, raw):
    text = raw.strip()
    if name in ("preset", "state", "out"):
        return text
    if name in ("run_oracle", "run_fock"):
        if text.lower() not in _BOOL:
            raise ValueError(f"expected a boolean, got {text!r}")
        return _BOOL[text.lower()]
    if name in ("oracle_N", "fock_nmax"):
        return int(text)
    if name in ("vartheta", "theta_s"):
        return _angle(text)
    return float(text)


_PI_MULTIPLE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)?)\*?pi(?:/(\d+\.?\d*))?$")


def _angle(text):
    """Accept plain numbers and multiples of pi such as 'pi/2', '-pi' or '0.5*pi'."""
    t = text.replace(" ", "").lower()
    match = _PI_MULTIPLE.match(t)
    if not match:
        return float(t)
    factor, den = match.groups()
    scale = {"": 1.0, "+": 1.0, "-": -1.0}.get(factor)
    value = (scale if scale is not None else float(factor)) * math.pi
    return value / float(den) if den else value


def make_config(values):
    """Build a config from a mapping; a preset supplies values for keys the mapping leaves out."""
    values = dict(values)
    unknown = set(values) - set(_FIELDS)
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(sorted(unknown))}")
    if "preset" in values and values["preset"] != "custom":
        values = {**preset_values(values["preset"]), **values}
    return ScenarioConfig(**values)


def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines (``#`` starts a comment) into a dict of typed values."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        if key not in _FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown field {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: field {key!r} given twice")
        try:
            values[key] = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: field {key!r}: {exc}") from None
    return values


def load_config(path, overrides=None):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    values = parse_config_text(text, str(path))
    values.update(overrides or {})
    try:
        return make_config(values)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    grid: TimeGrid
    sol: object
    F: object
    corr: object
    traj: object
    coeffs: object
    residuals: object
    checks: list = field(default_factory=list)
    oracle: Optional[object] = None
    fock: Optional[object] = None
    fock_error: Optional[str] = None
    comparison: Optional[tuple] = None
    timings: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def compute_scenario(config):
    """Run the pipeline in memory: kernel, u, F, correlations, observables, coefficients, validations."""
    timings = {}
    start = time.perf_counter()
    model = config.model
    grid = config.grid
    spec = config.initial_state
    kernel = memory_kernel(model, grid)
    sol = solve_u(kernel, config.omega_c, grid)
    F = compute_F(f_kernel(model, grid), sol)
    gtilde = thermal_kernel(model, config.occupation, grid) if config.state == "thermal" else None
    corr = correlation_functions(spec, sol, F, gtilde)
    traj = evolve_observables(sol, corr, spec)
    coeffs = extract_coefficients(sol, corr)
    residuals = moment_ode_residuals(coeffs, traj)
    timings["pipeline"] = time.perf_counter() - start

    result = ScenarioResult(config, grid, sol, F, corr, traj, coeffs, residuals, timings=timings)
    checks = result.checks
    checks.append(Check("moment ODE residual (relative)", residuals.max, TOLERANCE, residuals.max <= TOLERANCE))
    unphysical = int(np.count_nonzero(~traj.physical_flags & ~sol.zero_flags))
    checks.append(Check("unphysical nodes", unphysical, 0, unphysical == 0))

    if config.run_oracle:
        start = time.perf_counter()
        n_sites = config.oracle_N
        u_ref = oracle_u(model, n_sites, config.omega_c, grid)
        F_ref = oracle_F(model, n_sites, config.omega_c, grid)
        mom = oracle_moments(model, n_sites, config.omega_c, grid, initial_chain_moments(spec, n_sites, model))
        result.oracle = mom
        for name, err in (
            ("oracle |u| error", np.max(np.abs(sol.u - u_ref))),
            ("oracle F error", np.max(np.abs(F.F - F_ref))),
            ("oracle n error", np.max(np.abs(traj.n - mom.n))),
            ("oracle s error", np.max(np.abs(traj.s - mom.s))),
            ("oracle <a> error", np.max(np.abs(traj.mean - mom.mean))),
        ):
            checks.append(Check(name, float(err), TOLERANCE, err <= TOLERANCE))
        timings["oracle"] = time.perf_counter() - start

    if config.run_fock:
        start = time.perf_counter()
        _run_fock(result)
        timings["fock"] = time.perf_counter() - start

    if config.correlated:
        base = uncorrelated_counterpart(spec)
        plain = evolve_observables(sol, correlation_functions(base, sol, F), base)
        result.comparison = (traj.n, plain.n)
    return result


def _run_fock(result):
    config = result.config
    mean0, n0, s0 = config.initial_state.cavity_moments()
    rho0 = gaussian_state(mean0, n0, s0, config.fock_cutoff)
    traj = result.traj
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            fock = fock_evolve(result.coeffs, rho0, result.grid)
        except SingularGeneratorError as exc:
            fock = exc.partial
            result.fock_error = str(exc)
        except TruncationError as exc:
            fock = None
            result.fock_error = str(exc)
    notes = "; ".join(str(w.message) for w in caught)
    result.fock = fock
    if fock is None or len(fock.indices) == 0:
        result.checks.append(Check("Fock round trip", math.nan, TOLERANCE, False, result.fock_error or notes))
        return
    i = fock.indices
    err = max(
        np.max(np.abs(fock.mean - traj.mean[i])),
        np.max(np.abs(fock.n - traj.n[i])),
        np.max(np.abs(fock.s - traj.s[i])),
    )
    note = notes
    if not fock.completed:
        note = f"stopped at t = {fock.times[-1]:g}: {result.fock_error}"
    result.checks.append(Check("Fock round trip", float(err), TOLERANCE, fock.completed and err <= TOLERANCE, note))


GNUPLOT = """\
# gnuplot script; time axis in units of 1/lambda0
set datafile separator ','
set key autotitle columnhead
set xlabel 't lambda0'
lambda0 = {lambda0!r}
set multiplot layout 2,1 title '{title}'
set ylabel 'n(t)'
plot 'observables.csv' using ($1*lambda0):4 with lines title 'n'{extra_n}
set ylabel 'r(t)'
plot 'observables.csv' using ($1*lambda0):7 with lines title 'r'
unset multiplot
"""


def write_outputs(result, out_dir):
    """Write CSV files, the gnuplot script and report.txt into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = result.config
    io.write_kernel(out / "kernel.csv", memory_kernel(config.model, result.grid))
    io.write_propagator(out / "u.csv", result.sol)
    io.write_correlations(out / "correlations.csv", result.corr)
    io.write_observables(out / "observables.csv", result.traj)
    io.write_coefficients(out / "coefficients.csv", result.coeffs)
    if result.oracle is not None:
        o = result.oracle
        io.write_oracle(out / "oracle.csv", result.grid, o.mean, o.n, o.s)
    extra = ""
    if result.comparison is not None:
        io.write_comparison(out / "comparison.csv", result.grid, *result.comparison)
        extra = ", 'comparison.csv' using ($1*lambda0):3 with lines dt 2 title 'uncorrelated'"
    (out / "plot.gp").write_text(GNUPLOT.format(lambda0=config.lambda0, title=config.preset, extra_n=extra))
    (out / "report.txt").write_text(format_report(result))
    return out


def format_report(result):
    config = result.config
    sol = result.sol
    lines = [f"scenario: {config.preset}", "parameters:"]
    for f in dataclasses.fields(config):
        if f.name != "out":
            lines.append(f"  {f.name} = {getattr(config, f.name)}")
    lines.append(f"grid: dt = {result.grid.dt:g}, steps = {result.grid.n_steps}, t_max = {result.grid.t_max:g}")
    lines.append(f"singular nodes (|u| < 1e-8): {int(np.count_nonzero(sol.zero_flags))}")
    lines.append(f"unphysical nodes: {int(np.count_nonzero(~result.traj.physical_flags))}")
    r = result.residuals
    lines.append(f"moment residuals (relative): mean {r.max_mean:.3e}, n {r.max_n:.3e}, s {r.max_s:.3e}")
    lines.append("checks:")
    breaches = 0
    for c in result.checks:
        status = "ok" if c.passed else "BREACH"
        breaches += not c.passed
        line = f"  [{status}] {c.name}: {c.value:.3e} (tolerance {c.tolerance:g})"
        if c.note:
            line += f"  # {c.note}"
        lines.append(line)
    if result.comparison is not None:
        nc, nu = result.comparison
        diff = np.abs(nc - nu)
        q = len(diff) * 3 // 4
        n0 = nc[0] if nc[0] else 1.0
        lines.append(
            f"correlated vs uncorrelated: |dn| at t_max = {diff[-1] / n0:.3e} n(0), "
            f"max over last quarter = {np.max(diff[q:]) / n0:.3e} n(0)"
        )
    lines.append(f"tolerance breaches: {breaches}")
    lines.append("timings: " + ", ".join(f"{k} {v:.2f} s" for k, v in result.timings.items()))
    return "\n".join(lines) + "\n"


def run_scenario(config, out_dir=None):
    """Compute and write one scenario. Returns the result; its ``passed`` decides the exit status."""
    result = compute_scenario(config)
    write_outputs(result, out_dir if out_dir is not None else config.out)
    return result


def compare_with_uncorrelated(config, out_dir=None):
    """Paired n(t) for the correlated state and the same cavity state without correlations."""
    if not config.correlated:
        raise ConfigError("state: comparison needs a correlated initial state")
    model, grid = config.model, config.grid
    sol = solve_u(memory_kernel(model, grid), config.omega_c, grid)
    F = compute_F(f_kernel(model, grid), sol)
    spec = config.initial_state
    base = uncorrelated_counterpart(spec)
    n_corr = evolve_observables(sol, correlation_functions(spec, sol, F), spec).n
    n_plain = evolve_observables(sol, correlation_functions(base, sol, F), base).n
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        io.write_comparison(Path(out_dir) / "comparison.csv", grid, n_corr, n_plain)
    return grid, n_corr, n_plain
