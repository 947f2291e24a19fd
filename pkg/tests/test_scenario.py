import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavitycorr import io
from cavitycorr.errors import ConfigError
from cavitycorr.reservoir import TimeGrid
from cavitycorr.scenario import (
    DEFAULT_DT,
    ScenarioConfig,
    _angle,
    compare_with_uncorrelated,
    compute_scenario,
    load_config,
    parse_config_text,
    preset,
    run_scenario,
)


def test_presets():
    c = preset("fig2b")
    assert (c.state, c.eta, c.r_s, c.theta_s, c.dt) == ("squeezed", 1.2, 1.0, 0.0, DEFAULT_DT)
    assert c.fock_cutoff == 30
    c = preset("fig3c")
    assert (c.state, c.eta, c.nbar_a, c.nbar_b1) == ("beamsplitter", 2.0, 6.0, 0.0)
    assert c.vartheta == pytest.approx(math.pi / 2)
    assert c.fock_cutoff == 60
    with pytest.raises(ConfigError):
        preset("fig9")


def test_validation_names_field():
    with pytest.raises(ConfigError, match="dt"):
        ScenarioConfig(dt=-0.1)
    with pytest.raises(ConfigError, match="state"):
        ScenarioConfig(state="coherent")
    with pytest.raises(ConfigError, match="r_s"):
        ScenarioConfig(r_s=-1.0)


def test_parse_config_text_and_preset_override():
    text = "# a comment\npreset = fig2a\n\neta = 1.5   # override\ntheta_s = pi/2\nrun_fock = no\n"
    values = parse_config_text(text)
    assert values == {"preset": "fig2a", "eta": 1.5, "theta_s": pytest.approx(math.pi / 2), "run_fock": False}


@pytest.mark.parametrize("text, line, needle", [
    ("eta = 1\nbogus = 2\n", 2, "unknown field"),
    ("eta 1\n", 1, "key = value"),
    ("\n\ndt = fast\n", 3, "dt"),
    ("eta = 1\neta = 2\n", 2, "twice"),
    ("run_oracle = maybe\n", 1, "boolean"),
])
def test_parse_errors_carry_line_numbers(text, line, needle):
    with pytest.raises(ConfigError, match=f"cfg:{line}:.*{needle}"):
        parse_config_text(text, "cfg")


def test_load_config(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("preset = fig3a\nt_max = 100\n")
    c = load_config(p, {"dt": 0.2})
    assert (c.state, c.eta, c.t_max, c.dt) == ("beamsplitter", 0.4, 100.0, 0.2)
    p.write_text("preset = fig3a\nt_max = -5\n")
    with pytest.raises(ConfigError, match="t_max"):
        load_config(p)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


@pytest.mark.parametrize("text, value", [
    ("pi", math.pi), ("-pi", -math.pi), ("pi/2", math.pi / 2), ("0.5*pi", math.pi / 2),
    ("2pi/3", 2 * math.pi / 3), ("0.25", 0.25),
])
def test_angle_parsing(text, value):
    assert _angle(text) == pytest.approx(value)


@given(st.floats(-10, 10, allow_nan=False))
def test_angle_plain_numbers(x):
    assert _angle(repr(x)) == x


def test_short_run_writes_all_outputs(tmp_path):
    cfg = preset("fig3a", dt=0.2, t_max=200, run_fock=False)
    result = run_scenario(cfg, tmp_path)
    assert result.passed
    for name in ("kernel.csv", "u.csv", "correlations.csv", "observables.csv", "coefficients.csv",
                 "oracle.csv", "comparison.csv", "plot.gp", "report.txt"):
        assert (tmp_path / name).exists(), name
    obs = io.read_csv(tmp_path / "observables.csv")
    assert list(obs) == list(io.OBSERVABLE_COLUMNS)
    assert len(obs["t"]) == 1001
    np.testing.assert_allclose(obs["n"], result.traj.n, rtol=1e-11)
    report = (tmp_path / "report.txt").read_text()
    assert "tolerance breaches: 0" in report and "eta = 0.4" in report


def test_outputs_are_deterministic(tmp_path):
    cfg = preset("fig2c", dt=0.2, t_max=150, run_fock=False)
    run_scenario(cfg, tmp_path / "a")
    run_scenario(cfg, tmp_path / "b")
    for name in ("u.csv", "correlations.csv", "observables.csv", "coefficients.csv", "oracle.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_fock_breach_recorded_not_raised():
    result = compute_scenario(preset("fig2a", dt=0.2, t_max=60, run_oracle=False))
    fock = [c for c in result.checks if c.name == "Fock round trip"][0]
    assert not fock.passed
    assert not result.passed


def test_thermal_custom_scenario():
    cfg = ScenarioConfig(state="thermal", eta=0.4, occupation=0.3, n0=1.0, dt=0.2, t_max=200, fock_nmax=20)
    result = compute_scenario(cfg)
    assert result.passed, [c for c in result.checks if not c.passed]
    assert result.comparison is None


def test_compare_with_uncorrelated(tmp_path):
    grid, n_corr, n_plain = compare_with_uncorrelated(preset("fig3c", dt=0.2, t_max=100), tmp_path)
    assert isinstance(grid, TimeGrid)
    assert n_corr[0] == n_plain[0] == pytest.approx(3.0)
    assert np.max(np.abs(n_corr - n_plain)) > 0.1
    data = io.read_csv(tmp_path / "comparison.csv")
    np.testing.assert_allclose(data["difference"], n_corr - n_plain, atol=1e-11)
    with pytest.raises(ConfigError):
        compare_with_uncorrelated(ScenarioConfig(state="thermal"))
