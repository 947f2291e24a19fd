import pytest

from cavitycorr import cli
from cavitycorr.errors import StepRejectedError


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("preset = fig2a\nwhatever = 3\n")
    assert cli.main(["--config", str(cfg)]) == cli.EXIT_CONFIG
    assert "bad.cfg:2" in capsys.readouterr().err


def test_nothing_to_run_is_config_error():
    assert cli.main([]) == cli.EXIT_CONFIG


def test_config_and_preset_exclusive(tmp_path):
    cfg = tmp_path / "ok.cfg"
    cfg.write_text("preset = fig2a\n")
    assert cli.main(["--config", str(cfg), "--preset", "fig2a"]) == cli.EXIT_CONFIG


def test_clean_run_exits_zero(tmp_path, capsys):
    out = tmp_path / "run"
    code = cli.main(["--preset", "fig3a", "--dt", "0.2", "--tmax", "200", "--no-fock", "--out", str(out)])
    assert code == cli.EXIT_OK
    assert (out / "report.txt").exists()
    assert "all checks passed" in capsys.readouterr().out


def test_breach_exits_two(tmp_path):
    # the truncated Fock validator cannot follow the squeezed preset
    code = cli.main(["--preset", "fig2a", "--dt", "0.2", "--tmax", "60", "--no-oracle", "--out", str(tmp_path)])
    assert code == cli.EXIT_VALIDATION
    assert "BREACH" in (tmp_path / "report.txt").read_text()


def test_validity_window_exits_three(tmp_path):
    cfg = tmp_path / "short.cfg"
    cfg.write_text("preset = fig3a\noracle_N = 10\nt_max = 200\ndt = 0.2\nrun_fock = off\n")
    assert cli.main(["--config", str(cfg), "--out", str(tmp_path / "o")]) == cli.EXIT_NUMERICAL


def test_numerical_error_exits_three(tmp_path, monkeypatch):
    def boom(cfg, out):
        raise StepRejectedError(7, 2.0, 1.5)

    monkeypatch.setattr(cli, "run_scenario", boom)
    assert cli.main(["--preset", "fig2a", "--out", str(tmp_path)]) == cli.EXIT_NUMERICAL


def test_batch_writes_one_directory_per_preset(tmp_path):
    code = cli.main(["--preset", "fig3a", "--preset", "fig3b", "--dt", "0.2", "--tmax", "100",
                     "--no-fock", "--no-oracle", "--out", str(tmp_path), "--jobs", "2"])
    assert code == cli.EXIT_OK
    assert (tmp_path / "fig3a" / "observables.csv").exists()
    assert (tmp_path / "fig3b" / "observables.csv").exists()


def test_unknown_preset_is_config_error(tmp_path):
    assert cli.main(["--preset", "fig7", "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_help_exits_cleanly():
    with pytest.raises(SystemExit) as info:
        cli.main(["--help"])
    assert info.value.code == 0
