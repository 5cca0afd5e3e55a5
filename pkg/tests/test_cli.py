import logging
from pathlib import Path

import pytest

from bergman_tent import load_configs, main, parse_override
from bergman_tent.experiments import EXPERIMENTS, Experiment
from bergman_tent.experiments.model import CounterexampleConfig, TentEquivalenceConfig
from bergman_tent.utils import ConfigError

DESK = Path(__file__).parent.parent / "desk.toml"

SMALL_COUNTEREXAMPLE = """
[defaults]
seed = 3
gamma = [1.0]

[counterexample_check]
points = [[0.5, 0.0]]
eps_exponents = [8, 10, 12]
segments = 8
check_convergence = false
"""


@pytest.fixture
def small_config(tmp_path: Path) -> Path:
    path = tmp_path / "small.toml"
    path.write_text(SMALL_COUNTEREXAMPLE)
    return path


def test_oracle_table(capsys):
    assert main(["oracle"]) == 0
    out = capsys.readouterr().out
    assert "tau_disc_volume(gamma=1, n=1)" in out
    assert "1.3810978" in out


def test_list_shows_every_experiment(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "tent_equivalence:" in out
    assert "atomic_bound_check:" in out
    assert "eps_exponents" in out


def test_validate_desk_config(capsys):
    assert main(["validate", "--config", str(DESK)]) == 0
    out = capsys.readouterr().out
    assert "tent_equivalence:" in out and "cells ok" in out


def test_validate_reports_violations(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text("[tent_equivalence]\np = [1.0]\nb = 1.5\n")
    assert main(["validate", "--config", str(path)]) == 1
    assert "violates b > n*max(1, 1/p) + (alpha+1)/p" in capsys.readouterr().out


def test_validate_empty_grid(tmp_path, capsys):
    path = tmp_path / "empty.toml"
    path.write_text("[tent_equivalence]\nn = []\n")
    assert main(["validate", "--config", str(path)]) == 1
    assert "tent_equivalence: no cells" in capsys.readouterr().out


def test_unknown_override_key_is_an_error(caplog):
    with caplog.at_level(logging.ERROR):
        code = main(["validate", "--experiment", "tent_equivalence", "--override", "gama=1.0"])
    assert code == 1
    assert "gama" in caplog.text
    assert "gamma" in caplog.text


def test_run_counterexample_end_to_end(small_config, tmp_path):
    out = tmp_path / "out"
    code = main(["run", "--config", str(small_config), "--out", str(out), "--seed", "7"])
    assert code == 0

    csv_lines = (out / "counterexample_check.csv").read_text().splitlines()
    assert csv_lines[0] == "# bergman-tent seed=7 experiment=counterexample_check"
    assert csv_lines[1] == "experiment,cell,function,metric,value,converged,regime"
    assert any(",divergence_slope," in line for line in csv_lines[2:])

    summary = (out / "counterexample_check.summary.txt").read_text()
    assert summary.startswith("# bergman-tent seed=7 experiment=counterexample_check")
    assert "Overall: PASS" in summary


def test_load_configs_filters_defaults(small_config):
    configs = load_configs(small_config, [])
    config = configs["counterexample_check"]
    assert isinstance(config, CounterexampleConfig)
    # gamma is not a counterexample key and is dropped from the defaults
    assert config.seed == 3
    assert config.points == [(0.5 + 0j, 0j)]


def test_load_configs_overrides_and_seed(small_config):
    configs = load_configs(
        small_config,
        ["tent_equivalence"],
        overrides=["resolution.segments=4", "gamma=[2.0]"],
        seed=11,
    )
    config = configs["tent_equivalence"]
    assert isinstance(config, TentEquivalenceConfig)
    assert config.resolution.segments == 4
    assert config.resolution.radial == TentEquivalenceConfig().resolution.radial
    assert config.gamma == [2.0]
    assert config.seed == 11


def test_load_configs_rejects_unknown_experiments(tmp_path):
    with pytest.raises(ConfigError):
        load_configs(None, ["tent"])
    path = tmp_path / "typo.toml"
    path.write_text("[tent]\nn = [1]\n")
    with pytest.raises(ConfigError):
        load_configs(path, [])
    with pytest.raises(ConfigError):
        load_configs(tmp_path / "missing.toml", [])
    with pytest.raises(ConfigError):
        load_configs(None, [])


def test_parse_override():
    assert parse_override("resolution.radial=12") == {"resolution": {"radial": 12}}
    assert parse_override("hardy=false") == {"hardy": False}
    assert parse_override("name=word") == {"name": "word"}
    with pytest.raises(ConfigError):
        parse_override("no-equals")


def test_failed_verdict_exits_with_two(tmp_path):
    path = tmp_path / "strict.toml"
    path.write_text(SMALL_COUNTEREXAMPLE + "slope_tol = 1e-9\n")
    out = tmp_path / "out"
    assert main(["run", "--config", str(path), "--out", str(out)]) == 2
    assert "Overall: FAIL" in (out / "counterexample_check.summary.txt").read_text()
    assert (out / "counterexample_check.csv").exists()


def test_misspelled_default_key_is_an_error(tmp_path, caplog):
    path = tmp_path / "typo.toml"
    path.write_text("[defaults]\ngama = [1.0]\n\n[tent_equivalence]\nn = [1]\n")
    with pytest.raises(ConfigError, match="gama"):
        load_configs(path, [])
    with caplog.at_level(logging.ERROR):
        assert main(["validate", "--config", str(path)]) == 1
    assert "gama" in caplog.text
    assert "gamma" in caplog.text


def test_desk_defaults_work_for_a_single_experiment():
    configs = load_configs(DESK, ["counterexample_check"])
    assert list(configs) == ["counterexample_check"]


def test_run_refuses_a_violating_grid(tmp_path, caplog):
    path = tmp_path / "bad.toml"
    path.write_text("[tent_equivalence]\np = [1.0]\nb = 1.5\n")
    out = tmp_path / "out"
    with caplog.at_level(logging.ERROR):
        assert main(["run", "--config", str(path), "--out", str(out)]) == 1
    assert "violates b > n*max(1, 1/p) + (alpha+1)/p" in caplog.text
    assert not (out / "tent_equivalence.csv").exists()


def test_cell_errors_exit_with_one(small_config, tmp_path, monkeypatch, caplog):
    def failing_work():
        raise ValueError("bad point")

    monkeypatch.setitem(
        EXPERIMENTS, "counterexample_check", Experiment(CounterexampleConfig, lambda config: [("z=bad", failing_work)])
    )
    with caplog.at_level(logging.ERROR):
        code = main(["run", "--config", str(small_config), "--out", str(tmp_path / "out")])
    assert code == 1
    assert "z=bad" in caplog.text
    assert "ValueError: bad point" in caplog.text
