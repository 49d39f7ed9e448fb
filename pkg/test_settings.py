import inspect
import os
import subprocess
import sys
from pathlib import Path

import pytest

from config.settings import ConfigError, RunConfig, load_config, save_config
from counterexample import verify_obstruction


def test_missing_file_gives_empty_mapping(tmp_path):
    assert load_config(tmp_path / "absent.conf") == {}


def test_key_value_file(tmp_path):
    path = tmp_path / "symdisc.conf"
    path.write_text("# defaults for the lab machine\nn = 4\n\ntrials = 50  # quick\nabs_eps=1e-12\n")
    assert load_config(path) == {"n": "4", "trials": "50", "abs_eps": "1e-12"}
    cfg = RunConfig().merged(load_config(path))
    assert cfg.n == 4
    assert cfg.trials == 50
    assert cfg.abs_eps == 1e-12


def test_unknown_key_reports_line(tmp_path):
    path = tmp_path / "symdisc.conf"
    path.write_text("n = 4\ntrails = 50\n")
    with pytest.raises(ConfigError) as exc:
        load_config(path)
    assert exc.value.line == 2
    assert str(exc.value) == "line 2: unknown key 'trails'"


def test_line_without_equals(tmp_path):
    path = tmp_path / "symdisc.conf"
    path.write_text("depth 8\n")
    with pytest.raises(ConfigError) as exc:
        load_config(path)
    assert exc.value.line == 1


def test_json_config(tmp_path):
    path = tmp_path / "symdisc.json"
    path.write_text('{"depth": 4, "eta": 0.5}')
    assert load_config(path) == {"depth": 4, "eta": 0.5}
    path.write_text('{"depth": 4, "colour": 1}')
    with pytest.raises(ConfigError, match="colour"):
        load_config(path)
    path.write_text('{"depth": }')
    with pytest.raises(ConfigError) as exc:
        load_config(path)
    assert exc.value.line == 1


def test_merged_skips_none_and_coerces():
    base = RunConfig(n=5)
    cfg = base.merged({"n": None, "depth": "3", "out": 7})
    assert cfg.n == 5
    assert cfg.depth == 3
    assert cfg.out == "7"
    with pytest.raises(ConfigError):
        base.merged({"depth": "deep"})
    with pytest.raises(ConfigError):
        base.merged({"colour": 1})


def test_later_layers_win():
    file_values = {"trials": 10, "n": 4}
    cli_values = {"trials": 99, "n": None}
    cfg = RunConfig().merged(file_values).merged(cli_values)
    assert (cfg.trials, cfg.n) == (99, 4)


@pytest.mark.parametrize(
    "changes",
    [
        {"alpha_angles": 8},
        {"beta_grid": 4},
        {"z_grid": 2},
        {"depth": 1},
        {"n": 1},
        {"eta": 0.0},
        {"band": -1.0},
        {"output": "xml"},
        {"command": "draw"},
    ],
)
def test_validate_rejects(changes):
    with pytest.raises(ConfigError):
        RunConfig(**changes).validate()


def test_validate_accepts_defaults():
    cfg = RunConfig()
    assert cfg.validate() is cfg
    assert cfg.tolerance.abs_eps == 1e-10


def test_save_and_load_round_trip(tmp_path):
    path = tmp_path / "saved.json"
    cfg = RunConfig(command="counterexample", n=4, depth=3, out="result.json")
    save_config(cfg, path)
    assert RunConfig().merged(load_config(path)) == cfg


def test_seed_from_environment():
    env = {**os.environ, "SYMDISC_SEED": "7"}
    result = subprocess.run(
        [sys.executable, "-c", "from config.settings import DEFAULT_SEED; print(DEFAULT_SEED)"],
        capture_output=True,
        text=True,
        env=env,
        cwd=Path(__file__).parent,
    )
    assert result.returncode == 0, result.stderr
    assert result.stdout.strip() == "7"


def test_sampling_defaults_match_the_counterexample_run():
    params = inspect.signature(verify_obstruction).parameters
    cfg = RunConfig()
    assert cfg.trials == params["vn_trials"].default == 1000
    assert cfg.degree == params["vn_degree"].default == 6
    assert cfg.torus_grid == params["torus_grid"].default == 48
    assert cfg.max_torus_points == params["max_torus_points"].default
