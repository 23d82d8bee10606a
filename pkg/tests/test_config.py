import dataclasses

import pytest

from hvac_gbpi.config import (ConfigError, build_env, dump_config, load_config, parse_config, preset, tiny_config,
                              validate)


def test_presets():
    assert build_env(preset(1)).n_actions == 81
    env2 = build_env(preset(2))
    assert env2.n_actions == 25 and env2.n_stages == 48
    assert preset(3).grid.t_in[2] == 1.0
    with pytest.raises(ConfigError):
        preset(4)


def test_dump_parse_round_trip():
    for cfg in (preset(1, 3), preset(2), tiny_config(5)):
        assert parse_config(dump_config(cfg)) == cfg


def test_overrides():
    cfg = parse_config("[experiment]\ncase = 1\nseed = 9\n[learn]\nn_paths = 17\n[price]\nschedule = 0-12:0.1, 12-24:0.4\n")
    assert cfg.case == 1 and cfg.seed == 9 and cfg.learn.n_paths == 17
    assert cfg.grid.flow_levels == 3
    assert cfg.price.schedule == ((0.0, 12.0, 0.1), (12.0, 24.0, 0.4))


@pytest.mark.parametrize("text", [
    "[learn]\nn_pathz = 3\n",
    "[bogus]\nx = 1\n",
    "[experiment]\nfoo = 1\n",
    "[learn]\nn_paths = many\n",
    "[price]\nschedule = 0-9:0.2\n",
    "[sim]\nstart_stage = 40\nn_stages = 20\n",
    "[comfort]\npmv_low = 1\n",
])
def test_rejects_bad_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.ini")
    (tmp_path / "c.ini").write_text("[learn]\nn_paths = 5\n")
    cfg = load_config(tmp_path / "c.ini", case=3, seed=2)
    assert cfg.case == 3 and cfg.seed == 2 and cfg.learn.n_paths == 5


def test_validate_set_temps():
    cfg = preset(2)
    with pytest.raises(ConfigError):
        validate(dataclasses.replace(cfg, grid=dataclasses.replace(cfg.grid, set_temps=(5.0,))))
