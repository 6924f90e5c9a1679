import json
import math

import pytest

from timingloop.harness.config import (REQUIRED_FIELDS, SEED_ENV, ConfigError, ExperimentConfig,
                                       coerce_field, config_from_dict, default_seed, load_config,
                                       save_config)


def test_defaults_match_numerical_example():
    c = ExperimentConfig(seed=0)
    assert (c.a, c.mean_d, c.eta, c.K, c.horizon, c.success_step) == (1.2, 2.0, 0.09, 0.4, 250, 250)
    assert c.capacity_bits == pytest.approx(1.2 * math.log2(1.2))
    assert c.success_threshold == 0.05 and c.runs == 500


def test_round_trip(tmp_path):
    c = ExperimentConfig(seed=3, eta=math.inf, n_grid=[2, 4], error_behavior="opposite_control")
    path = tmp_path / "c.json"
    save_config(c, path)
    assert load_config(path) == c


def test_missing_required_field(tmp_path):
    data = ExperimentConfig(seed=0).to_dict()
    del data["eta"]
    path = tmp_path / "c.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ConfigError, match="eta"):
        load_config(path)


def test_parse_error_has_line_and_column(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{\n  "a": 1.2,\n  "K" 0.4\n}\n')
    with pytest.raises(ConfigError, match=r"line 3, column 7"):
        load_config(path)


def test_not_an_object(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(path)


@pytest.mark.parametrize("field,value", [("horizon", 100), ("runs", 0), ("mean_d", 0.5),
                                         ("eta", -1.0), ("mode", "fancy"),
                                         ("error_behavior", "panic"), ("n_grid", [0])])
def test_invariants(field, value):
    with pytest.raises(ConfigError, match=field):
        ExperimentConfig(seed=0, **{field: value}) if field != "horizon" else \
            ExperimentConfig(seed=0, horizon=value, success_step=250)


def test_unknown_field():
    data = {k: getattr(ExperimentConfig(seed=0), k) for k in REQUIRED_FIELDS}
    data["colour"] = "red"
    with pytest.raises(ConfigError, match="colour"):
        config_from_dict(data)


def test_coercion():
    assert coerce_field("horizon", "30") == 30
    assert coerce_field("hold_input", "true") is True
    assert coerce_field("n_grid", "1,2,3") == [1, 2, 3]
    assert coerce_field("epsilons", "0.1,0.2") == [0.1, 0.2]
    with pytest.raises(ConfigError, match="horizon"):
        coerce_field("horizon", "2.5")
    with pytest.raises(ConfigError, match="a"):
        coerce_field("a", "fast")


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv(SEED_ENV, "42")
    assert default_seed() == 42
    assert ExperimentConfig().seed == 42
    monkeypatch.setenv(SEED_ENV, "x")
    with pytest.raises(ConfigError):
        default_seed()
    monkeypatch.delenv(SEED_ENV)
    assert ExperimentConfig().seed == 0


def test_shipped_config_is_the_default(tmp_path):
    from pathlib import Path
    shipped = load_config(Path(__file__).parent.parent / "configs" / "closed_loop.json")
    assert shipped.replace(n_grid=ExperimentConfig(seed=0).n_grid) == ExperimentConfig(seed=0)
