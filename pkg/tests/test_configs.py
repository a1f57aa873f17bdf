import json
import logging
import pytest
from calderon.utils.configs import (
    get_logger,
    load_config,
    override_config,
    read_key_value_file,
    try_literal_eval,
)
from calderon.utils.data import read_json, write_json


def test_get_logger_attaches_one_handler():
    logger = get_logger("calderon.test_configs")
    try:
        again = get_logger("calderon.test_configs")
        assert again is logger
        assert len(logger.handlers) == 1
        assert logger.level == logging.INFO
    finally:
        for handler in list(logger.handlers):
            logger.removeHandler(handler)


@pytest.mark.parametrize(
    "raw, expected",
    [("[8, 16]", [8, 16]), ("0.5", 0.5), ("null", None), ("true", True), ("false", False), ("lapack", "lapack")],
)
def test_try_literal_eval(raw, expected):
    assert try_literal_eval(raw) == expected


def test_override_config():
    config, _ = load_config()
    override_config(config, ["SEED", "11", "SVD_BACKEND", "lapack"])
    assert config["params"]["SEED"] == 11
    assert config["params"]["SVD_BACKEND"] == "lapack"
    with pytest.raises(KeyError):
        override_config(config, ["NOT_A_KEY", "1"])
    with pytest.raises(ValueError):
        override_config(config, ["SEED"])


def test_read_key_value_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\n\nSEED = 3\nWEAK_TYPE_SIZES=[4, 8]\n")
    assert read_key_value_file(str(path)) == ["SEED", "3", "WEAK_TYPE_SIZES", "[4, 8]"]
    path.write_text("SEED 3\n")
    with pytest.raises(ValueError, match="run.cfg:1"):
        read_key_value_file(str(path))


def test_write_json_keeps_full_precision(tmp_path):
    path = tmp_path / "out.json"
    value = 0.1 + 0.2
    write_json({"x": value, "n": 3}, str(path))
    assert read_json(str(path)) == {"x": value, "n": 3}
    assert json.loads(path.read_text())["x"] == value
    assert path.read_text().endswith("\n")
