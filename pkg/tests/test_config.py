import json

import pytest

from wkfi.config import ConfigError, load_config, parse_config


def base():
    return {
        "dim": 2,
        "c1": {"sigma": 1.0, "rho": 0.0},
        "c2": {"matrix": [[1.0, 0.5], [0.5, 1.0]]},
        "lambda1": 0.5,
        "grid": [{"min": -1, "max": 1, "count": 11}, {"min": -1, "max": 1, "count": 11}],
    }


def test_defaults():
    cfg = parse_config(base())
    assert cfg.quadrature_order == 40
    assert cfg.phi_variant == "paper"
    assert cfg.f2_constant == "2pi"
    assert cfg.scenario().dim == 2
    assert cfg.grid_spec().resolution == (11, 11)


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"dim": 4}, "dim"),
        ({"lambda1": 1.5}, "lambda1"),
        ({"lambda1": "half"}, "lambda1"),
        ({"c1": {"sigma": 1.0, "rho": 0.0, "matrix": [[1, 0], [0, 1]]}}, "c1"),
        ({"c1": {"sigma": 1.0, "rho": 1.0}}, "c1"),
        ({"c2": {"matrix": [[1.0, 0.5]]}}, "c2.matrix"),
        ({"c2": {"matrix": [[1.0, "x"], [0.5, 1.0]]}}, "c2.matrix[0][1]"),
        ({"grid": [{"min": -1, "max": 1, "count": 11}]}, "grid"),
        ({"grid": [{"min": 1, "max": -1, "count": 11}] * 2}, "grid[0]"),
        ({"grid": [{"min": -1, "max": 1, "count": 2}] * 2}, "grid[0].count"),
        ({"quadrature_order": 65}, "quadrature_order"),
        ({"phi_variant": "exact"}, "phi_variant"),
        ({"f2_constant": "e"}, "f2_constant"),
        ({"seed": -1}, "seed"),
    ],
)
def test_field_errors(patch, field):
    doc = {**base(), **patch}
    with pytest.raises(ConfigError) as err:
        parse_config(doc)
    assert err.value.field_path == field
    assert field in str(err.value)


def test_missing_key():
    doc = base()
    del doc["c2"]
    with pytest.raises(ConfigError, match="c2"):
        parse_config(doc)


def test_json_error_has_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "dim": 2,\n  oops\n}\n')
    with pytest.raises(ConfigError) as err:
        load_config(p)
    assert err.value.line == 3


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "absent.json")


def test_overrides():
    cfg = parse_config(base()).with_overrides(order=48, phi_variant="full", f2_constant="2pie", window_scale=2.0)
    assert (cfg.quadrature_order, cfg.phi_variant, cfg.f2_constant) == (48, "full", "2pie")
    assert cfg.grid[0]["min"] == -2.0 and cfg.grid[1]["max"] == 2.0
    with pytest.raises(ConfigError):
        cfg.with_overrides(window_scale=0.0)


def test_round_trip_through_dict():
    cfg = parse_config(base())
    assert parse_config(json.loads(json.dumps(cfg.to_dict()))) == cfg
