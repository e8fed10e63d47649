"""JSON scenario configuration.

A config holds two covariance matrices, the mixing weight and a scan window::

    {
      "name": "example",
      "dim": 2,
      "c1": {"sigma": 1.0, "rho": 0.0},
      "c2": {"matrix": [[1.0, 0.5], [0.5, 1.0]]},
      "lambda1": 0.5,
      "grid": [{"min": -1, "max": 1, "count": 101},
               {"min": -1, "max": 1, "count": 101}],
      "quadrature_order": 40,
      "phi_variant": "paper",
      "f2_constant": "2pi",
      "seed": 20150101
    }

``sigma``/``rho`` (2x2 only) and ``matrix`` are mutually exclusive per matrix.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

from .entropy import Scenario
from .landscape import DEFAULT_SEED, GridSpec
from .quadrature import DEFAULT_ORDER, MAX_ORDER, MIN_ORDER
from .spd import DomainError, SpdMatrix, spd_from_sigma_rho

PHI_VARIANTS = ("paper", "full")
F2_CONSTANTS = ("2pi", "2pie")


class ConfigError(ValueError):
    """A config document that cannot be turned into a scenario."""

    def __init__(self, message: str, field_path: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field_path:
            where.append(f"field '{field_path}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.field_path = field_path
        self.line = line


@dataclass(frozen=True)
class ScenarioConfig:
    dim: int
    c1: dict
    c2: dict
    lambda1: float
    grid: list
    name: str = "scenario"
    quadrature_order: int = DEFAULT_ORDER
    phi_variant: str = "paper"
    f2_constant: str = "2pi"
    seed: int = DEFAULT_SEED
    expect: dict = field(default_factory=dict)
    note: str = ""

    def scenario(self) -> Scenario:
        return Scenario(_matrix(self.c1, "c1", self.dim), _matrix(self.c2, "c2", self.dim), self.lambda1)

    def grid_spec(self) -> GridSpec:
        return GridSpec(
            tuple((ax["min"], ax["max"]) for ax in self.grid),
            tuple(ax["count"] for ax in self.grid),
        )

    def with_overrides(self, *, order=None, phi_variant=None, f2_constant=None, window_scale=None) -> "ScenarioConfig":
        cfg = self
        if order is not None:
            cfg = replace(cfg, quadrature_order=_check_order(order, "quadrature_order"))
        if phi_variant is not None:
            cfg = replace(cfg, phi_variant=_check_choice(phi_variant, PHI_VARIANTS, "phi_variant"))
        if f2_constant is not None:
            cfg = replace(cfg, f2_constant=_check_choice(f2_constant, F2_CONSTANTS, "f2_constant"))
        if window_scale is not None:
            k = float(window_scale)
            if not k > 0:
                raise ConfigError(f"window scale must be positive, got {window_scale}", "window_scale")
            cfg = replace(cfg, grid=[{**ax, "min": ax["min"] * k, "max": ax["max"] * k} for ax in cfg.grid])
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)


def _matrix(spec: dict, path: str, dim: int) -> SpdMatrix:
    try:
        if "matrix" in spec:
            return SpdMatrix(spec["matrix"])
        return spd_from_sigma_rho(spec["sigma"], spec["rho"])
    except DomainError as exc:
        raise ConfigError(str(exc), path) from exc


def _check_choice(value, choices, path):
    if value not in choices:
        raise ConfigError(f"expected one of {list(choices)}, got {value!r}", path)
    return value


def _check_order(value, path):
    if isinstance(value, bool) or not isinstance(value, int) or not MIN_ORDER <= value <= MAX_ORDER:
        raise ConfigError(f"expected an integer in [{MIN_ORDER}, {MAX_ORDER}], got {value!r}", path)
    return value


def _number(doc: dict, key: str, path: str) -> float:
    if key not in doc:
        raise ConfigError("missing", path)
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", path)
    return float(v)


def _parse_matrix_spec(raw: Any, path: str, dim: int) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("expected an object with 'sigma'/'rho' or 'matrix'", path)
    has_sr = "sigma" in raw or "rho" in raw
    has_m = "matrix" in raw
    if has_sr and has_m:
        raise ConfigError("'sigma'/'rho' and 'matrix' are mutually exclusive", path)
    if has_m:
        rows = raw["matrix"]
        if (
            not isinstance(rows, list)
            or len(rows) != dim
            or any(not isinstance(r, list) or len(r) != dim for r in rows)
        ):
            raise ConfigError(f"expected {dim} rows of {dim} numbers", f"{path}.matrix")
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ConfigError(f"expected a number, got {v!r}", f"{path}.matrix[{i}][{j}]")
        return {"matrix": [[float(v) for v in r] for r in rows]}
    if has_sr:
        if dim != 2:
            raise ConfigError("'sigma'/'rho' form is only defined for dim 2", path)
        return {"sigma": _number(raw, "sigma", f"{path}.sigma"), "rho": _number(raw, "rho", f"{path}.rho")}
    raise ConfigError("expected 'sigma'/'rho' or 'matrix'", path)


def parse_config(doc: Any) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a JSON object")
    if "dim" not in doc:
        raise ConfigError("missing", "dim")
    dim = doc["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or not 1 <= dim <= 3:
        raise ConfigError(f"expected an integer in 1..3, got {dim!r}", "dim")
    for key in ("c1", "c2"):
        if key not in doc:
            raise ConfigError("missing", key)
    c1 = _parse_matrix_spec(doc["c1"], "c1", dim)
    c2 = _parse_matrix_spec(doc["c2"], "c2", dim)
    lam = _number(doc, "lambda1", "lambda1")
    if not 0.0 <= lam <= 1.0:
        raise ConfigError(f"expected a value in [0, 1], got {lam}", "lambda1")
    grid = doc.get("grid")
    if not isinstance(grid, list) or len(grid) != dim:
        raise ConfigError(f"expected a list of {dim} axis objects", "grid")
    axes = []
    for i, ax in enumerate(grid):
        p = f"grid[{i}]"
        if not isinstance(ax, dict):
            raise ConfigError("expected an object with min, max, count", p)
        lo, hi = _number(ax, "min", f"{p}.min"), _number(ax, "max", f"{p}.max")
        if not lo < hi:
            raise ConfigError(f"min {lo} must be below max {hi}", p)
        count = ax.get("count")
        if isinstance(count, bool) or not isinstance(count, int) or count < 3:
            raise ConfigError(f"expected an integer >= 3, got {count!r}", f"{p}.count")
        axes.append({"min": lo, "max": hi, "count": count})
    order = _check_order(doc.get("quadrature_order", DEFAULT_ORDER), "quadrature_order")
    phi_variant = _check_choice(doc.get("phi_variant", "paper"), PHI_VARIANTS, "phi_variant")
    f2_constant = _check_choice(doc.get("f2_constant", "2pi"), F2_CONSTANTS, "f2_constant")
    seed = doc.get("seed", DEFAULT_SEED)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"expected a nonnegative integer, got {seed!r}", "seed")
    expect = doc.get("expect", {})
    if not isinstance(expect, dict):
        raise ConfigError("expected an object", "expect")
    cfg = ScenarioConfig(
        dim=dim,
        c1=c1,
        c2=c2,
        lambda1=lam,
        grid=axes,
        name=str(doc.get("name", "scenario")),
        quadrature_order=order,
        phi_variant=phi_variant,
        f2_constant=f2_constant,
        seed=seed,
        expect=expect,
        note=str(doc.get("note", "")),
    )
    # surface matrix and grid-guard problems as config errors
    cfg.scenario()
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    """Read and validate a config file. I/O problems propagate as ``OSError``."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from exc
    return parse_config(doc)
