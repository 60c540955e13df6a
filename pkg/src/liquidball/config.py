"""Scenario configuration: JSON file with flat sections, validated
against the physical admissibility ranges at parse time.

Violations are rejected with the violated assumption named in plain
language (sound-speed bound, liquid boundary condition, trap strength,
grid size), so a bad run never starts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict


class ConfigError(ValueError):
    """Configuration file is malformed or inadmissible."""


VALID_SCENARIOS = ("static", "oscillate", "wave")
VALID_CHARTS = ("minkowski", "trap")
VALID_GRIDS = ("radial",)


@dataclass
class ScenarioConfig:
    chart_type: str = "minkowski"
    chart_k: float = 0.0
    eos_c2: float = 1.0
    eos_eps0: float = 1.0
    eos_A: float = 1.0
    grid_kind: str = "radial"
    grid_n: int = 200
    grid_h: float = 0.005
    init_amplitude: float = 1e-3
    init_mode: int = 1
    time_dt: float | None = None
    time_t_end: float = 2.0
    scenario: str = "static"
    suites: tuple = ("all",)
    seed: int = 0xE57
    out: str = "out"

    @property
    def radius(self) -> float:
        return self.grid_n * self.grid_h

    def echo(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


_SECTIONS = {
    "chart": {"type": "chart_type", "k": "chart_k"},
    "eos": {"c2": "eos_c2", "eps0": "eos_eps0", "A": "eos_A"},
    "grid": {"kind": "grid_kind", "n": "grid_n", "h": "grid_h"},
    "init": {"amplitude": "init_amplitude", "mode": "init_mode"},
    "time": {"dt": "time_dt", "t_end": "time_t_end"},
}
_TOP_KEYS = ("scenario", "suites", "seed", "out")


def parse_config(data: dict) -> ScenarioConfig:
    cfg = ScenarioConfig()
    for section, keys in _SECTIONS.items():
        block = data.get(section, {})
        if not isinstance(block, dict):
            raise ConfigError(f"section {section!r} must be an object")
        for k in block:
            if k not in keys:
                raise ConfigError(f"unknown key {section}.{k}")
            setattr(cfg, keys[k], block[k])
    for k in data:
        if k not in _SECTIONS and k not in _TOP_KEYS:
            raise ConfigError(f"unknown key {k!r}")
    for k in _TOP_KEYS:
        if k in data:
            setattr(cfg, k, tuple(data[k]) if k == "suites" else data[k])
    validate_config(cfg)
    return cfg


def validate_config(cfg: ScenarioConfig):
    if cfg.chart_type not in VALID_CHARTS:
        raise ConfigError(f"chart.type must be one of {VALID_CHARTS}, got {cfg.chart_type!r}")
    if cfg.chart_k < 0:
        raise ConfigError(f"trap-strength bound violated: chart.k >= 0 required, got {cfg.chart_k}")
    if not 0.0 < cfg.eos_c2 <= 1.0:
        raise ConfigError("sound-speed bound violated: need 0 < eos.c2 <= 1 "
                          f"(sound no faster than light), got {cfg.eos_c2}")
    if cfg.eos_eps0 <= 0:
        raise ConfigError("liquid boundary condition violated: eos.eps0 > 0 "
                          f"required, got {cfg.eos_eps0}")
    if cfg.eos_A <= 0:
        raise ConfigError(f"eos.A must be positive, got {cfg.eos_A}")
    if cfg.grid_kind not in VALID_GRIDS:
        raise ConfigError(f"grid.kind must be one of {VALID_GRIDS}, got {cfg.grid_kind!r}")
    if cfg.grid_n < 8:
        raise ConfigError(f"grid too small: grid.n >= 8 required, got {cfg.grid_n}")
    if cfg.grid_h <= 0:
        raise ConfigError(f"grid.h must be positive, got {cfg.grid_h}")
    if cfg.init_amplitude < 0:
        raise ConfigError(f"init.amplitude must be >= 0, got {cfg.init_amplitude}")
    if cfg.init_mode < 1:
        raise ConfigError(f"init.mode must be >= 1, got {cfg.init_mode}")
    if cfg.time_dt is not None and cfg.time_dt <= 0:
        raise ConfigError(f"time.dt must be positive, got {cfg.time_dt}")
    if cfg.time_t_end <= 0:
        raise ConfigError(f"time.t_end must be positive, got {cfg.time_t_end}")
    if cfg.scenario not in VALID_SCENARIOS:
        raise ConfigError(f"scenario must be one of {VALID_SCENARIOS}, got {cfg.scenario!r}")
    if not isinstance(cfg.seed, int) or cfg.seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {cfg.seed!r}")


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error in {path}, line {exc.lineno}: "
                          f"{exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(data)
