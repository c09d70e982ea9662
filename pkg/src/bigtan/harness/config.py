"""Run configuration: a YAML file plus command-line overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..errors import ArgumentError, ConfigError
from ..finsler import FAMILIES, FinslerStructure
from ..legendre import CartanDual, SolverSettings

FORMATS = ("json", "text")
_TOP_KEYS = {"metric", "dim", "samples", "seed", "tolerances", "only", "report", "format", "solver"}
_METRIC_KEYS = {"family", "epsilon", "b"}
_SOLVER_KEYS = {f.name for f in dataclasses.fields(SolverSettings)}


@dataclass
class RunConfig:
    family: str = "euclidean"
    dim: int = 2
    epsilon: float = 0.1
    b: tuple[float, ...] = ()
    samples: int = 100
    seed: int = 0
    tolerances: dict[str, float] = field(default_factory=dict)
    only: list[str] = field(default_factory=list)
    report: str | None = None
    format: str = "json"
    solver: dict[str, float] = field(default_factory=dict)

    def validate(self, known_checks=None) -> "RunConfig":
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown metric family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if not isinstance(self.dim, int) or self.dim < 2:
            raise ConfigError(f"dim must be an integer >= 2, got {self.dim!r}")
        if not isinstance(self.samples, int) or self.samples < 1:
            raise ConfigError(f"samples must be an integer >= 1, got {self.samples!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit non-negative integer, got {self.seed!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        unknown = set(self.solver) - _SOLVER_KEYS
        if unknown:
            raise ConfigError(f"unknown solver settings: {sorted(unknown)}")
        if known_checks is not None:
            bad = [n for n in list(self.only) + list(self.tolerances) if n not in known_checks]
            if bad:
                raise ConfigError(f"unknown check names: {', '.join(sorted(set(bad)))}")
        for name, tol in self.tolerances.items():
            if not isinstance(tol, (int, float)) or tol < 0:
                raise ConfigError(f"tolerance for {name} must be a non-negative number")
        try:
            self.structure()
        except ArgumentError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def structure(self) -> FinslerStructure:
        return FinslerStructure(self.family, self.dim, epsilon=self.epsilon, b=tuple(self.b))

    def dual(self) -> CartanDual:
        return CartanDual(self.structure(), SolverSettings(**self.solver))

    def echo(self) -> dict:
        s = self.structure()
        return {
            "family": self.family,
            "dim": self.dim,
            "epsilon": self.epsilon if self.family == "riemannian_conformal" else None,
            "b": list(s.b) if self.family == "randers" else None,
            "samples": self.samples,
            "seed": self.seed,
            "tolerances": dict(sorted(self.tolerances.items())),
            "only": list(self.only),
            "solver": dataclasses.asdict(SolverSettings(**self.solver)),
        }


def _expect_mapping(obj, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a mapping")
    return obj


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    return config_from_mapping(raw)


def config_from_mapping(raw: dict) -> RunConfig:
    raw = _expect_mapping(raw, "config")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig()
    metric = raw.get("metric", {})
    if isinstance(metric, str):
        metric = {"family": metric}
    metric = _expect_mapping(metric, "metric")
    bad = set(metric) - _METRIC_KEYS
    if bad:
        raise ConfigError(f"unknown metric keys: {sorted(bad)}")
    cfg.family = metric.get("family", cfg.family)
    cfg.epsilon = float(metric.get("epsilon", cfg.epsilon))
    cfg.b = tuple(float(v) for v in metric.get("b", ()))
    for key in ("dim", "samples", "seed"):
        if key in raw:
            setattr(cfg, key, raw[key])
    cfg.tolerances = {str(k): float(v) for k, v in _expect_mapping(raw.get("tolerances", {}), "tolerances").items()}
    only = raw.get("only", [])
    cfg.only = [only] if isinstance(only, str) else [str(v) for v in only]
    cfg.report = raw.get("report")
    cfg.format = raw.get("format", cfg.format)
    cfg.solver = dict(_expect_mapping(raw.get("solver", {}), "solver"))
    return cfg


def parse_tolerance(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise ConfigError(f"tolerance override must look like name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError as exc:
        raise ConfigError(f"tolerance value for {name} is not a number: {value!r}") from exc
