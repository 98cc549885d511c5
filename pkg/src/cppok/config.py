"""Experiment configuration files (TOML).

Schema::

    [process]
    k = 2
    lambda = 1.0

    [process.jump]
    law = "exponential"      # "dirac" (point), "discrete" (weights), "exponential" (mu)
    mu = 1.0

    [clock]                  # optional; omit for the plain CPPoK
    type = "mtss"            # or "inverse_mtss"
    c1 = 1.0
    c2 = 0.0
    alpha1 = 0.5
    alpha2 = 0.5
    mu1 = 1.0
    mu2 = 0.0
    step = 0.5               # inverse_mtss only; default is 1% of the expected level

    [monte_carlo]
    replicates = 10000
    seed = 1
    grid = [0.5, 1.0, 2.0]
    workers = 1              # default from $CPPOK_WORKERS
    block_size = 10000

    [output]
    format = "summary"       # "summary" | "paths" | "json"
    path = "out.csv"         # default: stdout
    precision = 17
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .jumps import Dirac, DiscretePmf, Exponential, JumpLaw
from .orderk import OrderKParams
from .stats import MonteCarloConfig, default_workers
from .subordinators import MtssParams
from .timechange import InverseMtssClock, MtssClock

__all__ = ["ConfigError", "OutputSettings", "ExperimentConfig", "load_config", "parse_config", "parse_jump"]

FORMATS = ("summary", "paths", "json")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class OutputSettings:
    format: str = "summary"
    path: str | None = None
    precision: int = 17


@dataclass
class ExperimentConfig:
    params: OrderKParams
    law: JumpLaw
    clock: MtssClock | InverseMtssClock | None
    monte_carlo: MonteCarloConfig | None
    output: OutputSettings
    digest: str


def _get(table, key, field_name, kind=None, default=...):
    if key not in table:
        if default is ...:
            raise ConfigError(f"missing field '{field_name}'")
        return default
    value = table[key]
    if kind is not None:
        try:
            value = kind(value)
        except (TypeError, ValueError):
            raise ConfigError(f"field '{field_name}' must be {kind.__name__}, got {table[key]!r}") from None
    return value


def parse_jump(spec) -> JumpLaw:
    """Jump law from a config table or a ``law:args`` string.

    Strings: ``dirac:1``, ``exponential:2``, ``discrete:0.2,0.5,0.3``.
    """
    if isinstance(spec, str):
        name, _, arg = spec.partition(":")
        table = {"law": name}
        if name == "dirac":
            table["point"] = arg or 1
        elif name == "exponential":
            table["mu"] = arg
        elif name == "discrete":
            table["weights"] = [w for w in arg.split(",") if w]
        spec = table
    law = _get(spec, "law", "process.jump.law", str)
    try:
        if law == "dirac":
            return Dirac(_get(spec, "point", "process.jump.point", float, 1.0))
        if law == "exponential":
            return Exponential(_get(spec, "mu", "process.jump.mu", float))
        if law == "discrete":
            weights = _get(spec, "weights", "process.jump.weights")
            return DiscretePmf([float(w) for w in weights])
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field 'process.jump': {exc}") from None
    raise ConfigError(f"field 'process.jump.law' must be dirac, discrete or exponential, got {law!r}")


def _parse_clock(table):
    kind = _get(table, "type", "clock.type", str)
    if kind not in ("mtss", "inverse_mtss"):
        raise ConfigError(f"field 'clock.type' must be mtss or inverse_mtss, got {kind!r}")
    kw = {}
    for name, default in (("c1", 1.0), ("c2", 0.0), ("alpha1", None), ("alpha2", None), ("mu1", 0.0), ("mu2", 0.0)):
        kw[name] = _get(table, name, f"clock.{name}", float, ... if name == "alpha1" else default)
    if kw["alpha2"] is None:
        kw["alpha2"] = kw["alpha1"]
    try:
        params = MtssParams(**kw)
    except ValueError as exc:
        raise ConfigError(f"field 'clock': {exc}") from None
    if kind == "mtss":
        return MtssClock(params)
    step = _get(table, "step", "clock.step", float, None)
    if step is not None and not step > 0:
        raise ConfigError("field 'clock.step' must be positive")
    return InverseMtssClock(params, step)


def _parse_mc(table):
    grid = _get(table, "grid", "monte_carlo.grid")
    if not isinstance(grid, list) or not grid:
        raise ConfigError("field 'monte_carlo.grid' must be a non-empty list of times")
    try:
        return MonteCarloConfig(
            replicates=_get(table, "replicates", "monte_carlo.replicates", int),
            master_seed=_get(table, "seed", "monte_carlo.seed", int),
            grid=[float(g) for g in grid],
            workers=_get(table, "workers", "monte_carlo.workers", int, default_workers()),
            block_size=_get(table, "block_size", "monte_carlo.block_size", int, 10_000),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"field 'monte_carlo': {exc}") from None


def parse_config(data: dict, require_mc: bool = True) -> ExperimentConfig:
    process = _get(data, "process", "process")
    try:
        params = OrderKParams(_get(process, "k", "process.k", int), _get(process, "lambda", "process.lambda", float))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"field 'process': {exc}") from None
    law = parse_jump(_get(process, "jump", "process.jump"))
    clock = _parse_clock(data["clock"]) if "clock" in data else None
    mc = None
    if "monte_carlo" in data:
        mc = _parse_mc(data["monte_carlo"])
    elif require_mc:
        raise ConfigError("missing field 'monte_carlo'")
    out = data.get("output", {})
    fmt = _get(out, "format", "output.format", str, "summary")
    if fmt not in FORMATS:
        raise ConfigError(f"field 'output.format' must be one of {FORMATS}, got {fmt!r}")
    precision = _get(out, "precision", "output.precision", int, 17)
    if not 1 <= precision <= 17:
        raise ConfigError("field 'output.precision' must lie in 1..17")
    output = OutputSettings(fmt, _get(out, "path", "output.path", str, None), precision)
    return ExperimentConfig(params, law, clock, mc, output, experiment_digest(data))


def experiment_digest(data: dict) -> str:
    """Hash of the config minus fields that cannot change results."""
    clean = json.loads(json.dumps(data))
    clean.get("monte_carlo", {}).pop("workers", None)
    clean.get("output", {}).pop("path", None)
    return hashlib.sha256(json.dumps(clean, sort_keys=True).encode()).hexdigest()


def load_config(path, require_mc: bool = True) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}") from None
    return parse_config(data, require_mc)
