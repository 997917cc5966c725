"""Experiment configuration: a flat key-value file (TOML syntax) plus
CLI-flag overrides.

SimConfig is the single source of truth for every run: all commands are
pure functions of (config, master_seed) to output bytes.  emit/parse
round-trip exactly, so the commented header in every CSV is sufficient
to reproduce the file that made it.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import tomli

from .analytics import CodingParams
from .errors import ConfigError
from .geometry import Window
from .netsim import Mode

__all__ = ["SimConfig", "parse_config", "emit_config", "load_config",
           "with_overrides"]


@dataclass(frozen=True)
class SimConfig:
    """Desk-scale defaults: W=20 with 50 realizations runs in minutes.
    Paper-scale studies set window_side=60."""

    intensity: float = 1.0
    alpha: float = 3.0
    k_bits: float = 75.0
    n_max: int = 200
    window_side: float = 20.0
    crofton_c: float = 1.0
    mode: Mode = Mode.RATELESS_ACK
    realizations: int = 50
    fading_trials: int = 1
    master_seed: int = 1
    n_grid: tuple[int, ...] | None = None
    output_dir: str = "out"

    def __post_init__(self) -> None:
        for name in ("intensity", "alpha", "k_bits", "window_side", "crofton_c"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{name} must be a number, got {v!r}")
            object.__setattr__(self, name, float(v))
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {v}")
        if not self.alpha > 2:
            raise ConfigError(f"alpha must exceed 2, got {self.alpha}")
        for name in ("n_max", "realizations", "fading_trials"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if (isinstance(self.master_seed, bool)
                or not isinstance(self.master_seed, int)
                or not 0 <= self.master_seed < 2**64):
            raise ConfigError(
                f"master_seed must be a 64-bit unsigned integer, got"
                f" {self.master_seed!r}")
        if not isinstance(self.mode, Mode):
            raise ConfigError(f"mode must be a Mode, got {self.mode!r}")
        if self.n_grid is not None:
            grid = tuple(self.n_grid)
            for v in grid:
                if isinstance(v, bool) or not isinstance(v, int) \
                        or not 1 <= v <= 10_000:
                    raise ConfigError(
                        f"n_grid entries must be integers in [1, 10000], got {v!r}")
            object.__setattr__(self, "n_grid", grid)
        if not isinstance(self.output_dir, str) or not self.output_dir:
            raise ConfigError("output_dir must be a non-empty string")

    @property
    def window(self) -> Window:
        return Window(self.window_side)

    def coding(self, n_max: float | None = None) -> CodingParams:
        return CodingParams(self.k_bits,
                            float(self.n_max if n_max is None else n_max),
                            self.alpha)


def parse_config(text: str) -> SimConfig:
    """Parse flat TOML-style text into a SimConfig; unknown keys are errors."""
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    known = {f.name for f in fields(SimConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "mode" in raw:
        try:
            raw["mode"] = Mode(raw["mode"])
        except ValueError:
            names = [m.value for m in Mode]
            raise ConfigError(
                f"mode must be one of {names}, got {raw['mode']!r}") from None
    if "n_grid" in raw:
        if not isinstance(raw["n_grid"], list):
            raise ConfigError("n_grid must be an array of integers")
        raw["n_grid"] = tuple(raw["n_grid"])
    return SimConfig(**raw)


def _emit_value(v) -> str:
    if isinstance(v, Mode):
        return f'"{v.value}"'
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, tuple):
        return "[" + ", ".join(str(x) for x in v) + "]"
    return repr(v)


def emit_config(config: SimConfig) -> str:
    """Emit in declaration order; parse(emit(config)) == config."""
    lines = []
    for f in fields(SimConfig):
        v = getattr(config, f.name)
        if v is None:
            continue
        lines.append(f"{f.name} = {_emit_value(v)}")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def with_overrides(config: SimConfig, **overrides) -> SimConfig:
    """Apply non-None overrides; validation reruns via the constructor."""
    clean = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **clean) if clean else config
