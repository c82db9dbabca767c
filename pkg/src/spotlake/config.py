"""Configuration: a flat key=value file, SPOTLAKE_* environment overrides,
and duration parsing shared by the CLI."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

from .model import SpotlakeError

DEFAULT_SEED = 42
ENV_PREFIX = "SPOTLAKE_"

_DURATION_UNITS = {"s": 1, "m": 60, "h": 3600, "d": 86400}


class ConfigError(SpotlakeError):
    pass


def parse_duration(text: str) -> int:
    """'10m' -> 600 seconds; accepts s/m/h/d suffixes or bare seconds."""
    t = text.strip().lower()
    if not t:
        raise ConfigError("empty duration")
    if t[-1].isdigit():
        return int(t)
    unit = t[-1]
    if unit not in _DURATION_UNITS:
        raise ConfigError(f"unknown duration unit in {text!r}")
    try:
        amount = float(t[:-1])
    except ValueError as exc:
        raise ConfigError(f"bad duration {text!r}") from exc
    return int(amount * _DURATION_UNITS[unit])


@dataclass
class Config:
    store: str = "archive"
    universe: str | None = None
    plan: str | None = None
    out: str = "demo-out"
    seed: int = DEFAULT_SEED
    period: str = "10m"
    hours: int = 48
    port: int = 8000
    vendor_port: int = 8001

    @property
    def period_s(self) -> int:
        return parse_duration(self.period)

    def validate_paths(self) -> None:
        """Referenced input files must exist; output paths are created later."""
        for name in ("universe", "plan"):
            value = getattr(self, name)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"{name} file not found: {value}")


_INT_KEYS = {"seed", "hours", "port", "vendor_port"}


def load_config(
    path: str | Path | None = None,
    env: dict[str, str] | None = None,
    overrides: dict[str, object] | None = None,
) -> Config:
    """Precedence: built-in defaults < config file < SPOTLAKE_* env < overrides."""
    values: dict[str, object] = {}
    known = {f.name for f in fields(Config)}

    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        for lineno, raw in enumerate(p.read_text().splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value.strip()

    env = os.environ if env is None else env
    for key in known:
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            values[key] = env[env_key]

    if overrides:
        for key, value in overrides.items():
            if value is not None:
                values[key] = value

    for key in list(values):
        if key in _INT_KEYS and isinstance(values[key], str):
            try:
                values[key] = int(values[key])
            except ValueError as exc:
                raise ConfigError(f"{key} must be an integer, got {values[key]!r}") from exc

    return Config(**values)  # type: ignore[arg-type]
