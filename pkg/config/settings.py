import json
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from numerics_core import Tolerance

CONFIG_FILE = Path("symdisc.conf")

DEFAULT_SEED = int(os.getenv("SYMDISC_SEED", "42"))

COMMANDS = (
    "membership",
    "boundary",
    "symmetrize",
    "check-tuple",
    "fundamental",
    "counterexample",
    "cf-check",
)


class ConfigError(ValueError):
    """Bad configuration file or value; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    command: str = "membership"
    input_path: Optional[str] = None
    output: str = "json"
    out: Optional[str] = None
    n: int = 3
    depth: int = 8
    eta: float = 0.25
    degree: int = 6
    trials: int = 1000
    torus_grid: int = 48
    alpha_radii: int = 32
    alpha_angles: int = 64
    beta_grid: int = 256
    z_grid: int = 64
    seed: int = DEFAULT_SEED
    abs_eps: float = 1e-10
    rel_eps: float = 1e-8
    band: float = 1e-9
    max_torus_points: int = 200_000

    @property
    def tolerance(self) -> Tolerance:
        return Tolerance(self.abs_eps, self.rel_eps)

    def validate(self) -> "RunConfig":
        floors = {
            "alpha_radii": 2,
            "alpha_angles": 16,
            "beta_grid": 16,
            "z_grid": 4,
            "torus_grid": 4,
            "trials": 1,
            "degree": 1,
            "depth": 2,
            "max_torus_points": 1,
        }
        for name, floor in floors.items():
            if getattr(self, name) < floor:
                raise ConfigError(f"{name} must be at least {floor}")
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.output not in ("json", "text"):
            raise ConfigError("output must be 'json' or 'text'")
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if not 0 < self.eta <= 1:
            raise ConfigError("eta must lie in (0, 1]")
        for name in ("abs_eps", "rel_eps", "band"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        return self

    def merged(self, values: Mapping[str, Any]) -> "RunConfig":
        """Return a copy with ``values`` applied; ``None`` entries are skipped."""

        known = {f.name: f.type for f in fields(self)}
        updates: Dict[str, Any] = {}
        for key, value in values.items():
            if key not in known:
                raise ConfigError(f"unknown key {key!r}")
            if value is not None:
                updates[key] = _coerce(key, value, getattr(self, key))
        return replace(self, **updates)

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _coerce(key: str, value: Any, current: Any) -> Any:
    if key in ("input_path", "out"):
        return str(value)
    try:
        if isinstance(current, bool):
            return bool(value)
        if isinstance(current, int):
            return int(value)
        if isinstance(current, float):
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} has an invalid value {value!r}") from None
    return str(value)


_KNOWN_KEYS = frozenset(f.name for f in fields(RunConfig))


def _parse_key_values(text: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        values[key] = value
    return values


def load_config(path: Optional[Path] = None) -> dict:
    """Read a JSON object or ``key = value`` file.

    A missing file gives an empty mapping.  Unknown keys are rejected so a
    typo never silently falls back to a default.
    """

    path = Path(path) if path is not None else CONFIG_FILE
    if not path.exists():
        return {}
    text = path.read_text()
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno) from None
        if not isinstance(data, dict):
            raise ConfigError("JSON configuration must be an object")
        unknown = sorted(set(data) - _KNOWN_KEYS)
        if unknown:
            raise ConfigError(f"unknown keys {unknown}")
        return data
    return _parse_key_values(text)


def save_config(config: RunConfig, path: Optional[Path] = None) -> None:
    path = Path(path) if path is not None else CONFIG_FILE
    path.write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True))
