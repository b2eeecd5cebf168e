"""Configuration-driven scenario runs and the bundled figure scenarios."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .runner import RunResult, StageError, field_metrics, run_scenario

BUNDLED = resources.files(__name__) / "bundled"


def bundled_names() -> list[str]:
    return sorted(p.name[: -len(".yaml")] for p in BUNDLED.iterdir() if p.name.endswith(".yaml"))


def resolve(name_or_path: str) -> Path:
    """A path to an existing file, or the name of a bundled scenario."""
    path = Path(name_or_path)
    if path.is_file():
        return path
    candidate = BUNDLED / f"{name_or_path}.yaml"
    if candidate.is_file():
        return Path(str(candidate))
    raise FileNotFoundError(f"no scenario file or bundled scenario named {name_or_path!r}")


__all__ = [
    "ConfigError",
    "RunResult",
    "ScenarioConfig",
    "StageError",
    "bundled_names",
    "field_metrics",
    "load_config",
    "parse_config",
    "resolve",
    "run_scenario",
]
