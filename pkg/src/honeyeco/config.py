"""Shared application configuration (INI file).

Schema::

    [paths]        logs, rules, goals, artifacts, reports, enrichment, shell_config
    [analytics]    k (int or "auto"), k_min, k_max, seed, tol, max_iter, n_init,
                   feature_mode
    [grouping]     min_actors, min_clusters
    [shell]        host, port, phase, idle_timeout
    [camera]       host, port, model, creds_file

Only ``[paths]`` entries may be overridden from the environment, as
``HONEYECO_<KEY>`` (for example ``HONEYECO_LOGS``). There is no default seed.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Mapping

PATH_KEYS = ("logs", "rules", "goals", "artifacts", "reports", "enrichment", "shell_config")
ENV_PREFIX = "HONEYECO_"
# must exist at validation time when set; the rest are outputs
_INPUT_PATHS = ("rules", "goals", "enrichment", "shell_config")


class ConfigError(ValueError):
    pass


@dataclass
class AppConfig:
    paths: dict[str, str] = field(default_factory=dict)
    k: int | str = "auto"
    k_min: int = 1
    k_max: int = 10
    seed: int | None = None
    tol: float = 1e-6
    max_iter: int = 500
    n_init: int = 4
    feature_mode: str = "similarity"
    min_actors: int = 3
    min_clusters: int = 10
    shell_host: str = "0.0.0.0"
    shell_port: int = 2323
    shell_phase: int = 2
    shell_idle_timeout: float = 120.0
    camera_host: str = "0.0.0.0"
    camera_port: int = 8080
    camera_model: str = "DCS-5020L"
    camera_creds_file: str | None = None

    def path(self, key: str) -> str | None:
        return self.paths.get(key)

    def require_seed(self, override: int | None = None) -> int:
        seed = override if override is not None else self.seed
        if seed is None:
            raise ConfigError("a seed is required (--seed or [analytics] seed); wall-clock seeding is not supported")
        return int(seed)

    def validate(self) -> None:
        if self.k != "auto":
            if not isinstance(self.k, int) or self.k < 1:
                raise ConfigError(f"k must be 'auto' or an integer >= 1, got {self.k!r}")
        if not 1 <= self.k_min <= self.k_max:
            raise ConfigError(f"need 1 <= k_min <= k_max, got {self.k_min}..{self.k_max}")
        for name in ("min_actors", "min_clusters", "n_init", "max_iter"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.tol <= 0:
            raise ConfigError("tol must be > 0")
        for key in _INPUT_PATHS:
            p = self.paths.get(key)
            if p and not Path(p).exists():
                raise ConfigError(f"[paths] {key} = {p} does not exist")
        if self.camera_creds_file and not Path(self.camera_creds_file).exists():
            raise ConfigError(f"[camera] creds_file = {self.camera_creds_file} does not exist")


def parse_k(value: str | int) -> int | str:
    if isinstance(value, int):
        k = value
    elif str(value).strip().lower() == "auto":
        return "auto"
    else:
        try:
            k = int(value)
        except ValueError:
            raise ConfigError(f"k must be 'auto' or an integer, got {value!r}") from None
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    return k


_SECTION_FIELDS = {
    "analytics": {"k", "k_min", "k_max", "seed", "tol", "max_iter", "n_init", "feature_mode"},
    "grouping": {"min_actors", "min_clusters"},
    "shell": {"host", "port", "phase", "idle_timeout"},
    "camera": {"host", "port", "model", "creds_file"},
}


def load_config(path: str | os.PathLike | None = None, env: Mapping[str, str] | None = None) -> AppConfig:
    env = os.environ if env is None else env
    cfg = AppConfig()
    types = {f.name: f.type for f in fields(AppConfig)}
    if path is not None:
        parser = configparser.ConfigParser()
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
        base = Path(path).resolve().parent
        for section in parser.sections():
            if section == "paths":
                for key, value in parser.items("paths"):
                    if key not in PATH_KEYS:
                        raise ConfigError(f"unknown [paths] key {key!r}")
                    cfg.paths[key] = str((base / value).resolve()) if value else value
                continue
            allowed = _SECTION_FIELDS.get(section)
            if allowed is None:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in allowed:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                name = key if section in ("analytics", "grouping") else f"{section}_{key}"
                setattr(cfg, name, _coerce(name, raw, types[name]))
    for key in PATH_KEYS:
        value = env.get(ENV_PREFIX + key.upper())
        if value:
            cfg.paths[key] = value
    cfg.validate()
    return cfg


def _coerce(name: str, raw: str, type_name: str):
    if name == "k":
        return parse_k(raw)
    if name == "camera_creds_file":
        return raw or None
    try:
        if "int" in type_name:
            return int(raw)
        if "float" in type_name:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None
    return raw
