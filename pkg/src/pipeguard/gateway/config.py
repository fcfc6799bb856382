"""Runtime configuration: flags beat environment variables beat config file."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

__all__ = ["GatewayConfig", "resolve_config"]

_ENV_PREFIX = "PIPEGUARD_"


@dataclass
class GatewayConfig:
    data_dir: str = "./pipeguard-data"
    listen_addr: str = "127.0.0.1:8765"
    offline_mode: bool = False
    fetch_timeout: float = 20.0
    worker_count: int = 1
    cache_dir: str | None = None  # defaults to <data_dir>/cache
    session_ttl: float = 86400.0
    console_dir: str | None = None  # static console bundle served at /

    def resolved_cache_dir(self) -> str:
        return self.cache_dir or str(Path(self.data_dir) / "cache")


def _coerce(name: str, raw: str, target_type):
    if target_type is bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return target_type(raw)


def resolve_config(
    flags: dict | None = None,
    env: dict | None = None,
    config_path: str | None = None,
) -> GatewayConfig:
    """Merge configuration sources; later assignments below win low-to-high."""
    flags = {k: v for k, v in (flags or {}).items() if v is not None}
    env = os.environ if env is None else env

    values: dict = {}
    config_path = flags.get("config") or env.get(_ENV_PREFIX + "CONFIG") or config_path
    if config_path and Path(config_path).exists():
        values.update(json.loads(Path(config_path).read_text("utf-8")))

    field_types = {f.name: f.type for f in fields(GatewayConfig)}
    types = {
        "data_dir": str,
        "listen_addr": str,
        "offline_mode": bool,
        "fetch_timeout": float,
        "worker_count": int,
        "cache_dir": str,
        "session_ttl": float,
        "console_dir": str,
    }
    for name in field_types:
        env_key = _ENV_PREFIX + name.upper()
        if env_key in env:
            values[name] = _coerce(name, env[env_key], types[name])
    for name in field_types:
        if name in flags:
            values[name] = flags[name]
    return GatewayConfig(**values)
