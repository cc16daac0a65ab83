"""Node configuration: file-based with environment overrides.

A config file is a flat JSON object; any field can also be overridden via
an SLCALITE_<FIELD> environment variable (upper-cased field name).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

DEFAULT_LEASE_SECONDS = 300
REANNOUNCE_FACTOR = 0.5

ENV_PREFIX = "SLCALITE_"


@dataclass
class NodeConfig:
    node_name: str = "node"
    transport: str = "loopback"          # loopback | udp
    multicast_group: str = "239.255.41.42"
    multicast_port: int = 14141
    tcp_host: str = "127.0.0.1"
    tcp_port: int = 0                    # 0 = pick free port
    default_lease_seconds: int = DEFAULT_LEASE_SECONDS
    reannounce_factor: float = REANNOUNCE_FACTOR
    search_window_seconds: float = 1.0   # real-transport search collect window
    dispatch_cycle_limit: int = 1024
    gateway_host: str = "127.0.0.1"
    gateway_port: int = 8750

    @staticmethod
    def load(path: Optional[str] = None, env: Optional[dict] = None) -> "NodeConfig":
        cfg = NodeConfig()
        if path:
            data = json.loads(Path(path).read_text())
            for f in fields(NodeConfig):
                if f.name in data:
                    setattr(cfg, f.name, data[f.name])
        env = os.environ if env is None else env
        for f in fields(NodeConfig):
            raw = env.get(ENV_PREFIX + f.name.upper())
            if raw is None:
                continue
            if f.type in ("int", int):
                setattr(cfg, f.name, int(raw))
            elif f.type in ("float", float):
                setattr(cfg, f.name, float(raw))
            else:
                setattr(cfg, f.name, raw)
        return cfg
