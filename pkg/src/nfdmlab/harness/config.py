"""Experiment configuration: one sweep point of the burst transmission lab.

Configs load from JSON (structured or flat) or from simple ``key = value``
text files; every field has a flat spelling so both formats share one
schema.  The canonical hash over the flattened dict stamps every emitted
result row.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from nfdmlab.core import FiberParams
from nfdmlab.errors import InvalidConfigurationError

SYSTEMS = ("nfdm", "edc", "dbp", "nfdm_awgn")

SWEEP_AXES = {
    "power": "launch_power_dbm",
    "n_burst": "n_burst",
    "n_guard": "n_guard",
    "window": "window_fraction",
}


@dataclass(frozen=True)
class ExperimentConfig:
    system: str = "nfdm"
    n_burst: int = 32
    n_guard: int = 800
    oversampling: int = 4
    launch_power_dbm: float = -8.0
    precompensation: bool = False
    window_fraction: float | None = None  # T_w as a fraction of the frame
    rolloff: float = 0.2
    symbol_rate: float = 50e9
    fiber: FiberParams = field(default_factory=FiberParams)
    noise: bool = True
    noise_granularity: str = "distributed"
    seed: int = 1
    bursts: int = 64
    dz: float | None = None
    power_mode: str = "burst"  # launch power averaged over burst or frame

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise InvalidConfigurationError(
                f"system must be one of {SYSTEMS}, got {self.system!r}")
        for name in ("n_burst", "n_guard", "oversampling", "bursts"):
            if getattr(self, name) < 1:
                raise InvalidConfigurationError(f"{name} must be positive")
        if self.n_guard % 2:
            raise InvalidConfigurationError("n_guard must be even")
        if self.oversampling % 2:
            raise InvalidConfigurationError("oversampling must be even")
        if not (0.0 <= self.rolloff <= 1.0):
            raise InvalidConfigurationError("rolloff must be within [0, 1]")
        if self.window_fraction is not None and not (0.0 < self.window_fraction <= 1.0):
            raise InvalidConfigurationError("window_fraction must be in (0, 1]")
        if self.window_fraction is not None and self.system != "nfdm":
            raise InvalidConfigurationError("windowed FNFT applies to the nfdm system")
        if self.precompensation and self.system != "nfdm":
            raise InvalidConfigurationError(
                "precompensation applies to the nfdm system only")
        if self.power_mode not in ("burst", "frame"):
            raise InvalidConfigurationError("power_mode must be burst or frame")
        if self.noise_granularity not in ("distributed", "lumped"):
            raise InvalidConfigurationError("bad noise granularity")

    @property
    def T_s(self) -> float:
        return 1.0 / self.symbol_rate

    @property
    def signal_bandwidth(self) -> float:
        return self.symbol_rate * (1.0 + self.rolloff)

    def replace(self, **kwargs) -> "ExperimentConfig":
        fiber_kwargs = {k[len("fiber_"):]: v for k, v in kwargs.items()
                        if k.startswith("fiber_")}
        kwargs = {k: v for k, v in kwargs.items() if not k.startswith("fiber_")}
        if fiber_kwargs:
            kwargs["fiber"] = dataclasses.replace(self.fiber, **fiber_kwargs)
        return dataclasses.replace(self, **kwargs)

    def flat_dict(self) -> dict:
        d = dataclasses.asdict(self)
        fiber = d.pop("fiber")
        d.update({f"fiber_{k}": v for k, v in fiber.items()})
        return d

    def config_hash(self) -> str:
        payload = json.dumps(self.flat_dict(), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def preset(name: str, **overrides) -> ExperimentConfig:
    """Named starting points: 'paper' is the full 2000 km / 50 GBd system,
    'fast' a 500 km link with the guard rescaled by the memory formula."""
    if name == "paper":
        cfg = ExperimentConfig()
    elif name == "fast":
        cfg = ExperimentConfig(fiber=FiberParams(length=500e3), n_guard=200)
    else:
        raise InvalidConfigurationError(f"unknown preset {name!r}")
    return cfg.replace(**overrides) if overrides else cfg


_BOOL_STRINGS = {"true": True, "false": False, "1": True, "0": False,
                 "yes": True, "no": False, "on": True, "off": False}


def _coerce(key: str, value):
    if isinstance(value, str):
        text = value.strip()
        if key in ("system", "noise_granularity", "power_mode"):
            return text
        low = text.lower()
        if low in _BOOL_STRINGS:
            return _BOOL_STRINGS[low]
        if low in ("none", "null"):
            return None
        try:
            return int(text)
        except ValueError:
            pass
        try:
            return float(text)
        except ValueError:
            return text
    return value


def load_config(path: str | Path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read a config from structured/flat JSON or key=value lines."""
    path = Path(path)
    text = path.read_text()
    cfg = base or ExperimentConfig()
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        data = json.loads(text)
        if "fiber" in data and isinstance(data["fiber"], dict):
            fiber = data.pop("fiber")
            data.update({f"fiber_{k}": v for k, v in fiber.items()})
        items = data.items()
    else:
        items = []
        for line_no, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfigurationError(
                    f"{path}:{line_no}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            items.append((key, value))
    known = {f.name for f in dataclasses.fields(ExperimentConfig)} - {"fiber"}
    known |= {f"fiber_{f.name}" for f in dataclasses.fields(FiberParams)}
    updates = {}
    for key, value in items:
        if key not in known:
            raise InvalidConfigurationError(f"unknown config key {key!r}")
        updates[key] = _coerce(key, value)
    return cfg.replace(**updates)
