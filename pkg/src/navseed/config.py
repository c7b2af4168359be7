"""Flat run configuration: defaults < config file < command-line flags."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

from .drl.hyper import HyperParams
from .expert.collect import CollectConfig
from .expert.dwa import DWAConfig
from .sim.env import EpisodeConfig
from .sim.reward import RewardParams

SECTIONS = {
    "hyper": HyperParams,
    "reward": RewardParams,
    "episode": EpisodeConfig,
    "dwa": DWAConfig,
}
EXTRA_KEYS = {
    # key: (default, type, section)
    "seed": (0, int, "run"),
    "replan_every": (10, int, "collect"),
    "inflate_margin": (0.05, float, "collect"),
    "include_failures": (False, bool, "collect"),
}
# keys whose default value comes from the source publication; everything else is a decision
PAPER_KEYS = {"lr", "batch_size", "v_slow", "omega_limit", "linear_penalty", "angular_penalty"}


class ConfigError(ValueError):
    """Unknown key, unparsable value or out-of-range setting (a usage error)."""


@dataclass(frozen=True)
class KeySpec:
    name: str
    section: str
    default: object
    type: type

    @property
    def provenance(self) -> str:
        return "paper" if self.name in PAPER_KEYS else "decided"


def _key_specs() -> dict[str, KeySpec]:
    specs = {}
    for section, cls in SECTIONS.items():
        for f in dataclasses.fields(cls):
            default = f.default
            specs[f.name] = KeySpec(f.name, section, default, type(default))
    for name, (default, typ, section) in EXTRA_KEYS.items():
        specs[name] = KeySpec(name, section, default, typ)
    return specs


KEYS = _key_specs()


def parse_value(spec: KeySpec, text: str):
    text = text.strip()
    try:
        if spec.type is bool:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if spec.type is int:
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigError(f"{spec.name}: cannot parse {text!r} as {spec.type.__name__}") from None


def format_value(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def read_config_file(path: str | os.PathLike) -> dict[str, object]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = parse_value(KEYS[key], value)
    return out


@dataclass
class RunConfig:
    values: dict[str, object] = field(default_factory=lambda: {k: s.default for k, s in KEYS.items()})
    source: dict[str, str] = field(default_factory=lambda: {k: "default" for k in KEYS})

    def overlay(self, updates: dict[str, object], source: str) -> None:
        for k, v in updates.items():
            if k not in KEYS:
                raise ConfigError(f"unknown key {k!r}")
            self.values[k] = v
            self.source[k] = source

    def _build(self, cls):
        kwargs = {f.name: self.values[f.name] for f in dataclasses.fields(cls)}
        try:
            return cls(**kwargs)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None

    @property
    def hyper(self) -> HyperParams:
        return self._build(HyperParams)

    @property
    def reward(self) -> RewardParams:
        return self._build(RewardParams)

    @property
    def episode(self) -> EpisodeConfig:
        return self._build(EpisodeConfig)

    @property
    def dwa(self) -> DWAConfig:
        return self._build(DWAConfig)

    @property
    def collect(self) -> CollectConfig:
        return CollectConfig(self.episode, self.reward, self.dwa, int(self.values["replan_every"]),
                             float(self.values["inflate_margin"]), bool(self.values["include_failures"]))

    @property
    def seed(self) -> int:
        return int(self.values["seed"])

    def validate(self) -> None:
        _ = self.hyper, self.reward, self.episode, self.dwa

    def dump(self, header: list[str] | None = None) -> str:
        lines = [f"# {h}" for h in header or []]
        for k in KEYS:
            lines.append(f"{k} = {format_value(self.values[k])}")
        return "\n".join(lines) + "\n"

    def write_sidecar(self, out_path: str | os.PathLike, header: list[str] | None = None) -> str:
        path = f"{os.fspath(out_path)}.config"
        with open(path, "w") as fh:
            fh.write(self.dump(header))
        return path
