"""Run configuration: JSON file + command-line overrides + preset defaults."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidArgumentError
from .montecarlo import Schedule
from .noise_model import PRESETS, ChannelParams, DecayKind, DecayModel

FORMATS = frozenset({"csv", "json", "svg"})
TOP_KEYS = {"channel", "m_range", "sim", "decay", "output_dir", "formats"}
SIM_KEYS = {"m", "n_trials", "seed", "schedule", "workers", "event_log", "event_budget"}
DECAY_KEYS = {"kind", "tau"}
PARAM_KEYS = {f.name for f in dataclasses.fields(ChannelParams)}


class ConfigError(InvalidArgumentError):
    pass


@dataclass
class SimOptions:
    m: int = 14
    n_trials: int = 2_000_000
    seed: int = 0
    schedule: Schedule = Schedule.ROUND_ROBIN
    workers: int = 1
    event_log: bool = False
    event_budget: int = 10**10


@dataclass
class RunConfig:
    channels: list[tuple[str, ChannelParams]] = field(
        default_factory=lambda: [("CH1", PRESETS["CH1"]), ("CH2", PRESETS["CH2"])]
    )
    m_range: list[int] = field(default_factory=lambda: list(range(1, 51)))
    sim: SimOptions = field(default_factory=SimOptions)
    decay_kind: DecayKind = DecayKind.GAUSSIAN
    decay_tau: float | None = None
    output_dir: Path = Path(".")
    formats: frozenset[str] = frozenset({"csv", "json"})

    @property
    def decay(self) -> DecayModel | None:
        """Fully specified decay model, or None when no lifetime was given."""
        if self.decay_tau is None and self.decay_kind is not DecayKind.NONE:
            return None
        return DecayModel(self.decay_kind, self.decay_tau)


def _reject_unknown(section: str, data: dict, allowed: set) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(unknown)}")


def _channel(entry, index: int) -> tuple[str, ChannelParams]:
    if isinstance(entry, str):
        try:
            return entry, PRESETS[entry]
        except KeyError:
            raise ConfigError(f"unknown channel preset {entry!r} (known: {', '.join(PRESETS)})") from None
    if isinstance(entry, dict):
        entry = dict(entry)
        name = entry.pop("name", f"custom{index}")
        base = entry.pop("base", None)
        _reject_unknown(f"channel {name!r}", entry, PARAM_KEYS)
        try:
            if base is not None:
                if base not in PRESETS:
                    raise ConfigError(f"unknown base preset {base!r}")
                return name, PRESETS[base].with_(**entry)
            return name, ChannelParams(**entry)
        except TypeError as exc:
            raise ConfigError(f"channel {name!r}: {exc}") from None
    raise ConfigError(f"channel entry must be a preset name or an object, got {entry!r}")


def parse_formats(value) -> frozenset[str]:
    items = value.split(",") if isinstance(value, str) else list(value)
    fmts = frozenset(s.strip() for s in items if s.strip())
    bad = fmts - FORMATS
    if bad:
        raise ConfigError(f"unknown format(s): {', '.join(sorted(bad))}")
    return fmts


def from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    _reject_unknown("config", data, TOP_KEYS)
    cfg = RunConfig()
    if "channel" in data:
        ch = data["channel"]
        entries = ch if isinstance(ch, list) else [ch]
        if not entries:
            raise ConfigError("channel list is empty")
        cfg.channels = [_channel(e, i) for i, e in enumerate(entries)]
    if "m_range" in data:
        mr = data["m_range"]
        if not isinstance(mr, list) or not mr or not all(isinstance(m, int) and m >= 1 for m in mr):
            raise ConfigError("m_range must be a non-empty list of positive integers")
        cfg.m_range = list(mr)
    if "sim" in data:
        sim = data["sim"]
        if not isinstance(sim, dict):
            raise ConfigError("sim must be an object")
        _reject_unknown("sim", sim, SIM_KEYS)
        try:
            opts = SimOptions(**sim)
            opts.schedule = Schedule(opts.schedule)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"sim: {exc}") from None
        cfg.sim = opts
    if "decay" in data and data["decay"] is not None:
        dec = data["decay"]
        if not isinstance(dec, dict):
            raise ConfigError("decay must be an object")
        _reject_unknown("decay", dec, DECAY_KEYS)
        try:
            cfg.decay_kind = DecayKind(dec.get("kind", "gaussian"))
            cfg.decay_tau = dec.get("tau")
            cfg.decay  # validates tau
        except ValueError as exc:
            raise ConfigError(f"decay: {exc}") from None
    if "output_dir" in data:
        cfg.output_dir = Path(data["output_dir"])
    if "formats" in data:
        cfg.formats = parse_formats(data["formats"])
    return cfg


def load(path: Path | str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    return from_dict(data)


def params_to_dict(p: ChannelParams) -> dict:
    d = dataclasses.asdict(p)
    return {k: v for k, v in d.items() if v is not None and not (isinstance(v, float) and math.isnan(v))}
