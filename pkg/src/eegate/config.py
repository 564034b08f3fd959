"""Gateway configuration: source spec parsing, config file + flag precedence."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace

from .events import EventConfig

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8008
DEFAULT_BUCKET_COUNT = 20
DEFAULT_MAX_SKEW_MS = 500
DEFAULT_QUEUE_SIZE = 1024

SOURCE_KINDS = ("device", "replay", "synth")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SourceSpec:
    """Parsed ``device:<path>`` / ``replay:<file>[@speed]`` / ``synth:<scenario-file>[@speed]``."""

    kind: str
    path: str
    speed: float = 1.0

    @staticmethod
    def parse(spec: str) -> "SourceSpec":
        kind, sep, rest = spec.partition(":")
        if not sep or kind not in SOURCE_KINDS or not rest:
            raise ConfigError(
                f"bad source {spec!r}; expected device:<port-path>, "
                f"replay:<file>[@speed] or synth:<scenario-file>[@speed]"
            )
        speed = 1.0
        path = rest
        if kind in ("replay", "synth") and "@" in rest:
            path, _, speed_text = rest.rpartition("@")
            try:
                speed = float(speed_text)
            except ValueError as exc:
                raise ConfigError(f"bad replay speed {speed_text!r}") from exc
            if speed <= 0:
                raise ConfigError("replay speed must be positive")
        return SourceSpec(kind=kind, path=path, speed=speed)

    def unparse(self) -> str:
        if self.kind in ("replay", "synth") and self.speed != 1.0:
            return f"{self.kind}:{self.path}@{self.speed:g}"
        return f"{self.kind}:{self.path}"


@dataclass(frozen=True)
class GatewayConfig:
    source: SourceSpec
    host: str = DEFAULT_HOST
    port: int = DEFAULT_PORT
    record_path: str | None = None
    events_config: EventConfig = field(default_factory=EventConfig)
    bucket_count: int = DEFAULT_BUCKET_COUNT
    max_skew_ms: int = DEFAULT_MAX_SKEW_MS
    queue_size: int = DEFAULT_QUEUE_SIZE
    engine_enabled: bool = True
    restamp: bool = True  # live emulation: replayed records carry emission time
    virtual_clock: bool = False  # skip pump sleeps (timed tests, CI)
    autostart: bool = True  # begin pumping on service startup
    ui_dir: str | None = None

    def validate(self) -> None:
        self.events_config.validate()
        if self.bucket_count < 1:
            raise ConfigError("bucket_count must be at least 1")
        if self.max_skew_ms < 0:
            raise ConfigError("max_skew_ms must be non-negative")
        if self.queue_size < 1:
            raise ConfigError("queue_size must be at least 1")
        if self.source.kind in ("replay", "synth") and not os.path.exists(self.source.path):
            raise ConfigError(f"source file not found: {self.source.path}")
        if self.ui_dir is not None and not os.path.isdir(self.ui_dir):
            raise ConfigError(f"ui directory not found: {self.ui_dir}")

    def to_json_obj(self) -> dict:
        cfg = self.events_config
        return {
            "source": self.source.unparse(),
            "host": self.host,
            "port": self.port,
            "record_path": self.record_path,
            "bucket_count": self.bucket_count,
            "max_skew_ms": self.max_skew_ms,
            "queue_size": self.queue_size,
            "engine_enabled": self.engine_enabled,
            "restamp": self.restamp,
            "virtual_clock": self.virtual_clock,
            "autostart": self.autostart,
            "ui_dir": self.ui_dir,
            "events": {
                "attention_threshold": cfg.attention_threshold,
                "hold_ms": cfg.hold_ms,
                "advance_period_ms": cfg.advance_period_ms,
                "blink_delta": cfg.blink_delta,
                "double_blink_min_gap_ms": cfg.double_blink_min_gap_ms,
                "double_blink_max_gap_ms": cfg.double_blink_max_gap_ms,
                "signal_quality_gate": cfg.signal_quality_gate,
                "advance_on_high": cfg.advance_on_high,
                "absolute_blink_delta": cfg.absolute_blink_delta,
            },
        }


_EVENT_FIELDS = {f.name for f in fields(EventConfig)}
_TOP_FIELDS = {
    "source",
    "host",
    "port",
    "record_path",
    "bucket_count",
    "max_skew_ms",
    "queue_size",
    "engine_enabled",
    "restamp",
    "virtual_clock",
    "autostart",
    "ui_dir",
}


def config_from_obj(obj: dict) -> GatewayConfig:
    """Build a GatewayConfig from a parsed config-file object."""
    unknown = set(obj) - _TOP_FIELDS - {"events"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "source" not in obj:
        raise ConfigError("config requires a source")
    events_obj = obj.get("events", {})
    bad = set(events_obj) - _EVENT_FIELDS
    if bad:
        raise ConfigError(f"unknown event config keys: {sorted(bad)}")
    events_config = EventConfig(**events_obj)
    kwargs = {k: v for k, v in obj.items() if k in _TOP_FIELDS and k != "source"}
    return GatewayConfig(
        source=SourceSpec.parse(obj["source"]),
        events_config=events_config,
        **kwargs,
    )


def load_config_file(path: str) -> GatewayConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_obj(obj)


def save_config_file(path: str, config: GatewayConfig) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_json_obj(), fh, indent=2)
        fh.write("\n")


def apply_overrides(config: GatewayConfig, **overrides) -> GatewayConfig:
    """Flags beat the config file: apply non-None overrides on both levels."""
    event_over = {k: v for k, v in overrides.items() if k in _EVENT_FIELDS and v is not None}
    top_over = {k: v for k, v in overrides.items() if k in _TOP_FIELDS and v is not None}
    if event_over:
        config = replace(config, events_config=replace(config.events_config, **event_over))
    if "source" in top_over:
        top_over["source"] = SourceSpec.parse(top_over["source"])
    if top_over:
        config = replace(config, **top_over)
    return config
