"""Operator entry points: run the gateway, analyze sessions, calibrate, regen fixtures.

The CLI stays thin: flags and files in, core package calls out.  Exit codes:
0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import asyncio
import json
import socket
import sys

import click

from .analytics import merge_profiles, profiles_from_records, profiles_to_csv
from .config import (
    ConfigError,
    GatewayConfig,
    SourceSpec,
    apply_overrides,
    load_config_file,
    save_config_file,
)
from .events import calibrate as calibrate_samples
from .fixtures import write_all
from .session import read_session_file
from .sources import build_source


class RuntimeFailure(Exception):
    """Operational failure (busy port, unreadable input): exit code 2."""


def _echo_err(message: str) -> None:
    click.echo(message, err=True)


@click.group()
def cli() -> None:
    """EEG attention gateway toolkit."""


def _build_config(config_path: str | None, source: str | None, **overrides) -> GatewayConfig:
    if config_path:
        config = load_config_file(config_path)
    elif source:
        config = GatewayConfig(source=SourceSpec.parse(source))
        source = None
    else:
        raise click.UsageError("provide --source or --config")
    return apply_overrides(config, source=source, **overrides)


@cli.command()
@click.option("--source", help="device:<port-path> | replay:<file>[@speed] | synth:<scenario-file>[@speed]")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--record", "record_path", type=click.Path(dir_okay=False), default=None)
@click.option("--threshold", "attention_threshold", type=int, default=None)
@click.option("--hold-ms", type=int, default=None)
@click.option("--advance-ms", "advance_period_ms", type=int, default=None)
@click.option("--blink-delta", type=int, default=None)
@click.option("--buckets", "bucket_count", type=int, default=None)
@click.option("--max-skew-ms", type=int, default=None)
@click.option("--engine/--no-engine", "engine_enabled", default=None)
@click.option("--restamp/--no-restamp", default=None)
@click.option("--virtual-clock", is_flag=True, default=None, help="skip pump pacing sleeps")
@click.option("--autostart/--no-autostart", default=None)
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None)
def run(config_path, source, **overrides) -> None:
    """Serve the gateway until interrupted."""
    import uvicorn

    from .service import create_app

    config = _build_config(config_path, source, **overrides)
    try:
        config.validate()
    except (ConfigError, ValueError) as exc:
        raise RuntimeFailure(str(exc)) from exc
    _probe_port(config.host, config.port)
    app = create_app(config)
    click.echo(f"gateway on ws://{config.host}:{config.port}/eeg (source {config.source.unparse()})")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")


def _probe_port(host: str, port: int) -> None:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            probe.bind((host, port))
        except OSError as exc:
            raise RuntimeFailure(f"cannot bind {host}:{port}: {exc}") from exc


@cli.command()
@click.argument("sessions", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--buckets", "bucket_count", type=int, default=20, show_default=True)
@click.option("--max-skew-ms", type=int, default=500, show_default=True)
@click.option("--out-profile", type=click.Path(dir_okay=False), default="profile.json", show_default=True)
@click.option("--out-csv", type=click.Path(dir_okay=False), default="profile.csv", show_default=True)
def analyze(sessions, bucket_count, max_skew_ms, out_profile, out_csv) -> None:
    """Join recorded sessions into per-page section profiles plus a CSV."""
    per_page: dict[str, list] = {}
    dropped = 0
    for path in sessions:
        records, diags = read_session_file(path)
        for diag in diags:
            _echo_err(f"{path}: {diag.message}")
        profiles, file_dropped = profiles_from_records(records, bucket_count, max_skew_ms)
        dropped += file_dropped
        for profile in profiles:
            per_page.setdefault(profile.page_id, []).append(profile)

    merged = [merge_profiles(per_page[page]) for page in sorted(per_page)]
    if not merged:
        _echo_err("warning: no joinable attention/scroll samples; empty profile")
    if dropped:
        _echo_err(f"note: {dropped} attention sample(s) had no scroll partner within the skew")

    with open(out_profile, "w", encoding="utf-8") as fh:
        json.dump({"profiles": [p.to_json_obj() for p in merged]}, fh, indent=2)
        fh.write("\n")
    with open(out_csv, "w", encoding="utf-8") as fh:
        fh.write(profiles_to_csv(merged))
    click.echo(f"wrote {out_profile} and {out_csv} ({len(merged)} page(s))")


@cli.command()
@click.option("--source", required=True)
@click.option("--duration-s", type=float, default=20.0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="write the resulting threshold into this gateway config file")
def calibrate(source, duration_s, config_path) -> None:
    """Estimate a personal attention threshold from a baseline recording."""
    try:
        spec = SourceSpec.parse(source)
        values = _collect_attention(spec, duration_s)
    except (ConfigError, OSError, ValueError) as exc:
        raise RuntimeFailure(str(exc)) from exc
    if not values:
        _echo_err("warning: no attention samples within the window; using default 30")
    threshold = calibrate_samples(values)
    click.echo(f"threshold: {threshold}  (from {len(values)} attention samples)")
    if config_path:
        config = load_config_file(config_path)
        config = apply_overrides(config, attention_threshold=threshold)
        save_config_file(config_path, config)
        click.echo(f"updated {config_path}")


def _collect_attention(spec: SourceSpec, duration_s: float) -> list[int]:
    """Attention values from the first ``duration_s`` of source time.

    Replay/synth sources run unpaced (no sleeping); a live device is
    additionally bounded by a wall-clock timeout so a silent port cannot
    hang the command.
    """
    source = build_source(spec.kind, spec.path, spec.speed, sleep=False)
    values: list[int] = []

    async def collect() -> None:
        start: int | None = None
        async for record in source.stream():
            if record.kind != "attention":
                continue
            if start is None:
                start = record.t_ms
            if record.t_ms - start > duration_s * 1000:
                break
            values.append(record.value)

    async def bounded() -> None:
        if spec.kind == "device":
            try:
                await asyncio.wait_for(collect(), timeout=duration_s)
            except asyncio.TimeoutError:
                pass
        else:
            await collect()

    asyncio.run(bounded())
    return values


@cli.command()
@click.option("--out-dir", type=click.Path(file_okay=False), default="fixtures", show_default=True)
def fixtures(out_dir) -> None:
    """Regenerate the committed fixture sessions, scenarios, and wire corpus."""
    for path in write_all(out_dir):
        click.echo(path)


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(130)
    except click.UsageError as exc:
        _echo_err(f"error: {exc.format_message()}")
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except RuntimeFailure as exc:
        _echo_err(f"error: {exc}")
        sys.exit(2)


if __name__ == "__main__":
    main()
