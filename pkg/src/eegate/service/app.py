"""FastAPI application: the /eeg WebSocket endpoint, the REST surface, static demo UI."""

from __future__ import annotations

import asyncio
import contextlib
import io
import json

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from pydantic import ValidationError

from ..analytics import profiles_from_records, profiles_to_csv
from ..config import GatewayConfig
from ..events import calibrate
from ..session import read_session
from ..sources import NATIVE_HZ
from ..wire import TRACKS
from .hub import GatewayRuntime, Subscription, UnknownTrackError
from .schemas import (
    AckMessage,
    AnalyzeRequest,
    BucketModel,
    CalibrateRequest,
    CalibrateResponse,
    ErrorMessage,
    HealthResponse,
    ProfileModel,
    ProfilesResponse,
    ScrollMessage,
    StartResponse,
    StreamsResponse,
    SubscribeMessage,
    TrackInfo,
    UnsubscribeMessage,
    client_message_adapter,
)


def create_app(config: GatewayConfig) -> FastAPI:
    runtime = GatewayRuntime(config)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        if config.autostart:
            runtime.start_source()
        else:
            runtime.open_recorder()
        yield
        await runtime.shutdown()

    app = FastAPI(title="eegate", lifespan=lifespan)
    app.state.runtime = runtime

    @app.websocket("/eeg")
    async def eeg_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        conn_id = runtime.register_connection()
        sender: asyncio.Task | None = None

        async def stop_sender() -> None:
            nonlocal sender
            if sender is not None:
                sender.cancel()
                with contextlib.suppress(asyncio.CancelledError):
                    await sender
                sender = None

        try:
            while True:
                text = await ws.receive_text()
                reply, subscription = _dispatch(runtime, conn_id, text)
                if reply is not None:
                    await ws.send_text(json.dumps(reply))
                if subscription is not None:
                    await stop_sender()  # re-subscribing replaces the stream
                    sender = asyncio.get_running_loop().create_task(
                        _sender(ws, runtime, subscription)
                    )
        except WebSocketDisconnect:
            pass
        finally:
            await stop_sender()
            runtime.unsubscribe(conn_id)

    @app.get("/api/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status="ok",
            source=runtime.source.label,
            source_started=runtime.source_started,
            source_ended=runtime.source_ended,
            record_path=config.record_path,
            subscriber_count=len(runtime.subscriptions),
        )

    @app.get("/api/streams", response_model=StreamsResponse)
    def streams() -> StreamsResponse:
        available = set(runtime.source.tracks)
        return StreamsResponse(
            tracks=[
                TrackInfo(label=t, native_hz=NATIVE_HZ[t], available=t in available)
                for t in TRACKS
            ]
        )

    @app.post("/api/source/start", response_model=StartResponse)
    async def start_source() -> StartResponse:
        runtime.start_source()
        return StartResponse(
            source_started=runtime.source_started, source_ended=runtime.source_ended
        )

    @app.get("/api/config")
    def get_config() -> dict:
        return config.to_json_obj()

    @app.get("/api/profile", response_model=ProfilesResponse)
    def live_profile(page_id: str | None = None, buckets: int | None = None) -> ProfilesResponse:
        profiles, dropped = runtime.live_profiles(bucket_count=buckets)
        if page_id is not None:
            profiles = [p for p in profiles if p.page_id == page_id]
        return _profiles_response(profiles, dropped)

    @app.post("/api/analyze", response_model=ProfilesResponse)
    def analyze(request: AnalyzeRequest) -> ProfilesResponse:
        records = []
        for text in request.sessions:
            session_records, _diags = read_session(io.StringIO(text))
            records.extend(session_records)
        records.sort(key=lambda r: r.t_ms)
        profiles, dropped = profiles_from_records(
            records,
            request.bucket_count or config.bucket_count,
            config.max_skew_ms if request.max_skew_ms is None else request.max_skew_ms,
        )
        return _profiles_response(profiles, dropped)

    @app.post("/api/calibrate", response_model=CalibrateResponse)
    def calibrate_endpoint(request: CalibrateRequest) -> CalibrateResponse:
        for v in request.values:
            if not 0 <= v <= 100:
                raise HTTPException(status_code=422, detail=f"attention value {v} outside 0..100")
        return CalibrateResponse(
            threshold=calibrate(request.values), sample_count=len(request.values)
        )

    if config.ui_dir:
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def _profiles_response(profiles, dropped: int) -> ProfilesResponse:
    return ProfilesResponse(
        profiles=[
            ProfileModel(
                page_id=p.page_id,
                bucket_count=p.bucket_count,
                buckets=[
                    BucketModel(mean=b.mean, count=b.count, max=b.max) for b in p.buckets
                ],
            )
            for p in profiles
        ],
        dropped=dropped,
        csv=profiles_to_csv(profiles),
    )


def _dispatch(
    runtime: GatewayRuntime, conn_id: int, text: str
) -> tuple[dict | None, Subscription | None]:
    """Parse one client message and apply it; returns (reply, new subscription)."""
    try:
        message = client_message_adapter.validate_json(text)
    except ValidationError as exc:
        return (
            ErrorMessage(code="bad_message", message=_brief(exc)).wire_dict(),
            None,
        )

    if isinstance(message, SubscribeMessage):
        try:
            subscription, warnings = runtime.subscribe(
                conn_id, message.tracks, message.frequency_hz, message.events
            )
        except UnknownTrackError as exc:
            return (
                ErrorMessage(
                    code="unknown_track",
                    message=str(exc),
                    valid_tracks=list(TRACKS),
                ).wire_dict(),
                None,
            )
        return subscription.descriptor(warnings).wire_dict(), subscription

    if isinstance(message, UnsubscribeMessage):
        existing = runtime.subscriptions.get(conn_id)
        if existing is None or existing.stream_id != message.stream_id:
            return (
                ErrorMessage(code="unknown_stream", message=f"no stream {message.stream_id}").wire_dict(),
                None,
            )
        runtime.unsubscribe(conn_id)
        return AckMessage(of="unsubscribe", t=runtime.stamper.stamp()).wire_dict(), None

    assert isinstance(message, ScrollMessage)
    try:
        t = runtime.accept_scroll(
            message.page_id,
            message.scroll_offset_px,
            message.viewport_h_px,
            message.content_h_px,
        )
    except ValueError as exc:
        return ErrorMessage(code="bad_scroll", message=str(exc)).wire_dict(), None
    return AckMessage(of="scroll", t=t).wire_dict(), None


async def _sender(ws: WebSocket, runtime: GatewayRuntime, sub: Subscription) -> None:
    while True:
        message = await sub.queue.get()
        notice = runtime.drop_notice(sub)
        if notice is not None:
            await ws.send_text(json.dumps(notice))
        await ws.send_text(json.dumps(message))


def _brief(exc: ValidationError) -> str:
    first = exc.errors()[0]
    where = ".".join(str(p) for p in first.get("loc", ()))
    return f"{where}: {first.get('msg', 'invalid')}" if where else str(first.get("msg", "invalid"))
