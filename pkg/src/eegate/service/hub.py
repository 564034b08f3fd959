"""Gateway runtime: one ingestion pipeline fanned out to many subscribers.

Single event loop; the pump task drives source -> engine -> recorder and
pushes wire messages into one bounded queue per connection (drop-oldest on
overflow, with a drop-count warning on the next delivery).  Subscription
grants are realized as decimation against each track's native rate: eSense
tracks keep the latest sample of every window, the raw track emits
block means.
"""

from __future__ import annotations

import asyncio
import itertools
from dataclasses import dataclass, field

from ..analytics import profiles_from_records, scroll_percentage_raw
from ..clock import MonotonicStamper
from ..config import GatewayConfig
from ..events import ControlEvent, EngineState, process as engine_process
from ..session import KIND_SCROLL, SAMPLE_KINDS, SessionRecord, record_to_json
from ..sources import NATIVE_HZ, build_source
from ..wire import TRACK_RAW, TRACKS, Sample
from .schemas import (
    DataMessage,
    EventMessage,
    SourceEndedMessage,
    StreamCreatedMessage,
    TrackDescriptor,
    WarningMessage,
)


class UnknownTrackError(ValueError):
    def __init__(self, tracks):
        self.tracks = tracks
        super().__init__(f"unknown tracks: {sorted(tracks)}")


@dataclass
class TrackGrant:
    track_id: str
    label: str
    frequency_hz: float
    ratio: int  # deliver every ratio-th sample (raw: mean of each ratio-block)
    seen: int = 0
    block: list[int] = field(default_factory=list)


@dataclass
class Subscription:
    conn_id: int
    stream_id: str
    grants: dict[str, TrackGrant]
    events: bool
    queue: asyncio.Queue
    dropped: int = 0
    notified_drops: int = 0

    def descriptor(self, warnings: list[str]) -> StreamCreatedMessage:
        return StreamCreatedMessage(
            stream_id=self.stream_id,
            tracks=[
                TrackDescriptor(
                    id=g.track_id, label=g.label, frequency_hz=g.frequency_hz
                )
                for g in self.grants.values()
            ],
            events=self.events,
            warnings=warnings,
        )


class GatewayRuntime:
    """Owns the source pump, the event engine, the recorder, and the fan-out."""

    def __init__(self, config: GatewayConfig):
        config.validate()
        self.config = config
        self.source = build_source(
            config.source.kind,
            config.source.path,
            config.source.speed,
            sleep=not config.virtual_clock,
        )
        self.engine_state = EngineState()
        self.stamper = MonotonicStamper()
        self.subscriptions: dict[int, Subscription] = {}
        self._conn_ids = itertools.count(1)
        self._stream_ids = itertools.count(1)
        self.source_started = False
        self.source_ended = False
        self._pump_task: asyncio.Task | None = None
        self._record_sink = None
        self.record_count = 0
        # in-memory copies for the live profile endpoint
        self.attention_records: list[SessionRecord] = []
        self.scroll_records: list[SessionRecord] = []
        self.scroll_diagnostics: list[str] = []

    # --- lifecycle ------------------------------------------------------------

    def open_recorder(self) -> None:
        if self.config.record_path and self._record_sink is None:
            self._record_sink = open(self.config.record_path, "w", encoding="utf-8")

    def start_source(self) -> None:
        if self._pump_task is None:
            self.open_recorder()
            self.source_started = True
            self._pump_task = asyncio.get_running_loop().create_task(self._pump())

    async def shutdown(self) -> None:
        if self._pump_task is not None:
            self._pump_task.cancel()
            try:
                await self._pump_task
            except asyncio.CancelledError:
                pass
            self._pump_task = None
        self.close_recorder()

    def close_recorder(self) -> None:
        if self._record_sink is not None:
            self._record_sink.flush()
            self._record_sink.close()
            self._record_sink = None

    async def _pump(self) -> None:
        try:
            async for record in self.source.stream():
                self.ingest(record)
        finally:
            self.source_ended = True
            self._broadcast_all(SourceEndedMessage(t=self.stamper.stamp()).wire_dict())
            if self._record_sink is not None:
                self._record_sink.flush()

    # --- ingestion --------------------------------------------------------------

    def ingest(self, record: SessionRecord) -> None:
        source_record = record
        if self.config.restamp:
            record = SessionRecord(
                t_ms=self.stamper.stamp(),
                kind=record.kind,
                value=record.value,
                page_id=record.page_id,
                scroll_offset_px=record.scroll_offset_px,
                viewport_h_px=record.viewport_h_px,
                content_h_px=record.content_h_px,
            )
        self._record(record)
        if record.kind == KIND_SCROLL:
            self.scroll_records.append(record)
            return
        if record.kind not in SAMPLE_KINDS:
            return
        if record.kind == "attention":
            self.attention_records.append(record)
        self.deliver(record.to_sample())  # data first, then the events it triggered
        if self.config.engine_enabled:
            # the hold/advance/gap constants are defined on the source
            # timeline, so the engine consumes original sample times even
            # when delivery restamps; emitted events carry the trigger
            # sample's stamped time
            events, _diags, self.engine_state = engine_process(
                source_record.to_sample(), self.engine_state, self.config.events_config
            )
            for event in events:
                stamped = ControlEvent(record.t_ms, event.kind, event.detail)
                self._record(
                    SessionRecord.engine_event(stamped.t_ms, stamped.kind, stamped.detail)
                )
                self.broadcast_event(stamped)

    def accept_scroll(self, page_id: str, offset: int, viewport: int, content: int) -> int:
        """Stamp and record client scroll telemetry; returns the stamp."""
        if viewport <= 0 or content <= 0:
            raise ValueError("viewport and content heights must be positive")
        if offset < 0:
            raise ValueError("scroll offset must be non-negative")
        t = self.stamper.stamp()
        raw_pct = scroll_percentage_raw(offset, viewport, content)
        if not 0 <= raw_pct <= 100:
            self.scroll_diagnostics.append(
                f"raw scroll percentage {raw_pct:.2f} clamped for {page_id} at {t}"
            )
        record = SessionRecord.scroll(t, page_id, offset, viewport, content)
        self._record(record)
        self.scroll_records.append(record)
        return t

    def _record(self, record: SessionRecord) -> None:
        self.record_count += 1
        if self._record_sink is not None:
            self._record_sink.write(record_to_json(record))
            self._record_sink.write("\n")
            if record.kind != TRACK_RAW:
                self._record_sink.flush()

    # --- subscriptions ------------------------------------------------------------

    def register_connection(self) -> int:
        return next(self._conn_ids)

    def subscribe(
        self, conn_id: int, tracks: list[str], frequency_hz: float | None, events: bool
    ) -> tuple[Subscription, list[str]]:
        unknown = [t for t in tracks if t not in TRACKS]
        if unknown:
            raise UnknownTrackError(unknown)
        warnings: list[str] = []
        available = set(self.source.tracks)
        granted = []
        for label in dict.fromkeys(tracks):  # de-dupe, keep order
            if label not in available:
                warnings.append(f"track {label} not provided by source {self.source.label}; not granted")
                continue
            granted.append(label)
        stream_id = f"s{next(self._stream_ids)}"
        grants: dict[str, TrackGrant] = {}
        for label in granted:
            native = NATIVE_HZ[label]
            wanted = frequency_hz if frequency_hz is not None else native
            effective = min(wanted, native)
            if wanted > native:
                warnings.append(
                    f"frequency {wanted:g} Hz above native {native:g} Hz for {label}; clamped"
                )
            grants[label] = TrackGrant(
                track_id=f"{stream_id}.{label}",
                label=label,
                frequency_hz=effective,
                ratio=max(1, round(native / effective)),
            )
        subscription = Subscription(
            conn_id=conn_id,
            stream_id=stream_id,
            grants=grants,
            events=events,
            queue=asyncio.Queue(maxsize=self.config.queue_size),
        )
        self.subscriptions[conn_id] = subscription
        return subscription, warnings

    def unsubscribe(self, conn_id: int) -> None:
        self.subscriptions.pop(conn_id, None)

    # --- fan-out ---------------------------------------------------------------------

    def deliver(self, sample: Sample) -> None:
        for sub in list(self.subscriptions.values()):
            grant = sub.grants.get(sample.track)
            if grant is None:
                continue
            if grant.label == TRACK_RAW and grant.ratio > 1:
                grant.block.append(sample.value)
                if len(grant.block) < grant.ratio:
                    continue
                value: float | int = sum(grant.block) / len(grant.block)
                grant.block.clear()
            else:
                grant.seen += 1
                if (grant.seen - 1) % grant.ratio != 0:
                    continue
                value = sample.value
            self._enqueue(
                sub,
                DataMessage(track_id=grant.track_id, t=sample.t_ms, value=value).wire_dict(),
            )

    def broadcast_event(self, event) -> None:
        message = EventMessage(event=event.kind, t=event.t_ms, detail=event.detail).wire_dict()
        for sub in list(self.subscriptions.values()):
            if sub.events:
                self._enqueue(sub, message)

    def _broadcast_all(self, message: dict) -> None:
        for sub in list(self.subscriptions.values()):
            self._enqueue(sub, message)

    def _enqueue(self, sub: Subscription, message: dict) -> None:
        while True:
            try:
                sub.queue.put_nowait(message)
                return
            except asyncio.QueueFull:
                try:
                    sub.queue.get_nowait()  # drop the oldest for this slow consumer
                    sub.dropped += 1
                except asyncio.QueueEmpty:
                    pass

    def drop_notice(self, sub: Subscription) -> dict | None:
        if sub.dropped > sub.notified_drops:
            count = sub.dropped - sub.notified_drops
            sub.notified_drops = sub.dropped
            return WarningMessage(
                code="dropped",
                message="slow consumer; oldest messages were dropped",
                count=count,
            ).wire_dict()
        return None

    # --- analytics views ----------------------------------------------------------------

    def live_profiles(self, bucket_count: int | None = None, max_skew_ms: int | None = None):
        records = sorted(
            self.attention_records + self.scroll_records, key=lambda r: r.t_ms
        )
        return profiles_from_records(
            records,
            bucket_count or self.config.bucket_count,
            self.config.max_skew_ms if max_skew_ms is None else max_skew_ms,
        )
