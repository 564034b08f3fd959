"""Pydantic models for the WebSocket wire protocol and the REST surface.

Wire fields are camelCase on the network (see docs/protocol.md); the models
accept and emit aliases, so Python code keeps snake_case.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter
from pydantic.alias_generators import to_camel


class WireModel(BaseModel):
    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)

    def wire_dict(self) -> dict:
        return self.model_dump(by_alias=True, exclude_none=True)


# --- client -> gateway ------------------------------------------------------

class SubscribeMessage(WireModel):
    kind: Literal["subscribe"]
    tracks: list[str] = Field(min_length=1)
    frequency_hz: float | None = Field(default=None, gt=0)
    events: bool = True


class UnsubscribeMessage(WireModel):
    kind: Literal["unsubscribe"]
    stream_id: str


class ScrollMessage(WireModel):
    kind: Literal["scroll"]
    page_id: str
    scroll_offset_px: int = Field(ge=0)
    viewport_h_px: int
    content_h_px: int


ClientMessage = Annotated[
    Union[SubscribeMessage, UnsubscribeMessage, ScrollMessage],
    Field(discriminator="kind"),
]

client_message_adapter: TypeAdapter = TypeAdapter(ClientMessage)


# --- gateway -> client ------------------------------------------------------

class TrackDescriptor(WireModel):
    id: str
    label: str
    frequency_hz: float


class StreamCreatedMessage(WireModel):
    kind: Literal["streamCreated"] = "streamCreated"
    stream_id: str
    tracks: list[TrackDescriptor]
    events: bool
    warnings: list[str] = []


class DataMessage(WireModel):
    kind: Literal["data"] = "data"
    track_id: str
    t: int
    value: float | int


class EventMessage(WireModel):
    kind: Literal["event"] = "event"
    event: str
    t: int
    detail: dict = {}


class AckMessage(WireModel):
    kind: Literal["ack"] = "ack"
    of: str
    t: int


class ErrorMessage(WireModel):
    kind: Literal["error"] = "error"
    code: str
    message: str
    valid_tracks: list[str] | None = None


class WarningMessage(WireModel):
    kind: Literal["warning"] = "warning"
    code: str
    message: str
    count: int | None = None


class SourceEndedMessage(WireModel):
    kind: Literal["sourceEnded"] = "sourceEnded"
    t: int


# --- REST -------------------------------------------------------------------

class HealthResponse(WireModel):
    status: str
    source: str
    source_started: bool
    source_ended: bool
    record_path: str | None = None
    subscriber_count: int


class TrackInfo(WireModel):
    label: str
    native_hz: float
    available: bool


class StreamsResponse(WireModel):
    tracks: list[TrackInfo]


class StartResponse(WireModel):
    source_started: bool
    source_ended: bool


class BucketModel(WireModel):
    mean: float | None
    count: int
    max: int | None


class ProfileModel(WireModel):
    page_id: str
    bucket_count: int
    buckets: list[BucketModel]


class ProfilesResponse(WireModel):
    profiles: list[ProfileModel]
    dropped: int
    csv: str


class AnalyzeRequest(WireModel):
    sessions: list[str] = Field(min_length=1, description="session file contents, JSON Lines")
    bucket_count: int | None = Field(default=None, ge=1)
    max_skew_ms: int | None = Field(default=None, ge=0)


class CalibrateRequest(WireModel):
    values: list[int]


class CalibrateResponse(WireModel):
    threshold: int
    sample_count: int
