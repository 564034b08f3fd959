"""Scroll-percentage formula, attention/scroll timestamp join, per-section profiles.

The page-position proxy is ``((2 * scroll_offset + viewport_height) /
content_height) * 100``, clamped to [0, 100] (the raw value exceeds 100 near
the page bottom; callers wanting the unclamped figure use
``scroll_percentage_raw``).  Attention samples are joined to the
nearest-in-time scroll sample, bucketed into equal page sections, and
profiles from many sessions merge by pooled means -- no user identifiers
ever enter a profile.
"""

from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .wire import Sample


@dataclass(frozen=True)
class ScrollSample:
    t_ms: int
    page_id: str
    scroll_offset_px: int
    viewport_h_px: int
    content_h_px: int

    def validate(self) -> None:
        if self.viewport_h_px <= 0 or self.content_h_px <= 0:
            raise ValueError("viewport and content heights must be positive")
        if self.scroll_offset_px < 0:
            raise ValueError("scroll offset must be non-negative")


@dataclass(frozen=True)
class JoinedSample:
    t_ms: int
    attention: int
    scroll_pct: float
    page_id: str


@dataclass(frozen=True)
class BucketStats:
    mean: float | None  # None marks an empty bucket
    count: int
    max: int | None


@dataclass(frozen=True)
class SectionProfile:
    """Per-page attention statistics over equal scroll-percentage sections.

    Bucket ``i`` covers [i*100/B, (i+1)*100/B); the last bucket is closed at
    100.  Carries no user identity.
    """

    page_id: str
    bucket_count: int
    buckets: tuple[BucketStats, ...]

    def total_count(self) -> int:
        return sum(b.count for b in self.buckets)

    def to_json_obj(self) -> dict:
        return {
            "page_id": self.page_id,
            "bucket_count": self.bucket_count,
            "buckets": [
                {"mean": b.mean, "count": b.count, "max": b.max} for b in self.buckets
            ],
        }

    @staticmethod
    def from_json_obj(obj: dict) -> "SectionProfile":
        return SectionProfile(
            page_id=obj["page_id"],
            bucket_count=obj["bucket_count"],
            buckets=tuple(
                BucketStats(b["mean"], b["count"], b["max"]) for b in obj["buckets"]
            ),
        )


class JoinResult(NamedTuple):
    joined: list[JoinedSample]
    dropped: int  # attention samples with no scroll partner within the skew


def scroll_percentage_raw(
    scroll_offset_px: float, viewport_h_px: float, content_h_px: float
) -> float:
    if viewport_h_px <= 0 or content_h_px <= 0:
        raise ValueError("viewport and content heights must be positive")
    return (2.0 * scroll_offset_px + viewport_h_px) / content_h_px * 100.0


def scroll_percentage(
    scroll_offset_px: float, viewport_h_px: float, content_h_px: float
) -> float:
    """Page-position percentage, clamped to [0, 100]."""
    return min(100.0, max(0.0, scroll_percentage_raw(scroll_offset_px, viewport_h_px, content_h_px)))


def _check_sorted(times: Sequence[int], what: str) -> None:
    for a, b in zip(times, times[1:]):
        if b < a:
            raise ValueError(f"{what} samples must be sorted by time")


def join_by_timestamp(
    attention: Sequence[Sample],
    scroll: Sequence[ScrollSample],
    max_skew_ms: int = 500,
) -> JoinResult:
    """Pair each attention sample with the nearest scroll sample in time.

    Ties break toward the earlier scroll sample (for equal timestamps, the
    first in input order); attention samples with no partner within
    ``max_skew_ms`` are dropped and counted.  One scroll sample may serve
    many attention samples.
    """
    _check_sorted([s.t_ms for s in attention], "attention")
    _check_sorted([s.t_ms for s in scroll], "scroll")
    # only the first of equal-timestamp scroll samples can win the tie rule
    deduped: list[ScrollSample] = []
    for s in scroll:
        if not deduped or s.t_ms != deduped[-1].t_ms:
            deduped.append(s)
    scroll = deduped
    scroll_times = [s.t_ms for s in scroll]

    joined: list[JoinedSample] = []
    dropped = 0
    for sample in attention:
        idx = bisect.bisect_left(scroll_times, sample.t_ms)
        best: ScrollSample | None = None
        best_dist: int | None = None
        # earlier candidate first so exact ties keep it
        for j in (idx - 1, idx):
            if 0 <= j < len(scroll):
                dist = abs(scroll_times[j] - sample.t_ms)
                if best_dist is None or dist < best_dist:
                    best, best_dist = scroll[j], dist
        if best is None or best_dist is None or best_dist > max_skew_ms:
            dropped += 1
            continue
        joined.append(
            JoinedSample(
                t_ms=sample.t_ms,
                attention=sample.value,
                scroll_pct=scroll_percentage(
                    best.scroll_offset_px, best.viewport_h_px, best.content_h_px
                ),
                page_id=best.page_id,
            )
        )
    return JoinResult(joined, dropped)


def bucket_index(scroll_pct: float, bucket_count: int) -> int:
    """min(floor(pct/100*B), B-1): equal half-open sections, last one closed."""
    return min(int(scroll_pct / 100.0 * bucket_count), bucket_count - 1)


def empty_profile(page_id: str, bucket_count: int) -> SectionProfile:
    return SectionProfile(
        page_id=page_id,
        bucket_count=bucket_count,
        buckets=tuple(BucketStats(None, 0, None) for _ in range(bucket_count)),
    )


def bucketize(
    joined: Sequence[JoinedSample],
    bucket_count: int,
    page_id: str | None = None,
) -> SectionProfile:
    """Per-bucket mean/count/max of attention over the page sections."""
    if bucket_count < 1:
        raise ValueError("bucket count must be at least 1")
    pages = {j.page_id for j in joined}
    if page_id is None:
        if len(pages) > 1:
            raise ValueError(f"mixed page ids {sorted(pages)}; bucketize one page at a time")
        page_id = next(iter(pages)) if pages else ""
    elif pages - {page_id}:
        raise ValueError(f"samples for {sorted(pages - {page_id})} mixed into {page_id!r}")

    sums = [0] * bucket_count
    counts = [0] * bucket_count
    maxima: list[int | None] = [None] * bucket_count
    for j in joined:
        b = bucket_index(j.scroll_pct, bucket_count)
        sums[b] += j.attention
        counts[b] += 1
        maxima[b] = j.attention if maxima[b] is None else max(maxima[b], j.attention)
    buckets = tuple(
        BucketStats(sums[i] / counts[i], counts[i], maxima[i])
        if counts[i]
        else BucketStats(None, 0, None)
        for i in range(bucket_count)
    )
    return SectionProfile(page_id=page_id, bucket_count=bucket_count, buckets=buckets)


def merge_profiles(profiles: Sequence[SectionProfile]) -> SectionProfile:
    """Pool profiles of one page: count-weighted means, summed counts, max of maxes."""
    if not profiles:
        raise ValueError("nothing to merge")
    first = profiles[0]
    for p in profiles[1:]:
        if p.page_id != first.page_id:
            raise ValueError(f"page id mismatch: {p.page_id!r} vs {first.page_id!r}")
        if p.bucket_count != first.bucket_count:
            raise ValueError(
                f"bucket count mismatch: {p.bucket_count} vs {first.bucket_count}"
            )
    buckets = []
    for i in range(first.bucket_count):
        count = sum(p.buckets[i].count for p in profiles)
        if count == 0:
            buckets.append(BucketStats(None, 0, None))
            continue
        weighted = sum(
            p.buckets[i].mean * p.buckets[i].count
            for p in profiles
            if p.buckets[i].count
        )
        maxima = [p.buckets[i].max for p in profiles if p.buckets[i].max is not None]
        buckets.append(BucketStats(weighted / count, count, max(maxima)))
    return SectionProfile(
        page_id=first.page_id, bucket_count=first.bucket_count, buckets=tuple(buckets)
    )


def profiles_from_records(
    records, bucket_count: int, max_skew_ms: int = 500
) -> tuple[list[SectionProfile], int]:
    """Join a session's attention and scroll records into per-page profiles.

    ``records`` are session records sorted by time (attention samples and
    scroll telemetry; other kinds are ignored).  Returns profiles sorted by
    page id plus the count of attention samples that found no scroll partner.
    """
    attention = [r.to_sample() for r in records if r.kind == "attention"]
    scroll = [
        ScrollSample(
            r.t_ms, r.page_id, r.scroll_offset_px, r.viewport_h_px, r.content_h_px
        )
        for r in records
        if r.kind == "scroll"
    ]
    joined, dropped = join_by_timestamp(attention, scroll, max_skew_ms)
    by_page: dict[str, list[JoinedSample]] = {}
    for j in joined:
        by_page.setdefault(j.page_id, []).append(j)
    profiles = [
        bucketize(by_page[page], bucket_count, page_id=page)
        for page in sorted(by_page)
    ]
    return profiles, dropped


CSV_HEADER = ["page_id", "scroll_pct_bucket", "mean", "count", "max"]


def profiles_to_csv(profiles: Sequence[SectionProfile]) -> str:
    """Fixed CSV schema for plotting attention-vs-page-section curves.

    One row per bucket of every profile; empty buckets keep blank mean/max so
    the section axis stays complete.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for profile in profiles:
        for i, b in enumerate(profile.buckets):
            writer.writerow(
                [
                    profile.page_id,
                    i,
                    "" if b.mean is None else repr(b.mean),
                    b.count,
                    "" if b.max is None else b.max,
                ]
            )
    return out.getvalue()
