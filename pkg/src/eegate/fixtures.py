"""Deterministic fixture generators: committed sessions, scenarios, and the wire corpus.

Everything here is seeded; ``eegate fixtures`` rewrites the ``fixtures/``
tree byte-for-byte, and a test keeps the committed files honest.  The
sessions are synthetic analogues of the published recordings (a blink
trial with two deliberate pairs, a 30 s reading task, a mid-page-peaked
page scan), never the original data.
"""

from __future__ import annotations

import math
import os
import random

from .session import (
    Segment,
    SessionRecord,
    SynthScenario,
    save_scenario,
    synthesize,
    write_session_file,
)
from .wire import attention_row, blink_row, encode_packet, meditation_row, raw_row, signal_quality_row

PAGE_ID = "wiki-home"


def fig3_blink_trial_scenario() -> SynthScenario:
    """Blink trial: casual blinks (delta < 20) around two deliberate pairs."""
    return SynthScenario(
        seed=303,
        segments=(Segment(14_000, 42, 6),),
        blink_script=(
            (1000, 8),     # casual: delta 8 from the zero seed
            (2500, 12),    # casual: delta 4
            (4000, 45),    # deliberate: delta 33 -- pair 1 opens
            (4200, 18),    # casual relax between the pair's blinks
            (4500, 50),    # deliberate: delta 32 -- pair 1 closes, gap 500 ms
            (6000, 25),    # casual: delta -25
            (7500, 30),    # casual: delta 5
            (9000, 55),    # deliberate: delta 25 -- pair 2 opens
            (9300, 80),    # deliberate: delta 25 -- pair 2 closes, gap 300 ms
            (11_000, 85),  # casual: delta 5
            (12_000, 90),  # casual: delta 5
        ),
    )


def fig4_reading_scenario() -> SynthScenario:
    """30 s news-article reading trace; every sample stays over the stock threshold."""
    return SynthScenario(seed=404, segments=(Segment(30_000, 62, 7),))


def fig6_page_scan_records() -> list[SessionRecord]:
    """A 60 s scan of a long page with attention peaking mid-page.

    Scroll telemetry every second sweeps top to bottom of a 4000 px page in
    an 800 px viewport; attention follows a Gaussian bump centered at 50 %.
    """
    rng = random.Random(606)
    content, viewport = 4000, 800
    max_offset = content - viewport
    records: list[SessionRecord] = []
    for t in range(0, 60_000, 1000):
        offset = round(max_offset * t / 58_000) if t < 58_000 else max_offset
        records.append(SessionRecord.scroll(t, PAGE_ID, offset, viewport, content))
    for t in range(0, 60_000, 1000):
        offset = min(max_offset, max_offset * t / 58_000)
        pct = (2 * offset + viewport) / content * 100
        bump = 55 * math.exp(-((pct - 50.0) ** 2) / (2 * 18.0**2))
        value = round(25 + bump + rng.gauss(0, 3))
        records.append(
            SessionRecord.sample(t, "attention", max(1, min(100, value)))
        )
    records.sort(key=lambda r: r.t_ms)
    return records


def raw_burst_records() -> list[SessionRecord]:
    """One second of 512 Hz raw EEG (8 Hz alpha-band sine plus noise)."""
    rng = random.Random(512)
    records = []
    for i in range(512):
        t = i * 1000 // 512
        value = round(1200 * math.sin(2 * math.pi * 8 * i / 512) + rng.gauss(0, 60))
        records.append(SessionRecord.sample(t, "raw", max(-32768, min(32767, value))))
    return records


def _hex_lines(title: str, frames: list[tuple[str, bytes]]) -> str:
    lines = [f"# {title}", "# one hex-encoded byte string per line; '#' starts a comment"]
    for comment, blob in frames:
        lines.append(f"# {comment}")
        lines.append(blob.hex())
    return "\n".join(lines) + "\n"


def wire_corpus() -> dict[str, str]:
    """Hex fixture corpus for the frame decoder: valid, corrupted, truncated, noisy."""
    att = encode_packet([attention_row(50)])
    blink = encode_packet([blink_row(60)])
    multi = encode_packet(
        [signal_quality_row(0), attention_row(87), meditation_row(53), blink_row(12)]
    )
    raw = encode_packet([raw_row(256)])
    neg_raw = encode_packet([raw_row(-1)])

    corrupted_checksum = att[:-1] + bytes([att[-1] ^ 0xFF])
    corrupted_payload = att[:4] + bytes([att[4] ^ 0x01]) + att[5:]
    bad_length = b"\xaa\xaa\xff" + att[3:]

    noisy = b"\x00\x13\x37" + att + b"\xaa" + multi + b"\xfe\xfd" + raw + blink

    return {
        "valid_frames.hex": _hex_lines(
            "well-formed frames",
            [
                ("attention 50", att),
                ("blink strength 60", blink),
                ("signal quality 0, attention 87, meditation 53, blink 12", multi),
                ("raw sample +256", raw),
                ("raw sample -1", neg_raw),
            ],
        ),
        "corrupted_frames.hex": _hex_lines(
            "frames that must be rejected",
            [
                ("checksum byte flipped", corrupted_checksum),
                ("payload bit flipped", corrupted_payload),
                ("declared length exceeds the 169 cap", bad_length),
            ],
        ),
        "truncated_stream.hex": _hex_lines(
            "streams cut mid-frame",
            [
                ("frame missing its checksum byte", att[:-1]),
                ("sync pair then length only", att[:3]),
                ("lone sync byte", att[:1]),
            ],
        ),
        "noisy_stream.hex": _hex_lines(
            "garbage-interleaved stream; decodes to 4 packets",
            [("mixed garbage and frames", noisy)],
        ),
    }


def load_hex_fixture(path: str) -> list[bytes]:
    """Read one hex corpus file; returns the byte string per non-comment line."""
    blobs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                blobs.append(bytes.fromhex(line))
    return blobs


def write_all(out_dir: str) -> list[str]:
    """Regenerate every committed fixture under ``out_dir``; returns the paths."""
    corpus_dir = os.path.join(out_dir, "corpus")
    os.makedirs(corpus_dir, exist_ok=True)
    written = []

    for name, scenario in (
        ("fig3_blink_trial", fig3_blink_trial_scenario()),
        ("fig4_reading", fig4_reading_scenario()),
    ):
        scenario_path = os.path.join(out_dir, f"{name}.scenario.json")
        save_scenario(scenario_path, scenario)
        written.append(scenario_path)
        session_path = os.path.join(out_dir, f"{name}.session")
        write_session_file(session_path, synthesize(scenario))
        written.append(session_path)

    for name, records in (
        ("fig6_page_scan", fig6_page_scan_records()),
        ("raw_burst", raw_burst_records()),
    ):
        path = os.path.join(out_dir, f"{name}.session")
        write_session_file(path, records)
        written.append(path)

    for name, text in wire_corpus().items():
        path = os.path.join(corpus_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(path)

    return written
