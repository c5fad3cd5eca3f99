"""Time-tag persistence: canonical binary format and a CSV twin.

Binary layout (little-endian), 64-byte fixed header followed by an optional
metadata block and the records:

    magic          4 bytes   b"NPTT"
    version        u32       currently 1
    channel_count  u32       2 (0 = detector, 1 = sync)
    record_count   u64
    duration_ps    u64
    meta_len       u32       length of the canonical-JSON metadata block
    meta_digest    32 bytes  SHA-256 of the metadata block
    metadata       meta_len bytes (UTF-8 canonical JSON, omitted when empty)
    records        record_count * (channel u8, timestamp_ps u64)

Records are sorted by (timestamp, channel), so encoding a given stream is
canonical: the same stream always produces the same bytes. An empty stream
with empty metadata is exactly the 64-byte header.

The CSV twin has the schema `channel,timestamp_ps` with a one-line header;
run duration and metadata ride along in leading `#`-comment lines so the
text form round-trips too.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from .errors import FormatError, StreamValidationError
from .simulation import TimeTagStream

MAGIC = b"NPTT"
VERSION = 1
CHANNEL_DETECTOR = 0
CHANNEL_SYNC = 1

_HEADER = struct.Struct("<4sIIQQI32s")
_RECORD = struct.Struct("<BQ")
HEADER_SIZE = _HEADER.size  # 64


def _canonical_metadata(metadata: dict) -> bytes:
    if not metadata:
        return b""
    return json.dumps(metadata, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _merged_records(stream: TimeTagStream) -> np.ndarray:
    """All records as an (n, 2) array of (channel, timestamp), sorted by
    (timestamp, channel)."""
    det = stream.detector_events
    syn = stream.sync_events
    channels = np.concatenate(
        [np.zeros(det.size, np.int64), np.ones(syn.size, np.int64)]
    )
    stamps = np.concatenate([det, syn])
    order = np.lexsort((channels, stamps))
    return np.stack([channels[order], stamps[order]], axis=1)


def write_stream(stream: TimeTagStream, path) -> None:
    """Canonical binary encoding; identical streams give identical bytes."""
    meta = _canonical_metadata(stream.metadata)
    records = _merged_records(stream)
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                MAGIC,
                VERSION,
                2,
                records.shape[0],
                stream.duration_ps,
                len(meta),
                hashlib.sha256(meta).digest(),
            )
        )
        fh.write(meta)
        for channel, stamp in records:
            fh.write(_RECORD.pack(int(channel), int(stamp)))


def write_stream_csv(stream: TimeTagStream, path) -> None:
    """CSV twin of the binary format (see module docstring)."""
    meta = _canonical_metadata(stream.metadata)
    records = _merged_records(stream)
    with open(path, "w", newline="") as fh:
        fh.write(f"# duration_ps={stream.duration_ps}\n")
        if meta:
            fh.write("# metadata=" + meta.decode("utf-8") + "\n")
        fh.write("channel,timestamp_ps\n")
        for channel, stamp in records:
            fh.write(f"{channel},{stamp}\n")


def read_stream(path) -> TimeTagStream:
    """Read either encoding back; the binary magic selects the parser."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return _read_binary(path)
    try:
        return _read_csv(path)
    except UnicodeDecodeError:
        raise FormatError(
            f"bad magic {head!r} (expected {MAGIC!r}) and not a CSV time-tag file"
        ) from None


def _split_channels(channels, stamps, duration_ps, metadata) -> TimeTagStream:
    channels = np.asarray(channels, dtype=np.int64)
    stamps = np.asarray(stamps, dtype=np.int64)
    bad = np.nonzero((channels < 0) | (channels > 1))[0]
    if bad.size:
        raise FormatError(f"record {bad[0]}: channel {channels[bad[0]]} is not 0 or 1")
    if stamps.size and np.any(np.diff(stamps) < 0):
        idx = int(np.nonzero(np.diff(stamps) < 0)[0][0]) + 1
        raise StreamValidationError(
            f"record {idx}: timestamp {stamps[idx]} breaks file-order monotonicity"
        )
    for channel in (CHANNEL_DETECTOR, CHANNEL_SYNC):
        sel = np.nonzero(channels == channel)[0]
        ch_stamps = stamps[sel]
        if ch_stamps.size and np.any(np.diff(ch_stamps) <= 0):
            idx = int(sel[np.nonzero(np.diff(ch_stamps) <= 0)[0][0] + 1])
            raise StreamValidationError(
                f"record {idx}: duplicate or decreasing timestamp on channel {channel}"
            )
        if ch_stamps.size and (ch_stamps[0] < 0 or ch_stamps[-1] > duration_ps):
            raise StreamValidationError(
                f"channel {channel} timestamps fall outside [0, duration]"
            )
    return TimeTagStream(
        stamps[channels == CHANNEL_DETECTOR],
        stamps[channels == CHANNEL_SYNC],
        duration_ps,
        metadata,
    )


def _read_binary(path) -> TimeTagStream:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER_SIZE:
        raise FormatError(f"file too short for a {HEADER_SIZE}-byte header")
    magic, version, channel_count, n_records, duration_ps, meta_len, digest = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported format version {version}")
    if channel_count != 2:
        raise FormatError(f"unsupported channel count {channel_count}")
    meta_end = HEADER_SIZE + meta_len
    expected = meta_end + n_records * _RECORD.size
    if len(raw) != expected:
        raise FormatError(
            f"file size {len(raw)} does not match header (expected {expected})"
        )
    meta_bytes = raw[HEADER_SIZE:meta_end]
    if hashlib.sha256(meta_bytes).digest() != digest:
        raise FormatError("metadata digest mismatch")
    metadata = json.loads(meta_bytes.decode("utf-8")) if meta_len else {}
    records = np.frombuffer(
        raw, dtype=np.dtype([("channel", "u1"), ("timestamp", "<u8")]), offset=meta_end
    )
    channels = records["channel"].astype(np.int64)
    stamps = records["timestamp"].astype(np.int64)
    return _split_channels(channels, stamps, int(duration_ps), metadata)


def _read_csv(path) -> TimeTagStream:
    duration_ps = None
    metadata: dict = {}
    channels: list[int] = []
    stamps: list[int] = []
    with open(path, "r", newline="") as fh:
        header_seen = False
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("duration_ps="):
                    duration_ps = int(body.split("=", 1)[1])
                elif body.startswith("metadata="):
                    metadata = json.loads(body.split("=", 1)[1])
                continue
            if not header_seen:
                if line.replace(" ", "") != "channel,timestamp_ps":
                    raise FormatError(
                        f"line {lineno}: expected header 'channel,timestamp_ps'"
                    )
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise FormatError(f"line {lineno}: expected two comma-separated fields")
            try:
                channels.append(int(parts[0]))
                stamps.append(int(parts[1]))
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}") from None
    if not header_seen:
        raise FormatError("missing 'channel,timestamp_ps' header line")
    if duration_ps is None:
        duration_ps = max(stamps) if stamps else 0
    return _split_channels(channels, stamps, duration_ps, metadata)
