"""Durable measurement storage: append-only log, columnar snapshots.

On-disk format is one JSON object per line carrying the eight report fields
in canonical order, timestamps as ISO-8601 UTC ("2021-02-01T00:15:00Z").
The simulator writes the same format, and load/export use it as the
interchange format.

Concurrency contract: one writer at a time (serialized internally); any
number of concurrent snapshot readers. An accepted ingest is flushed and
fsynced to the log before the call returns, so it survives a hard kill of
the process.
"""

from __future__ import annotations

import json
import re
import logging
import os
import sys
import threading
from array import array
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import mercator
from .errors import AppError, BadRange, BadRecord, UnknownSite
from .model import (
    Measurement,
    check_report_values,
    epoch_us,
    format_timestamp,
    from_epoch_us,
    record_fields,
)

log = logging.getLogger(__name__)

_FieldTuple = "tuple[str, str, int, float, float, float, float, float]"


def _format_fields(device_id: str, site_id: str, ts_us: int, lat: float, lon: float,
                   ping: float, up: float, down: float) -> str:
    """One dataset-file line (no trailing newline)."""
    return json.dumps(
        {
            "device_id": device_id,
            "site_id": site_id,
            "timestamp": format_timestamp(from_epoch_us(ts_us)),
            "latitude": lat,
            "longitude": lon,
            "ping_ms": ping,
            "upload_mbps": up,
            "download_mbps": down,
        },
        separators=(",", ":"),
        ensure_ascii=False,
    )


def format_record(measurement: Measurement) -> str:
    """Serialize a measurement to its dataset-file line."""
    return _format_fields(
        measurement.device_id,
        measurement.site_id,
        epoch_us(measurement.timestamp),
        measurement.latitude,
        measurement.longitude,
        measurement.ping_ms,
        measurement.upload_mbps,
        measurement.download_mbps,
    )


_NAIVE_EPOCH = datetime(1970, 1, 1)

_NUM = r"(-?[0-9][0-9.eE+-]*)"
_CANONICAL_LINE = re.compile(
    r'\{"device_id":"([^"\\]+)","site_id":"([^"\\]+)",'
    r'"timestamp":"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(?:\.\d{1,6})?)Z",'
    rf'"latitude":{_NUM},"longitude":{_NUM},'
    rf'"ping_ms":{_NUM},"upload_mbps":{_NUM},"download_mbps":{_NUM}\}}\s*$'
)


def _parse_canonical(line: str):
    """Regex fast path for lines in our exact output shape, else None."""
    match = _CANONICAL_LINE.match(line)
    if match is None:
        return None
    device_id, site_id, ts, lat, lon, ping, up, down = match.groups()
    try:
        delta = datetime.fromisoformat(ts) - _NAIVE_EPOCH
        fields = (device_id, site_id,
                  (delta.days * 86_400 + delta.seconds) * 1_000_000 + delta.microseconds,
                  float(lat), float(lon), float(ping), float(up), float(down))
    except ValueError:
        return None
    check_report_values(device_id, site_id, *fields[3:])
    return fields


def _parse_line(line: str):
    """Parse + validate one dataset line into canonical field values.

    Hot path for replay/bulk load: lines in our exact output shape skip JSON
    decoding entirely; other JSON objects take an inline common-case path;
    everything else falls back to the general record_fields path, which
    raises the precise typed error.
    """
    fast = _parse_canonical(line)
    if fast is not None:
        return fast
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise BadRecord(f"not valid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise BadRecord("record line must be a JSON object")
    try:
        ts = obj["timestamp"]
        if not (type(ts) is str and ts.endswith("Z")):
            return record_fields(obj)
        delta = datetime.fromisoformat(ts[:-1]) - _NAIVE_EPOCH
        ts_us = (delta.days * 86_400 + delta.seconds) * 1_000_000 + delta.microseconds
        device_id = obj["device_id"]
        site_id = obj["site_id"]
        lat = obj["latitude"]
        lon = obj["longitude"]
        ping = obj["ping_ms"]
        up = obj["upload_mbps"]
        down = obj["download_mbps"]
        if not (
            type(device_id) is str and type(site_id) is str
            and type(lat) in (int, float) and type(lon) in (int, float)
            and type(ping) in (int, float) and type(up) in (int, float)
            and type(down) in (int, float)
        ):
            return record_fields(obj)
    except (KeyError, ValueError, TypeError):
        return record_fields(obj)
    check_report_values(device_id, site_id, lat, lon, ping, up, down)
    return device_id, site_id, ts_us, float(lat), float(lon), float(ping), float(up), float(down)


def parse_record(line: str) -> Measurement:
    """Parse one dataset-file line back into a Measurement."""
    device_id, site_id, ts_us, lat, lon, ping, up, down = _parse_line(line)
    return Measurement(device_id, site_id, from_epoch_us(ts_us), lat, lon, ping, up, down)


@dataclass(frozen=True)
class QueryFilter:
    """Site and half-open [start, end) time predicates for snapshot reads."""

    site_ids: frozenset[str] | None = None
    start: datetime | None = None
    end: datetime | None = None

    def __post_init__(self):
        if self.site_ids is not None:
            object.__setattr__(self, "site_ids", frozenset(self.site_ids))
        if self.start is not None and self.end is not None and self.start >= self.end:
            raise BadRange(f"empty time range: {self.start} >= {self.end}")


class ColumnPart:
    """An immutable columnar block of accepted measurements.

    Zoom-0 world pixel coordinates are precomputed here once; scaling them by
    2^zoom is exact in binary floating point, so per-request projection
    reduces to one multiply.
    """

    __slots__ = ("n", "device_ids", "site_codes", "ts_us", "lats", "lons",
                 "x0", "y0", "pings", "uploads", "downloads", "ts_min", "ts_max")

    def __init__(self, device_ids: tuple[str, ...], site_codes, ts_us, lats, lons,
                 pings, uploads, downloads, x0=None, y0=None):
        self.device_ids = device_ids
        self.site_codes = np.ascontiguousarray(site_codes, dtype=np.int32)
        self.ts_us = np.ascontiguousarray(ts_us, dtype=np.int64)
        self.lats = np.ascontiguousarray(lats, dtype=np.float64)
        self.lons = np.ascontiguousarray(lons, dtype=np.float64)
        self.pings = np.ascontiguousarray(pings, dtype=np.float64)
        self.uploads = np.ascontiguousarray(uploads, dtype=np.float64)
        self.downloads = np.ascontiguousarray(downloads, dtype=np.float64)
        if x0 is None or y0 is None:
            self.x0, self.y0 = mercator.project_many(self.lats, self.lons, 0)
        else:
            self.x0 = np.ascontiguousarray(x0, dtype=np.float64)
            self.y0 = np.ascontiguousarray(y0, dtype=np.float64)
        self.n = len(self.ts_us)
        self.ts_min = int(self.ts_us.min()) if self.n else 0
        self.ts_max = int(self.ts_us.max()) if self.n else 0
        for arr in (self.site_codes, self.ts_us, self.lats, self.lons,
                    self.pings, self.uploads, self.downloads, self.x0, self.y0):
            arr.setflags(write=False)

    def subset(self, idx: np.ndarray) -> "ColumnPart":
        ids = self.device_ids
        return ColumnPart(
            tuple(ids[k] for k in idx),
            self.site_codes[idx], self.ts_us[idx], self.lats[idx], self.lons[idx],
            self.pings[idx], self.uploads[idx], self.downloads[idx],
            x0=self.x0[idx], y0=self.y0[idx],
        )


class Snapshot:
    """A consistent, immutable view of the store at one ingest sequence."""

    def __init__(self, parts: Sequence[ColumnPart], site_table: Sequence[str], sequence: int):
        self.parts = tuple(p for p in parts if p.n)
        self.site_table = tuple(site_table)
        self.sequence = sequence
        self._code_of = {site_id: code for code, site_id in enumerate(self.site_table)}

    def __len__(self) -> int:
        return sum(p.n for p in self.parts)

    @property
    def min_ts_us(self) -> int | None:
        return min((p.ts_min for p in self.parts), default=None)

    @property
    def max_ts_us(self) -> int | None:
        return max((p.ts_max for p in self.parts), default=None)

    def site_code(self, site_id: str) -> int | None:
        return self._code_of.get(site_id)

    def codes_for(self, site_ids: Iterable[str]) -> list[int]:
        codes = {self._code_of[s] for s in site_ids if s in self._code_of}
        return sorted(codes)

    def iter_measurements(self) -> Iterator[Measurement]:
        table = self.site_table
        for p in self.parts:
            codes = p.site_codes.tolist()
            ts = p.ts_us.tolist()
            lats = p.lats.tolist()
            lons = p.lons.tolist()
            pings = p.pings.tolist()
            ups = p.uploads.tolist()
            downs = p.downloads.tolist()
            for k, device_id in enumerate(p.device_ids):
                yield Measurement(device_id, table[codes[k]], from_epoch_us(ts[k]),
                                  lats[k], lons[k], pings[k], ups[k], downs[k])

    def measurements(self) -> list[Measurement]:
        return list(self.iter_measurements())

    @classmethod
    def from_measurements(cls, measurements: Iterable[Measurement]) -> "Snapshot":
        ms = list(measurements)
        table = sorted({m.site_id for m in ms})
        code = {s: c for c, s in enumerate(table)}
        part = ColumnPart(
            tuple(m.device_id for m in ms),
            np.fromiter((code[m.site_id] for m in ms), dtype=np.int32, count=len(ms)),
            np.fromiter((epoch_us(m.timestamp) for m in ms), dtype=np.int64, count=len(ms)),
            np.fromiter((m.latitude for m in ms), dtype=np.float64, count=len(ms)),
            np.fromiter((m.longitude for m in ms), dtype=np.float64, count=len(ms)),
            np.fromiter((m.ping_ms for m in ms), dtype=np.float64, count=len(ms)),
            np.fromiter((m.upload_mbps for m in ms), dtype=np.float64, count=len(ms)),
            np.fromiter((m.download_mbps for m in ms), dtype=np.float64, count=len(ms)),
        )
        return cls([part], table, len(ms))

    def filtered(self, query: QueryFilter) -> "Snapshot":
        lo = epoch_us(query.start) if query.start is not None else None
        hi = epoch_us(query.end) if query.end is not None else None
        wanted = None
        if query.site_ids is not None:
            wanted = np.array(self.codes_for(query.site_ids), dtype=np.int32)
        parts = []
        kept = 0
        for p in self.parts:
            mask = np.ones(p.n, dtype=bool)
            if wanted is not None:
                mask &= np.isin(p.site_codes, wanted)
            if lo is not None:
                mask &= p.ts_us >= lo
            if hi is not None:
                mask &= p.ts_us < hi
            idx = np.flatnonzero(mask)
            if len(idx):
                parts.append(p.subset(idx))
                kept += len(idx)
        return Snapshot(parts, self.site_table, kept)


class _TailBuilder:
    """Mutable column accumulators for records not yet sealed into a part."""

    def __init__(self):
        self.device_ids: list[str] = []
        self.site_codes = array("i")
        self.ts_us = array("q")
        self.lats = array("d")
        self.lons = array("d")
        self.pings = array("d")
        self.uploads = array("d")
        self.downloads = array("d")

    def __len__(self) -> int:
        return len(self.device_ids)

    def append(self, device_id: str, site_code: int, ts_us: int, lat: float, lon: float,
               ping: float, up: float, down: float) -> None:
        self.device_ids.append(sys.intern(device_id))
        self.site_codes.append(site_code)
        self.ts_us.append(ts_us)
        self.lats.append(lat)
        self.lons.append(lon)
        self.pings.append(ping)
        self.uploads.append(up)
        self.downloads.append(down)

    def to_part(self) -> ColumnPart:
        return ColumnPart(
            tuple(self.device_ids),
            np.frombuffer(self.site_codes, dtype=np.int32).copy() if len(self) else np.empty(0, np.int32),
            np.frombuffer(self.ts_us, dtype=np.int64).copy() if len(self) else np.empty(0, np.int64),
            np.frombuffer(self.lats, dtype=np.float64).copy() if len(self) else np.empty(0, np.float64),
            np.frombuffer(self.lons, dtype=np.float64).copy() if len(self) else np.empty(0, np.float64),
            np.frombuffer(self.pings, dtype=np.float64).copy() if len(self) else np.empty(0, np.float64),
            np.frombuffer(self.uploads, dtype=np.float64).copy() if len(self) else np.empty(0, np.float64),
            np.frombuffer(self.downloads, dtype=np.float64).copy() if len(self) else np.empty(0, np.float64),
        )


class MeasurementStore:
    """Append-only measurement log with snapshot reads.

    The file at `path` is the log itself: it is replayed on open and every
    accepted ingest appends one line to it. When `known_sites` is given,
    records naming other sites are rejected with UnknownSite.
    """

    SEAL_THRESHOLD = 8192

    def __init__(self, path, known_sites: Iterable[str] | None = None, fsync: bool = True):
        self._path = os.fspath(path)
        self._fsync = fsync
        self._lock = threading.Lock()
        self._known = frozenset(known_sites) if known_sites is not None else None
        self._site_table: list[str] = list(known_sites) if known_sites is not None else []
        self._code_of = {s: c for c, s in enumerate(self._site_table)}
        self._sealed: list[ColumnPart] = []
        self._tail = _TailBuilder()
        self._tail_part: ColumnPart | None = None  # cache: tail as-of last snapshot
        self._count = 0
        self._replay()
        self._file = open(self._path, "a", encoding="utf-8")

    # -- lifecycle -----------------------------------------------------------

    def _truncate_torn_tail(self) -> None:
        """Drop a final unterminated line (a write the crash never acked)."""
        size = os.path.getsize(self._path)
        if size == 0:
            return
        with open(self._path, "rb+") as fh:
            fh.seek(size - 1)
            if fh.read(1) == b"\n":
                return
            tail_start = max(0, size - 65536)
            fh.seek(tail_start)
            tail = fh.read()
            cut = tail_start + tail.rfind(b"\n") + 1
            fh.truncate(cut)
        log.warning("%s: dropped torn final line (%d bytes, never acknowledged)",
                    self._path, size - cut)

    def _replay(self) -> None:
        """Rebuild in-memory columns from the log."""
        if not os.path.exists(self._path):
            return
        self._truncate_torn_tail()
        bad = 0
        with open(self._path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    self._append_fields(_parse_line(line))
                except AppError as exc:
                    bad += 1
                    if bad <= 20:
                        log.warning("%s:%d: skipped bad record (%s)", self._path, lineno, exc)
        self._seal_tail()
        if bad:
            log.warning("%s: %d bad record(s) skipped during replay", self._path, bad)

    def close(self) -> None:
        self._file.close()

    def __enter__(self) -> "MeasurementStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- writes --------------------------------------------------------------

    def _site_code_locked(self, site_id: str) -> int:
        code = self._code_of.get(site_id)
        if code is None:
            if self._known is not None:
                raise UnknownSite(site_id)
            code = len(self._site_table)
            self._site_table.append(site_id)
            self._code_of[site_id] = code
        return code

    def _append_fields(self, fields) -> int:
        """Index one validated record; bulk callers seal the tail themselves."""
        device_id, site_id, ts_us, lat, lon, ping, up, down = fields
        code = self._site_code_locked(site_id)
        self._tail.append(device_id, code, ts_us, lat, lon, ping, up, down)
        self._tail_part = None
        self._count += 1
        return self._count

    def _seal_tail(self) -> None:
        if len(self._tail):
            self._sealed.append(self._tail.to_part())
            self._tail = _TailBuilder()
            self._tail_part = None

    def ingest(self, record: Mapping[str, object] | Measurement) -> int:
        """Validate, persist, and index one record; returns its sequence number.

        The record is durable (written, flushed, fsynced) before this returns.
        """
        if isinstance(record, Measurement):
            fields = (record.device_id, record.site_id, epoch_us(record.timestamp),
                      record.latitude, record.longitude,
                      record.ping_ms, record.upload_mbps, record.download_mbps)
        else:
            fields = record_fields(record)
        with self._lock:
            if self._known is not None and fields[1] not in self._known:
                raise UnknownSite(fields[1])
            self._file.write(_format_fields(*fields) + "\n")
            self._file.flush()
            if self._fsync:
                os.fsync(self._file.fileno())
            sequence = self._append_fields(fields)
            if len(self._tail) >= self.SEAL_THRESHOLD:
                self._seal_tail()
            return sequence

    def load_dataset(self, path) -> tuple[int, list[tuple[int, AppError]]]:
        """Append every valid record from a dataset file; report bad lines.

        Returns (records loaded, [(line number, error), ...]). Valid records
        become durable in this store's own log.
        """
        path = os.fspath(path)
        errors: list[tuple[int, AppError]] = []
        loaded = 0
        with open(path, "r", encoding="utf-8") as fh, self._lock:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    fields = _parse_line(line)
                    if self._known is not None and fields[1] not in self._known:
                        raise UnknownSite(fields[1])
                except AppError as exc:
                    errors.append((lineno, exc))
                    continue
                self._file.write(_format_fields(*fields) + "\n")
                self._append_fields(fields)
                loaded += 1
            self._file.flush()
            if self._fsync:
                os.fsync(self._file.fileno())
            self._seal_tail()
        return loaded, errors

    # -- reads ---------------------------------------------------------------

    def snapshot(self, query: QueryFilter | None = None) -> Snapshot:
        """An immutable view of everything accepted so far."""
        with self._lock:
            if self._tail_part is None:
                self._tail_part = self._tail.to_part()
            parts = (*self._sealed, self._tail_part)
            snap = Snapshot(parts, self._site_table, self._count)
        if query is not None:
            snap = snap.filtered(query)
        return snap

    def export_dataset(self, path) -> int:
        """Write every stored record, in ingest order, to a dataset file."""
        snap = self.snapshot()
        written = 0
        with open(os.fspath(path), "w", encoding="utf-8") as fh:
            for p in snap.parts:
                codes = p.site_codes.tolist()
                ts = p.ts_us.tolist()
                lats = p.lats.tolist()
                lons = p.lons.tolist()
                pings = p.pings.tolist()
                ups = p.uploads.tolist()
                downs = p.downloads.tolist()
                for k, device_id in enumerate(p.device_ids):
                    fh.write(_format_fields(device_id, snap.site_table[codes[k]], ts[k],
                                            lats[k], lons[k], pings[k], ups[k], downs[k]) + "\n")
                    written += 1
        return written

    @property
    def count(self) -> int:
        with self._lock:
            return self._count

    @property
    def path(self) -> str:
        return self._path
