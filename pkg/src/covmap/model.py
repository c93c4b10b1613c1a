"""Shared domain vocabulary: measurements, sites, metrics, hour buckets.

All values here are immutable after construction and safe to share across
threads. Timestamps are stored and compared in UTC only; inputs carrying
another offset are normalized on the way in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import ClassVar, Mapping

from .errors import BadMetric, BadTimestamp, MissingField, OutOfRange

UTC = timezone.utc

_EPOCH = datetime(1970, 1, 1, tzinfo=UTC)

#: The eight fields of one device report, in canonical record order.
MEASUREMENT_FIELDS = (
    "device_id",
    "site_id",
    "timestamp",
    "latitude",
    "longitude",
    "ping_ms",
    "upload_mbps",
    "download_mbps",
)


class MetricKind(Enum):
    """The three connection-quality metrics a device reports."""

    PING = "ping"
    UPLOAD = "upload"
    DOWNLOAD = "download"

    @classmethod
    def parse(cls, value: str) -> "MetricKind":
        """Map an API metric string to its member, or raise BadMetric."""
        try:
            return cls(value)
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise BadMetric(f"unknown metric {value!r}; expected one of: {choices}") from None


class SiteStatus(Enum):
    """Deployment status of a base station, as configured."""

    ACTIVE = "active"
    CONFIRMED = "confirmed"
    IN_PROGRESS = "in-progress"

    @classmethod
    def parse(cls, value: str) -> "SiteStatus":
        try:
            return cls(value)
        except ValueError:
            choices = ", ".join(s.value for s in cls)
            raise OutOfRange("status", f"unknown status {value!r}; expected one of: {choices}") from None


def parse_timestamp(value: object) -> datetime:
    """Parse an instant from a datetime or ISO-8601 string; normalize to UTC.

    Naive inputs (no offset) are rejected rather than assumed UTC.
    """
    if isinstance(value, datetime):
        if value.tzinfo is None:
            raise BadTimestamp("naive datetime; timestamps must carry a UTC offset")
        return value.astimezone(UTC)
    if isinstance(value, str):
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        try:
            parsed = datetime.fromisoformat(text)
        except ValueError:
            raise BadTimestamp(f"not an ISO-8601 instant: {value!r}") from None
        if parsed.tzinfo is None:
            raise BadTimestamp(f"timestamp {value!r} has no UTC offset")
        return parsed.astimezone(UTC)
    raise BadTimestamp(f"timestamp must be an ISO-8601 string or datetime, got {type(value).__name__}")


def format_timestamp(instant: datetime) -> str:
    """ISO-8601 UTC with a Z suffix; fractional seconds only when nonzero."""
    instant = instant.astimezone(UTC)
    base = instant.strftime("%Y-%m-%dT%H:%M:%S")
    if instant.microsecond:
        return f"{base}.{instant.microsecond:06d}Z"
    return base + "Z"


def epoch_us(instant: datetime) -> int:
    """Microseconds since the Unix epoch, computed exactly."""
    delta = instant.astimezone(UTC) - _EPOCH
    return (delta.days * 86_400 + delta.seconds) * 1_000_000 + delta.microseconds


def from_epoch_us(us: int) -> datetime:
    """Exact inverse of epoch_us."""
    return _EPOCH + timedelta(microseconds=us)


def hour_floor(instant: datetime) -> datetime:
    """Truncate an instant to the whole UTC hour containing it."""
    return instant.astimezone(UTC).replace(minute=0, second=0, microsecond=0)


@dataclass(frozen=True)
class TimeBucket:
    """A whole UTC hour; the granularity of the time-series aggregates."""

    start: datetime

    DURATION: ClassVar[timedelta] = timedelta(hours=1)

    def __post_init__(self):
        start = self.start
        if start.tzinfo is None:
            raise ValueError("TimeBucket.start must be timezone-aware")
        start = start.astimezone(UTC)
        if start.minute or start.second or start.microsecond:
            raise ValueError("TimeBucket.start must be aligned to a whole UTC hour")
        object.__setattr__(self, "start", start)

    @classmethod
    def containing(cls, instant: datetime) -> "TimeBucket":
        return cls(hour_floor(instant))

    @property
    def end(self) -> datetime:
        return self.start + self.DURATION


def check_report_values(
    device_id: str,
    site_id: str,
    latitude: float,
    longitude: float,
    ping_ms: float,
    upload_mbps: float,
    download_mbps: float,
) -> None:
    """Enforce the report range rules; single source shared with bulk loading.

    Comparisons are written so that NaN fails them as well.
    """
    if not device_id or not device_id.strip():
        raise MissingField("device_id")
    if not site_id or not site_id.strip():
        raise MissingField("site_id")
    if not (-90.0 <= latitude <= 90.0):
        raise OutOfRange("latitude", f"latitude {latitude} outside [-90, 90]")
    if not (-180.0 <= longitude <= 180.0):
        raise OutOfRange("longitude", f"longitude {longitude} outside [-180, 180]")
    if not (ping_ms > 0.0) or math.isinf(ping_ms):
        raise OutOfRange("ping_ms", f"ping_ms must be a positive real, got {ping_ms}")
    if not (upload_mbps >= 0.0) or math.isinf(upload_mbps):
        raise OutOfRange("upload_mbps", f"upload_mbps must be a non-negative real, got {upload_mbps}")
    if not (download_mbps >= 0.0) or math.isinf(download_mbps):
        raise OutOfRange("download_mbps", f"download_mbps must be a non-negative real, got {download_mbps}")


@dataclass(frozen=True)
class Measurement:
    """One device report: where, when, and how the connection performed."""

    device_id: str
    site_id: str
    timestamp: datetime
    latitude: float
    longitude: float
    ping_ms: float
    upload_mbps: float
    download_mbps: float

    def __post_init__(self):
        ts = self.timestamp
        if not isinstance(ts, datetime) or ts.tzinfo is None:
            raise BadTimestamp("Measurement.timestamp must be a timezone-aware datetime")
        object.__setattr__(self, "timestamp", ts.astimezone(UTC))
        check_report_values(
            self.device_id,
            self.site_id,
            self.latitude,
            self.longitude,
            self.ping_ms,
            self.upload_mbps,
            self.download_mbps,
        )

    def metric(self, kind: MetricKind) -> float:
        return metric_of(self, kind)


def metric_of(measurement: Measurement, kind: MetricKind) -> float:
    """Project the metric selected by `kind` out of a measurement."""
    if kind is MetricKind.PING:
        return measurement.ping_ms
    if kind is MetricKind.UPLOAD:
        return measurement.upload_mbps
    if kind is MetricKind.DOWNLOAD:
        return measurement.download_mbps
    raise BadMetric(f"not a MetricKind: {kind!r}")


@dataclass(frozen=True)
class Site:
    """A configured base-station record."""

    site_id: str
    name: str
    address: str
    latitude: float
    longitude: float
    status: SiteStatus

    def __post_init__(self):
        if not self.site_id or not self.site_id.strip():
            raise MissingField("site_id")
        if not (-90.0 <= self.latitude <= 90.0):
            raise OutOfRange("latitude", f"site latitude {self.latitude} outside [-90, 90]")
        if not (-180.0 <= self.longitude <= 180.0):
            raise OutOfRange("longitude", f"site longitude {self.longitude} outside [-180, 180]")
        if not isinstance(self.status, SiteStatus):
            raise OutOfRange("status", f"status must be a SiteStatus, got {self.status!r}")


#: The three initially-deployed sites, used as simulator and server defaults.
#: Names are the deployed ones; coordinates/addresses are plausible stand-ins.
DEFAULT_SITES = (
    Site(
        site_id="david-tcn",
        name="David-TCN",
        address="1102 S 11th St, Tacoma, WA 98405",
        latitude=47.2502,
        longitude=-122.4443,
        status=SiteStatus.ACTIVE,
    ),
    Site(
        site_id="surgetacoma",
        name="SURGEtacoma",
        address="2367 Tacoma Ave S, Tacoma, WA 98402",
        latitude=47.2394,
        longitude=-122.4406,
        status=SiteStatus.ACTIVE,
    ),
    Site(
        site_id="filipino-cc",
        name="Filipino Community Center",
        address="5740 Martin Luther King Jr Way S, Seattle, WA 98118",
        latitude=47.5505,
        longitude=-122.2768,
        status=SiteStatus.CONFIRMED,
    ),
)


def _as_float(name: str, value: object) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise OutOfRange(name, f"{name} must be a number, got {type(value).__name__}")
    try:
        return float(value)
    except ValueError:
        raise OutOfRange(name, f"{name} is not a number: {value!r}") from None


def record_fields(raw: Mapping[str, object]) -> tuple[str, str, int, float, float, float, float, float]:
    """Validate a raw field map; return canonical values (timestamp as epoch µs).

    Raises exactly one typed error naming the first offending field in
    canonical field order. Unknown extra keys are ignored.
    """
    for name in MEASUREMENT_FIELDS:
        value = raw.get(name)
        if value is None or (isinstance(value, str) and not value.strip()):
            raise MissingField(name)
    device_id = str(raw["device_id"])
    site_id = str(raw["site_id"])
    ts_us = epoch_us(parse_timestamp(raw["timestamp"]))
    latitude = _as_float("latitude", raw["latitude"])
    longitude = _as_float("longitude", raw["longitude"])
    ping_ms = _as_float("ping_ms", raw["ping_ms"])
    upload_mbps = _as_float("upload_mbps", raw["upload_mbps"])
    download_mbps = _as_float("download_mbps", raw["download_mbps"])
    check_report_values(device_id, site_id, latitude, longitude, ping_ms, upload_mbps, download_mbps)
    return device_id, site_id, ts_us, latitude, longitude, ping_ms, upload_mbps, download_mbps


def validate_measurement(raw: Mapping[str, object]) -> Measurement:
    """Check one raw field map against the report schema.

    Total over mappings: returns a well-formed Measurement or raises exactly
    one of MissingField / OutOfRange / BadTimestamp.
    """
    device_id, site_id, ts_us, lat, lon, ping, up, down = record_fields(raw)
    return Measurement(device_id, site_id, from_epoch_us(ts_us), lat, lon, ping, up, down)
