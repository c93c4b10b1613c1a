"""Deterministic mock-dataset generator.

SYNTHETIC DATA: the session process and the distance-attenuated quality
model below are invented for dashboard development. They are monotone and
positive (quality degrades smoothly away from a site) but are not measured
from real radios; every constant is configurable.

Each simulated device belongs to one site, gets a fixed home location inside
the coverage disk, connects and disconnects in alternating exponential
intervals, and while connected emits one report every `cadence` starting at
the connect instant (half-open: nothing at the disconnect instant itself).
Output is reproducible: one seeded substream per device, derived by hashing
(seed, device_id), so records do not depend on generation order.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from typing import IO, Iterator

import numpy as np

from .errors import BadConfig
from .model import DEFAULT_SITES, Measurement, Site, UTC, from_epoch_us

#: Mean Earth radius for ground distances (haversine), meters.
EARTH_MEAN_RADIUS_M = 6371008.8

_M_PER_DEG_LAT = math.pi * EARTH_MEAN_RADIUS_M / 180.0


@dataclass(frozen=True)
class SimConfig:
    """Simulation knobs; defaults reproduce the documented dataset scale."""

    sites: tuple[Site, ...] = DEFAULT_SITES
    devices_per_site: int = 100
    period_start: datetime = datetime(2021, 2, 1, tzinfo=UTC)
    period_end: datetime = datetime(2021, 7, 1, tzinfo=UTC)
    cadence: timedelta = timedelta(minutes=15)
    coverage_radius_m: float = 2000.0
    seed: int = 1
    mean_connected: timedelta = timedelta(days=3)
    mean_gap: timedelta = timedelta(days=1)
    jitter_m: float = 50.0
    base_ping_ms: float = 20.0
    base_download_mbps: float = 40.0
    upload_fraction: float = 0.25
    ping_slope: float = 1.0
    download_slope: float = 0.7
    download_floor: float = 0.1
    noise_sigma: float = 0.25

    def __post_init__(self):
        if not self.sites:
            raise BadConfig("at least one site is required")
        ids = [s.site_id for s in self.sites]
        if len(set(ids)) != len(ids):
            raise BadConfig("site ids must be unique")
        if self.devices_per_site < 1:
            raise BadConfig("devices_per_site must be >= 1")
        if self.period_start >= self.period_end:
            raise BadConfig("period_start must precede period_end")
        if self.cadence <= timedelta(0):
            raise BadConfig("cadence must be positive")
        if self.coverage_radius_m <= 0:
            raise BadConfig("coverage_radius_m must be positive")
        if self.mean_connected <= timedelta(0):
            raise BadConfig("mean_connected must be positive")
        if self.mean_gap < timedelta(0):
            raise BadConfig("mean_gap must be non-negative")
        if self.jitter_m < 0:
            raise BadConfig("jitter_m must be non-negative")
        if self.noise_sigma < 0:
            raise BadConfig("noise_sigma must be non-negative")
        if self.base_ping_ms <= 0 or self.base_download_mbps <= 0:
            raise BadConfig("baseline metrics must be positive")
        if not (0 < self.download_floor <= 1):
            raise BadConfig("download_floor must be in (0, 1]")
        if self.upload_fraction <= 0:
            raise BadConfig("upload_fraction must be positive")


@dataclass(frozen=True)
class DeviceProfile:
    """A simulated device: identity, home location, and quality baselines."""

    device_id: str
    site_id: str
    latitude: float
    longitude: float
    distance_m: float
    mean_ping_ms: float
    mean_upload_mbps: float
    mean_download_mbps: float


@dataclass(frozen=True)
class Session:
    """One contiguous connected interval of a device."""

    device_id: str
    connect: datetime
    disconnect: datetime

    def __post_init__(self):
        if self.connect >= self.disconnect:
            raise BadConfig("session must have positive length")


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in meters."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dphi = p2 - p1
    dlmb = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2.0) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dlmb / 2.0) ** 2
    return 2.0 * EARTH_MEAN_RADIUS_M * math.asin(math.sqrt(a))


def offset_latlon(lat: float, lon: float, east_m: float, north_m: float) -> tuple[float, float]:
    """Planar small-offset approximation, adequate at the 2 km scale."""
    return (
        lat + north_m / _M_PER_DEG_LAT,
        lon + east_m / (_M_PER_DEG_LAT * math.cos(math.radians(lat))),
    )


def device_rng(seed: int, device_id: str) -> np.random.Generator:
    """Per-device substream derived by hashing (seed, device_id)."""
    digest = hashlib.sha256(f"{seed}:{device_id}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:16], "big"))


def model_means(config: SimConfig, distance_m: float) -> tuple[float, float, float]:
    """(ping, upload, download) distribution means at a given site distance.

    Ping grows linearly with distance; download decays linearly to a floor;
    upload is a fixed fraction of download.
    """
    frac = distance_m / config.coverage_radius_m
    ping = config.base_ping_ms * (1.0 + config.ping_slope * frac)
    download = config.base_download_mbps * max(config.download_floor, 1.0 - config.download_slope * frac)
    return ping, download * config.upload_fraction, download


def _home_location(config: SimConfig, site: Site, rng: np.random.Generator) -> tuple[float, float, float]:
    """Uniform draw over the coverage disk; returns (lat, lon, distance_m)."""
    radius = config.coverage_radius_m * math.sqrt(rng.random())
    theta = 2.0 * math.pi * rng.random()
    lat, lon = offset_latlon(site.latitude, site.longitude,
                             radius * math.sin(theta), radius * math.cos(theta))
    distance = haversine_m(site.latitude, site.longitude, lat, lon)
    if distance > config.coverage_radius_m:
        # planar approximation error can overshoot by <1 m at the disk edge
        shrink = (config.coverage_radius_m - 0.05) / distance
        lat = site.latitude + (lat - site.latitude) * shrink
        lon = site.longitude + (lon - site.longitude) * shrink
        distance = haversine_m(site.latitude, site.longitude, lat, lon)
    return lat, lon, distance


def _profile(config: SimConfig, site: Site, index: int, rng: np.random.Generator) -> DeviceProfile:
    device_id = f"{site.site_id}-d{index:03d}"
    lat, lon, distance = _home_location(config, site, rng)
    ping, up, down = model_means(config, distance)
    return DeviceProfile(device_id, site.site_id, lat, lon, distance, ping, up, down)


def device_profiles(config: SimConfig) -> list[DeviceProfile]:
    """All device profiles, sites in config order, per-device seeded draws."""
    profiles = []
    for site in config.sites:
        for k in range(config.devices_per_site):
            device_id = f"{site.site_id}-d{k:03d}"
            profiles.append(_profile(config, site, k, device_rng(config.seed, device_id)))
    return profiles


def sample_sessions(config: SimConfig, device_id: str, rng: np.random.Generator) -> list[Session]:
    """Alternating exponential gap/connected intervals, truncated to the period.

    Boundaries are rounded to whole seconds. Abutting sessions (a gap that
    rounds to zero) coalesce, so mean_gap=0 degenerates to one full-period
    session.
    """
    start_s = int(config.period_start.timestamp())
    end_s = int(config.period_end.timestamp())
    gap_mean = config.mean_gap.total_seconds()
    conn_mean = config.mean_connected.total_seconds()
    spans: list[list[int]] = []
    t = start_s
    while t < end_s:
        gap = int(round(rng.exponential(gap_mean)))
        length = int(round(rng.exponential(conn_mean)))
        connect = t + gap
        if connect >= end_s:
            break
        disconnect = min(connect + length, end_s)
        if disconnect > connect:
            if spans and spans[-1][1] == connect:
                spans[-1][1] = disconnect
            else:
                spans.append([connect, disconnect])
        advanced = connect + length
        t = advanced if advanced > t else t + 1
    return [
        Session(device_id, from_epoch_us(a * 1_000_000), from_epoch_us(b * 1_000_000))
        for a, b in spans
    ]


def _session_slots(connect_s: int, disconnect_s: int, cadence_s: int) -> int:
    """Reports emitted in [connect, disconnect): one per cadence, from connect."""
    return -(-(disconnect_s - connect_s) // cadence_s)


def sample_measurement(
    config: SimConfig,
    device: DeviceProfile,
    site: Site,
    at: datetime,
    rng: np.random.Generator,
) -> Measurement:
    """One report from `device` at instant `at`.

    The lognormal noise factor is mean-corrected (exp(σZ − σ²/2)), so the
    model means are exact distribution means. Quality depends on the device's
    home distance; the ≤`jitter_m` location wobble does not feed the model.
    """
    jr = config.jitter_m * math.sqrt(rng.random())
    jt = 2.0 * math.pi * rng.random()
    lat, lon = offset_latlon(device.latitude, device.longitude,
                             jr * math.sin(jt), jr * math.cos(jt))
    dist = haversine_m(site.latitude, site.longitude, lat, lon)
    if dist > config.coverage_radius_m:
        shrink = (config.coverage_radius_m - 0.05) / dist
        lat = site.latitude + (lat - site.latitude) * shrink
        lon = site.longitude + (lon - site.longitude) * shrink
    sigma = config.noise_sigma
    correction = -0.5 * sigma * sigma
    zp, zd, zu = rng.standard_normal(3)
    ping = device.mean_ping_ms * math.exp(sigma * zp + correction)
    down = device.mean_download_mbps * math.exp(sigma * zd + correction)
    up = device.mean_upload_mbps * math.exp(sigma * zu + correction)
    return Measurement(
        device_id=device.device_id,
        site_id=device.site_id,
        timestamp=at,
        latitude=round(lat, 7),
        longitude=round(lon, 7),
        ping_ms=max(round(ping, 4), 1e-4),
        upload_mbps=round(up, 4),
        download_mbps=round(down, 4),
    )


class _Columns:
    """Column-oriented view of a generated dataset, sorted by (time, device)."""

    __slots__ = ("device_ids", "site_ids", "ts_s", "lats", "lons", "pings", "uploads", "downloads")

    def __init__(self, device_ids, site_ids, ts_s, lats, lons, pings, uploads, downloads):
        self.device_ids = device_ids  # list[str]
        self.site_ids = site_ids      # list[str]
        self.ts_s = ts_s              # int64 epoch seconds
        self.lats = lats
        self.lons = lons
        self.pings = pings
        self.uploads = uploads
        self.downloads = downloads

    def __len__(self) -> int:
        return len(self.ts_s)


def _device_samples(config: SimConfig, site: Site, profile: DeviceProfile,
                    sessions: list[Session], rng: np.random.Generator):
    """Vectorized emission for one device; mirrors sample_measurement's math."""
    cadence_s = int(config.cadence.total_seconds())
    ts_chunks = []
    for s in sessions:
        a = int(s.connect.timestamp())
        b = int(s.disconnect.timestamp())
        n = _session_slots(a, b, cadence_s)
        ts_chunks.append(a + cadence_s * np.arange(n, dtype=np.int64))
    if not ts_chunks:
        return None
    ts = np.concatenate(ts_chunks)
    total = len(ts)

    jr = config.jitter_m * np.sqrt(rng.random(total))
    jt = 2.0 * math.pi * rng.random(total)
    lat = profile.latitude + (jr * np.cos(jt)) / _M_PER_DEG_LAT
    lon = profile.longitude + (jr * np.sin(jt)) / (_M_PER_DEG_LAT * math.cos(math.radians(profile.latitude)))

    # clamp the rare jittered point that leaves the coverage disk
    p1 = math.radians(site.latitude)
    p2 = np.radians(lat)
    a_hav = np.sin((p2 - p1) / 2.0) ** 2 + math.cos(p1) * np.cos(p2) * np.sin(np.radians(lon - site.longitude) / 2.0) ** 2
    dist = 2.0 * EARTH_MEAN_RADIUS_M * np.arcsin(np.sqrt(a_hav))
    over = dist > config.coverage_radius_m
    if over.any():
        shrink = (config.coverage_radius_m - 0.05) / dist[over]
        lat[over] = site.latitude + (lat[over] - site.latitude) * shrink
        lon[over] = site.longitude + (lon[over] - site.longitude) * shrink

    sigma = config.noise_sigma
    correction = -0.5 * sigma * sigma
    ping = profile.mean_ping_ms * np.exp(sigma * rng.standard_normal(total) + correction)
    down = profile.mean_download_mbps * np.exp(sigma * rng.standard_normal(total) + correction)
    up = profile.mean_upload_mbps * np.exp(sigma * rng.standard_normal(total) + correction)

    return (
        ts,
        np.round(lat, 7),
        np.round(lon, 7),
        np.maximum(np.round(ping, 4), 1e-4),
        np.round(up, 4),
        np.maximum(np.round(down, 4), 0.0),
    )


def generate_columns(config: SimConfig) -> _Columns:
    """Generate the full dataset as columns, sorted by (timestamp, device).

    Deterministic given config.seed: sites in config order, devices by index,
    sessions chronologically, with one hashed substream per device.
    """
    dev_table: list[str] = []
    site_for_dev: list[str] = []
    ts_parts, lat_parts, lon_parts = [], [], []
    ping_parts, up_parts, down_parts = [], [], []
    dev_idx_parts = []

    for site in config.sites:
        for k in range(config.devices_per_site):
            device_id = f"{site.site_id}-d{k:03d}"
            rng = device_rng(config.seed, device_id)
            profile = _profile(config, site, k, rng)
            sessions = sample_sessions(config, device_id, rng)
            sampled = _device_samples(config, site, profile, sessions, rng)
            dev_table.append(device_id)
            site_for_dev.append(site.site_id)
            if sampled is None:
                continue
            ts, lat, lon, ping, up, down = sampled
            ts_parts.append(ts)
            lat_parts.append(lat)
            lon_parts.append(lon)
            ping_parts.append(ping)
            up_parts.append(up)
            down_parts.append(down)
            dev_idx_parts.append(np.full(len(ts), len(dev_table) - 1, dtype=np.int32))

    if not ts_parts:
        empty = np.empty(0)
        return _Columns([], [], np.empty(0, np.int64), empty, empty, empty, empty, empty)

    ts = np.concatenate(ts_parts)
    dev_idx = np.concatenate(dev_idx_parts)
    order = np.lexsort((dev_idx, ts))
    ts = ts[order]
    dev_idx = dev_idx[order]
    dev_obj = np.array(dev_table, dtype=object)
    site_obj = np.array(site_for_dev, dtype=object)
    return _Columns(
        dev_obj[dev_idx].tolist(),
        site_obj[dev_idx].tolist(),
        ts,
        np.concatenate(lat_parts)[order],
        np.concatenate(lon_parts)[order],
        np.concatenate(ping_parts)[order],
        np.concatenate(up_parts)[order],
        np.concatenate(down_parts)[order],
    )


def generate(config: SimConfig) -> Iterator[Measurement]:
    """The dataset as a validated Measurement stream (file-identical order)."""
    cols = generate_columns(config)
    lats = cols.lats.tolist()
    lons = cols.lons.tolist()
    pings = cols.pings.tolist()
    ups = cols.uploads.tolist()
    downs = cols.downloads.tolist()
    ts = cols.ts_s.tolist()
    for k in range(len(cols)):
        yield Measurement(
            device_id=cols.device_ids[k],
            site_id=cols.site_ids[k],
            timestamp=from_epoch_us(ts[k] * 1_000_000),
            latitude=lats[k],
            longitude=lons[k],
            ping_ms=pings[k],
            upload_mbps=ups[k],
            download_mbps=downs[k],
        )


def write_dataset(config: SimConfig, dest: "str | IO[str]") -> int:
    """Write the generated dataset to `dest` in the store's record format.

    `dest` may be a path or a text sink with a write() method. Same-seed runs
    produce byte-identical output. Returns the number of records written.
    """
    cols = generate_columns(config)
    out: IO[str]
    close = False
    if hasattr(dest, "write"):
        out = dest  # type: ignore[assignment]
    else:
        out = open(dest, "w", encoding="utf-8")
        close = True
    try:
        ts_str = np.datetime_as_string(cols.ts_s.astype("datetime64[s]"), unit="s").tolist()
        lats = cols.lats.tolist()
        lons = cols.lons.tolist()
        pings = cols.pings.tolist()
        ups = cols.uploads.tolist()
        downs = cols.downloads.tolist()
        chunk: list[str] = []
        for k in range(len(cols)):
            chunk.append(
                f'{{"device_id":"{cols.device_ids[k]}","site_id":"{cols.site_ids[k]}",'
                f'"timestamp":"{ts_str[k]}Z","latitude":{lats[k]:.12g},"longitude":{lons[k]:.12g},'
                f'"ping_ms":{pings[k]:.12g},"upload_mbps":{ups[k]:.12g},"download_mbps":{downs[k]:.12g}}}\n'
            )
            if len(chunk) == 65536:
                out.write("".join(chunk))
                chunk.clear()
        if chunk:
            out.write("".join(chunk))
    finally:
        if close:
            out.close()
    return len(cols)


def replace_config(config: SimConfig, **changes) -> SimConfig:
    """dataclasses.replace with SimConfig validation re-run."""
    return replace(config, **changes)
