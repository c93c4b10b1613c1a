"""Server-side aggregates: grid heatmap, hourly series, site summaries.

Everything here runs over an immutable snapshot and returns only means and
contributor counts — never device ids or raw coordinates. Heatmap cells with
fewer than k_min contributors are omitted entirely (k-anonymity suppression),
and requests whose grid boxes are smaller on the ground than the configured
floor are rejected outright.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Iterable, Mapping

import numpy as np

from .errors import BadRange, GridTooFine, GridTooLarge
from .mercator import CellIndex, GridSpec, grid_cell_meters
from .model import (
    Measurement,
    MetricKind,
    Site,
    SiteStatus,
    TimeBucket,
    epoch_us,
    from_epoch_us,
)
from .store import ColumnPart, Snapshot

DEFAULT_K_MIN = 5
DEFAULT_MIN_CELL_METERS = 300.0
DEFAULT_MAX_CELLS = 65536
DEFAULT_SUMMARY_WINDOW = timedelta(hours=24)
DEFAULT_AVAILABILITY_WINDOW = timedelta(minutes=60)

_US_PER_HOUR = 3_600_000_000


@dataclass(frozen=True)
class HeatmapCell:
    """One occupied grid box: indices, metric mean, contributor count."""

    index: CellIndex
    value: float
    count: int


@dataclass(frozen=True)
class SeriesPoint:
    """Mean of one site's metric over one whole UTC hour."""

    site_id: str
    bucket: TimeBucket
    value: float
    count: int


@dataclass(frozen=True)
class SiteSummary:
    """Trailing-window quality summary for one base station."""

    site_id: str
    status: SiteStatus
    available: bool
    avg_ping_ms: float | None
    avg_upload_mbps: float | None
    avg_download_mbps: float | None
    last_seen: datetime | None


def _as_snapshot(data: Snapshot | Iterable[Measurement]) -> Snapshot:
    if isinstance(data, Snapshot):
        return data
    return Snapshot.from_measurements(data)


def _metric_col(part: ColumnPart, metric: MetricKind) -> np.ndarray:
    if metric is MetricKind.PING:
        return part.pings
    if metric is MetricKind.UPLOAD:
        return part.uploads
    return part.downloads


def _site_mask(part: ColumnPart, codes: list[int]) -> np.ndarray:
    mask = part.site_codes == codes[0]
    for code in codes[1:]:
        mask |= part.site_codes == code
    return mask


def heatmap(
    data: Snapshot | Iterable[Measurement],
    sites: Iterable[str],
    metric: MetricKind,
    grid: GridSpec,
    k_min: int = DEFAULT_K_MIN,
    *,
    min_cell_meters: float = DEFAULT_MIN_CELL_METERS,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> list[HeatmapCell]:
    """Average `metric` over each occupied grid box, suppressing small cells.

    Returns one cell per box with at least `k_min` contributors, in row-major
    (j, i) order; boxes with fewer contributors are omitted entirely.
    Measurements outside the Mercator latitude domain never contribute.
    """
    sites = list(sites)
    if not sites:
        raise ValueError("sites must be non-empty")
    if k_min < 1:
        raise ValueError("k_min must be >= 1")
    cell_meters = grid_cell_meters(grid)
    if cell_meters < min_cell_meters:
        raise GridTooFine(
            f"grid boxes span {cell_meters:.0f} m at zoom {grid.zoom}; "
            f"the privacy floor is {min_cell_meters:.0f} m"
        )
    n_cells = grid.n_cells
    if n_cells > max_cells:
        raise GridTooLarge(f"viewport implies {n_cells} cells; limit is {max_cells}")

    snap = _as_snapshot(data)
    codes = snap.codes_for(sites)
    counts = np.zeros(n_cells, dtype=np.int64)
    sums = np.zeros(n_cells, dtype=np.float64)
    if codes:
        scale = float(1 << grid.zoom)
        n_cols = grid.n_cols
        for part in snap.parts:
            keep = np.flatnonzero(_site_mask(part, codes))
            if not len(keep):
                continue
            x = part.x0[keep] * scale - grid.origin_x
            y = part.y0[keep] * scale - grid.origin_y
            inside = (x >= 0.0) & (x < grid.width_px) & (y >= 0.0) & (y < grid.height_px)
            if not inside.any():
                continue
            i = (x[inside] // grid.cell_px).astype(np.int64)
            j = (y[inside] // grid.cell_px).astype(np.int64)
            key = j * n_cols + i
            values = _metric_col(part, metric)[keep[inside]]
            counts += np.bincount(key, minlength=n_cells)
            sums += np.bincount(key, weights=values, minlength=n_cells)

    cells = []
    for k in np.flatnonzero(counts >= k_min):
        k = int(k)
        cells.append(
            HeatmapCell(
                index=CellIndex(i=k % grid.n_cols, j=k // grid.n_cols),
                value=float(sums[k] / counts[k]),
                count=int(counts[k]),
            )
        )
    return cells


def timeseries(
    data: Snapshot | Iterable[Measurement],
    sites: Iterable[str],
    metric: MetricKind,
    start: datetime | None = None,
    end: datetime | None = None,
) -> dict[str, list[SeriesPoint]]:
    """Hourly mean `metric` per requested site over [start, end).

    Measurements are filtered to the range, then grouped by whole UTC hour;
    hours with no measurements are omitted rather than emitted as zero.
    Bounds default to the snapshot's full span. Every requested site gets a
    key, possibly with an empty list.
    """
    if start is not None and end is not None and start >= end:
        raise BadRange(f"empty time range: {start} >= {end}")
    requested = list(dict.fromkeys(sites))
    if not requested:
        raise ValueError("sites must be non-empty")

    snap = _as_snapshot(data)
    out: dict[str, list[SeriesPoint]] = {site_id: [] for site_id in requested}
    if snap.min_ts_us is None:
        return out
    lo = epoch_us(start) if start is not None else snap.min_ts_us
    hi = epoch_us(end) if end is not None else snap.max_ts_us + 1
    lo = max(lo, snap.min_ts_us)
    hi = min(hi, snap.max_ts_us + 1)
    if lo >= hi:
        return out
    h_lo = lo // _US_PER_HOUR
    n_buckets = (hi - 1) // _US_PER_HOUR - h_lo + 1

    wanted = [(site_id, snap.site_code(site_id)) for site_id in requested]
    counts = {site_id: np.zeros(n_buckets, dtype=np.int64) for site_id in requested}
    sums = {site_id: np.zeros(n_buckets, dtype=np.float64) for site_id in requested}
    for part in snap.parts:
        in_range = (part.ts_us >= lo) & (part.ts_us < hi)
        if not in_range.any():
            continue
        values = _metric_col(part, metric)
        for site_id, code in wanted:
            if code is None:
                continue
            mask = in_range & (part.site_codes == code)
            if not mask.any():
                continue
            hours = part.ts_us[mask] // _US_PER_HOUR - h_lo
            counts[site_id] += np.bincount(hours, minlength=n_buckets)
            sums[site_id] += np.bincount(hours, weights=values[mask], minlength=n_buckets)

    for site_id in requested:
        points = out[site_id]
        site_counts = counts[site_id]
        site_sums = sums[site_id]
        for b in np.flatnonzero(site_counts):
            b = int(b)
            bucket = TimeBucket(from_epoch_us((h_lo + b) * _US_PER_HOUR))
            points.append(SeriesPoint(site_id, bucket, float(site_sums[b] / site_counts[b]), int(site_counts[b])))
    return out


def site_summary(
    data: Snapshot | Iterable[Measurement],
    site: Site,
    now: datetime | None = None,
    *,
    summary_window: timedelta = DEFAULT_SUMMARY_WINDOW,
    availability_window: timedelta = DEFAULT_AVAILABILITY_WINDOW,
) -> SiteSummary:
    """Trailing-window averages and availability for one site.

    Averages cover [now − summary_window, now] (closed); `available` means at
    least one measurement in [now − availability_window, now]; `last_seen` is
    the site's latest measurement overall. `now` defaults to the snapshot's
    latest timestamp, so summaries are deterministic for a fixed dataset.
    """
    snap = _as_snapshot(data)
    code = snap.site_code(site.site_id)
    now_us = epoch_us(now) if now is not None else snap.max_ts_us
    if code is None or now_us is None:
        return SiteSummary(site.site_id, site.status, False, None, None, None, None)

    win_lo = now_us - round(summary_window.total_seconds() * 1e6)
    avail_lo = now_us - round(availability_window.total_seconds() * 1e6)
    last_seen_us = None
    available = False
    count = 0
    sums = np.zeros(3, dtype=np.float64)
    for part in snap.parts:
        mask = part.site_codes == code
        if not mask.any():
            continue
        ts = part.ts_us[mask]
        last = int(ts.max())
        last_seen_us = last if last_seen_us is None else max(last_seen_us, last)
        if bool(((ts >= avail_lo) & (ts <= now_us)).any()):
            available = True
        window = (ts >= win_lo) & (ts <= now_us)
        if window.any():
            count += int(window.sum())
            sums[0] += part.pings[mask][window].sum()
            sums[1] += part.uploads[mask][window].sum()
            sums[2] += part.downloads[mask][window].sum()

    if count:
        avg_ping, avg_up, avg_down = (sums / count).tolist()
    else:
        avg_ping = avg_up = avg_down = None
    return SiteSummary(
        site_id=site.site_id,
        status=site.status,
        available=available,
        avg_ping_ms=avg_ping,
        avg_upload_mbps=avg_up,
        avg_download_mbps=avg_down,
        last_seen=from_epoch_us(last_seen_us) if last_seen_us is not None else None,
    )
