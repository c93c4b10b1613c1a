"""Independent brute-force recomputation of the server aggregates.

This is the check side of a dual-route design: aggregates are re-derived
from first principles without sharing projection or grouping code with
`covmap.aggregate` (different Mercator transcription, different grouping
mechanism), so the two paths can be compared on identical inputs. The
pure-Python reference functions are the ground truth for small inputs; the
BulkOracle recomputes the same answers vectorized so whole simulator
datasets can be checked inside the CLI's time budget.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable

import numpy as np

from .mercator import MAX_LATITUDE, GridSpec, grid_cell_meters, meters_per_pixel
from .model import Measurement, MetricKind, epoch_us, from_epoch_us, hour_floor, metric_of
from .store import Snapshot

_US_PER_HOUR = 3_600_000_000


# -- pure-Python references (per-point loops, dict grouping) ------------------

def _project_point(lat: float, lon: float, zoom: int) -> tuple[float, float]:
    # transcribed independently of covmap.mercator: asinh form for y
    side = 256.0 * 2.0 ** zoom
    x = (lon + 180.0) / 360.0 * side
    y = (1.0 - math.asinh(math.tan(math.radians(lat))) / math.pi) / 2.0 * side
    return min(max(x, 0.0), side), min(max(y, 0.0), side)


def heatmap_reference(
    measurements: Iterable[Measurement],
    sites: Iterable[str],
    metric: MetricKind,
    grid: GridSpec,
    k_min: int,
) -> dict[tuple[int, int], tuple[float, int]]:
    """Project every point, group by floor division, average; suppress < k_min."""
    wanted = set(sites)
    groups: dict[tuple[int, int], list[float]] = {}
    for m in measurements:
        if m.site_id not in wanted or abs(m.latitude) > MAX_LATITUDE:
            continue
        x, y = _project_point(m.latitude, m.longitude, grid.zoom)
        dx = x - grid.origin_x
        dy = y - grid.origin_y
        if not (0.0 <= dx < grid.width_px and 0.0 <= dy < grid.height_px):
            continue
        cell = (int(dx // grid.cell_px), int(dy // grid.cell_px))
        groups.setdefault(cell, []).append(metric_of(m, metric))
    return {
        cell: (sum(vals) / len(vals), len(vals))
        for cell, vals in groups.items()
        if len(vals) >= k_min
    }


def timeseries_reference(
    measurements: Iterable[Measurement],
    sites: Iterable[str],
    metric: MetricKind,
    start: datetime | None = None,
    end: datetime | None = None,
) -> dict[tuple[str, datetime], tuple[float, int]]:
    """Group by timestamp truncation to the hour; average per (site, hour)."""
    wanted = set(sites)
    groups: dict[tuple[str, datetime], list[float]] = {}
    for m in measurements:
        if m.site_id not in wanted:
            continue
        if start is not None and m.timestamp < start:
            continue
        if end is not None and m.timestamp >= end:
            continue
        key = (m.site_id, hour_floor(m.timestamp))
        groups.setdefault(key, []).append(metric_of(m, metric))
    return {key: (sum(vals) / len(vals), len(vals)) for key, vals in groups.items()}


def site_summary_reference(
    measurements: Iterable[Measurement],
    site_id: str,
    now: datetime,
    summary_window,
    availability_window,
) -> tuple[float | None, float | None, float | None, bool, datetime | None]:
    """Window-filter then average; returns (ping, upload, download, available, last_seen)."""
    mine = [m for m in measurements if m.site_id == site_id]
    last_seen = max((m.timestamp for m in mine), default=None)
    available = any(now - availability_window <= m.timestamp <= now for m in mine)
    window = [m for m in mine if now - summary_window <= m.timestamp <= now]
    if not window:
        return None, None, None, available, last_seen
    n = len(window)
    return (
        sum(m.ping_ms for m in window) / n,
        sum(m.upload_mbps for m in window) / n,
        sum(m.download_mbps for m in window) / n,
        available,
        last_seen,
    )


# -- vectorized independent recomputation for full datasets -------------------

class BulkOracle:
    """Re-derives aggregates over a whole snapshot, independently and fast.

    Projection is recomputed per zoom from raw latitude/longitude (cached per
    distinct zoom, still touching every point); grouping goes through
    argsort + reduceat instead of the production bincount path.
    """

    def __init__(self, snapshot: Snapshot):
        parts = snapshot.parts
        self.lat = np.concatenate([p.lats for p in parts]) if parts else np.empty(0)
        self.lon = np.concatenate([p.lons for p in parts]) if parts else np.empty(0)
        self.ts_us = np.concatenate([p.ts_us for p in parts]) if parts else np.empty(0, np.int64)
        self.codes = np.concatenate([p.site_codes for p in parts]) if parts else np.empty(0, np.int32)
        self.metrics = {
            MetricKind.PING: np.concatenate([p.pings for p in parts]) if parts else np.empty(0),
            MetricKind.UPLOAD: np.concatenate([p.uploads for p in parts]) if parts else np.empty(0),
            MetricKind.DOWNLOAD: np.concatenate([p.downloads for p in parts]) if parts else np.empty(0),
        }
        self.site_table = snapshot.site_table
        self._xy_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def _xy(self, zoom: int) -> tuple[np.ndarray, np.ndarray]:
        cached = self._xy_cache.get(zoom)
        if cached is not None:
            return cached
        side = 256.0 * 2.0 ** zoom
        x = (self.lon + 180.0) / 360.0 * side
        with np.errstate(invalid="ignore", over="ignore"):
            y = (1.0 - np.arcsinh(np.tan(np.radians(self.lat))) / np.pi) / 2.0 * side
        x = np.clip(x, 0.0, side)
        y = np.clip(y, 0.0, side)
        out_of_domain = np.abs(self.lat) > MAX_LATITUDE
        if out_of_domain.any():
            x = np.where(out_of_domain, np.nan, x)
            y = np.where(out_of_domain, np.nan, y)
        self._xy_cache[zoom] = (x, y)
        return x, y

    def _site_mask(self, sites: Iterable[str]) -> np.ndarray:
        wanted = set(sites)
        mask = np.zeros(len(self.codes), dtype=bool)
        for code, site_id in enumerate(self.site_table):
            if site_id in wanted:
                mask |= self.codes == code
        return mask

    def heatmap(
        self,
        sites: Iterable[str],
        metric: MetricKind,
        grid: GridSpec,
        k_min: int,
    ) -> dict[tuple[int, int], tuple[float, int]]:
        x, y = self._xy(grid.zoom)
        sel = self._site_mask(sites)
        dx = x[sel] - grid.origin_x
        dy = y[sel] - grid.origin_y
        inside = (dx >= 0.0) & (dx < grid.width_px) & (dy >= 0.0) & (dy < grid.height_px)
        dx = dx[inside]
        dy = dy[inside]
        if not len(dx):
            return {}
        ii = np.floor(dx / grid.cell_px).astype(np.int64)
        jj = np.floor(dy / grid.cell_px).astype(np.int64)
        vals = self.metrics[metric][sel][inside]
        key = jj * grid.n_cols + ii
        order = np.argsort(key, kind="stable")
        key = key[order]
        vals = vals[order]
        starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
        counts = np.diff(np.r_[starts, len(key)])
        sums = np.add.reduceat(vals, starts)
        out: dict[tuple[int, int], tuple[float, int]] = {}
        n_cols = grid.n_cols
        for k, c, s in zip(key[starts].tolist(), counts.tolist(), sums.tolist()):
            if c >= k_min:
                out[(int(k % n_cols), int(k // n_cols))] = (s / c, int(c))
        return out

    def timeseries(
        self,
        sites: Iterable[str],
        metric: MetricKind,
        start: datetime | None = None,
        end: datetime | None = None,
    ) -> dict[tuple[str, datetime], tuple[float, int]]:
        out: dict[tuple[str, datetime], tuple[float, int]] = {}
        if not len(self.ts_us):
            return out
        lo = epoch_us(start) if start is not None else None
        hi = epoch_us(end) if end is not None else None
        in_range = np.ones(len(self.ts_us), dtype=bool)
        if lo is not None:
            in_range &= self.ts_us >= lo
        if hi is not None:
            in_range &= self.ts_us < hi
        values = self.metrics[metric]
        for code, site_id in enumerate(self.site_table):
            if site_id not in set(sites):
                continue
            sel = (self.codes == code) & in_range
            if not sel.any():
                continue
            hours = self.ts_us[sel] // _US_PER_HOUR
            vals = values[sel]
            order = np.argsort(hours, kind="stable")
            hours = hours[order]
            vals = vals[order]
            starts = np.flatnonzero(np.r_[True, hours[1:] != hours[:-1]])
            counts = np.diff(np.r_[starts, len(hours)])
            sums = np.add.reduceat(vals, starts)
            for h, c, s in zip(hours[starts].tolist(), counts.tolist(), sums.tolist()):
                bucket_start = from_epoch_us(int(h) * _US_PER_HOUR)
                out[(site_id, bucket_start)] = (s / c, int(c))
        return out


# -- comparison + randomized grids for the oracle check -----------------------

def compare_heatmap(
    cells,  # list[aggregate.HeatmapCell]
    expected: dict[tuple[int, int], tuple[float, int]],
    rel_tol: float = 1e-9,
) -> list[str]:
    """Mismatch descriptions between a production heatmap and oracle output."""
    problems = []
    got = {(c.index.i, c.index.j): (c.value, c.count) for c in cells}
    if len(got) != len(cells):
        problems.append("duplicate cell indices in production output")
    for cell in set(got) - set(expected):
        problems.append(f"unexpected cell {cell}")
    for cell in set(expected) - set(got):
        problems.append(f"missing cell {cell}")
    for cell in set(got) & set(expected):
        gv, gc = got[cell]
        ev, ec = expected[cell]
        if gc != ec:
            problems.append(f"cell {cell}: count {gc} != {ec}")
        elif not math.isclose(gv, ev, rel_tol=rel_tol, abs_tol=0.0):
            problems.append(f"cell {cell}: value {gv!r} != {ev!r}")
    return problems


def compare_timeseries(
    series: dict[str, list],  # dict[str, list[aggregate.SeriesPoint]]
    expected: dict[tuple[str, datetime], tuple[float, int]],
    rel_tol: float = 1e-9,
) -> list[str]:
    problems = []
    got = {}
    for site_id, points in series.items():
        for p in points:
            got[(site_id, p.bucket.start)] = (p.value, p.count)
    for key in set(got) - set(expected):
        problems.append(f"unexpected point {key}")
    for key in set(expected) - set(got):
        problems.append(f"missing point {key}")
    for key in set(got) & set(expected):
        gv, gc = got[key]
        ev, ec = expected[key]
        if gc != ec:
            problems.append(f"{key}: count {gc} != {ec}")
        elif not math.isclose(gv, ev, rel_tol=rel_tol, abs_tol=0.0):
            problems.append(f"{key}: value {gv!r} != {ev!r}")
    return problems


def random_grids(
    rng: np.random.Generator,
    lat_range: tuple[float, float],
    lon_range: tuple[float, float],
    n: int,
    *,
    min_cell_meters: float,
    max_cells: int = 65536,
    zoom_range: tuple[int, int] = (7, 13),
) -> list[GridSpec]:
    """Random viewports overlapping the given region, honoring the cell floor."""
    grids = []
    for _ in range(n):
        zoom = int(rng.integers(zoom_range[0], zoom_range[1] + 1))
        side = 256.0 * 2.0 ** zoom
        center_lat = float(rng.uniform(*lat_range))
        center_lon = float(rng.uniform(*lon_range))
        cx, cy = _project_point(center_lat, center_lon, zoom)
        width = float(rng.uniform(400, 1600))
        height = float(rng.uniform(300, 1200))
        ox = min(max(cx - width / 2.0, 0.0), side - width)
        oy = min(max(cy - height / 2.0, 0.0), side - height)
        target_m = float(rng.uniform(min_cell_meters, 3.0 * min_cell_meters))
        cell_px = max(1, math.ceil(target_m / meters_per_pixel(center_lat, zoom)))
        # at low zooms a 1 px cell already clears the floor, so wide viewports
        # can explode the cell count; shrink until the grid is reasonable
        while math.ceil(width / cell_px) * math.ceil(height / cell_px) > max_cells:
            width /= 2.0
            height /= 2.0
        grid = GridSpec(zoom, ox, oy, width, height, cell_px)
        # rounding of cell_px and of the viewport-center latitude can land a
        # hair under the floor; bump until the constructed grid clears it
        while grid_cell_meters(grid) < min_cell_meters:
            cell_px += 1
            grid = GridSpec(zoom, ox, oy, width, height, cell_px)
        grids.append(grid)
    return grids


@dataclass
class OracleReport:
    """Outcome of one full oracle check run."""

    ok: bool = True
    grids_checked: int = 0
    series_checked: int = 0
    problems: list[str] = field(default_factory=list)
    heatmap_seconds: float = 0.0
    timeseries_seconds: float = 0.0

    def fail(self, message: str) -> None:
        self.ok = False
        self.problems.append(message)


def run_oracle_check(
    snapshot: Snapshot,
    sites: list[str],
    *,
    n_grids: int = 50,
    seed: int = 2024,
    k_min: int = 5,
    min_cell_meters: float = 300.0,
    rel_tol: float = 1e-9,
) -> OracleReport:
    """Compare production heatmap/timeseries against the bulk oracle."""
    from . import aggregate  # local import keeps the check path visibly separate

    report = OracleReport()
    if not len(snapshot):
        report.fail("empty snapshot: nothing to check")
        return report

    oracle = BulkOracle(snapshot)
    lat_lo, lat_hi = float(np.min(oracle.lat)), float(np.max(oracle.lat))
    lon_lo, lon_hi = float(np.min(oracle.lon)), float(np.max(oracle.lon))
    lat_pad = max(0.05, (lat_hi - lat_lo) * 0.25)
    lon_pad = max(0.05, (lon_hi - lon_lo) * 0.25)
    rng = np.random.default_rng(seed)
    grids = random_grids(
        rng,
        (max(lat_lo - lat_pad, -84.0), min(lat_hi + lat_pad, 84.0)),
        (max(lon_lo - lon_pad, -180.0), min(lon_hi + lon_pad, 180.0)),
        n_grids,
        min_cell_meters=min_cell_meters,
    )
    metrics = list(MetricKind)

    t0 = time.perf_counter()
    for k, grid in enumerate(grids):
        metric = metrics[k % len(metrics)]
        subset = [sites[i] for i in range(len(sites)) if rng.random() < 0.7] or list(sites)
        produced = aggregate.heatmap(
            snapshot, subset, metric, grid, k_min, min_cell_meters=min_cell_meters
        )
        expected = oracle.heatmap(subset, metric, grid, k_min)
        for problem in compare_heatmap(produced, expected, rel_tol):
            report.fail(f"heatmap grid #{k} (zoom {grid.zoom}, {metric.value}): {problem}")
        report.grids_checked += 1
    report.heatmap_seconds = time.perf_counter() - t0

    t0 = time.perf_counter()
    for metric in metrics:
        produced = aggregate.timeseries(snapshot, sites, metric)
        expected = oracle.timeseries(sites, metric)
        for problem in compare_timeseries(produced, expected, rel_tol):
            report.fail(f"timeseries ({metric.value}): {problem}")
        report.series_checked += 1
    report.timeseries_seconds = time.perf_counter() - t0
    return report
