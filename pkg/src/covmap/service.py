"""HTTP surface binding storage, aggregation, and configuration together.

Endpoints (all responses are canonical JSON, see covmap.wire):

    GET  /api/sites                     configured sites + derived availability
    GET  /api/heatmap?...               suppressed grid-box averages
    GET  /api/timeseries?...            per-site hourly averages
    GET  /api/site-summary?site=ID      trailing-window summary for one site
    POST /api/measurements              ingest one report (unauthenticated)

Expected failures return 400/404/422 with {"code", "message"[, "field"]};
malformed input never produces a 500. The ingest endpoint is deliberately
unauthenticated in this artifact — do not expose it beyond a trusted
network.
"""

from __future__ import annotations

import json
import logging
from datetime import datetime

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import aggregate, wire
from .config import ServerConfig
from .errors import AppError, BadGrid, BadRange, BadRequest, UnknownSite
from .mercator import GridSpec
from .model import MetricKind, Site, from_epoch_us, parse_timestamp
from .store import MeasurementStore, Snapshot

log = logging.getLogger(__name__)


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(wire.dumps(payload), status_code=status_code, media_type="application/json")


def _error_response(exc: AppError, status_code: int) -> Response:
    body = {"code": exc.code, "message": str(exc)}
    if exc.field:
        body["field"] = exc.field
    return _json_response(body, status_code)


def _query_str(request: Request, name: str) -> str:
    value = request.query_params.get(name)
    if value is None or not value.strip():
        raise BadRequest(f"missing required query parameter: {name}", field=name)
    return value


def _query_int(request: Request, name: str) -> int:
    raw = _query_str(request, name)
    try:
        return int(raw)
    except ValueError:
        raise BadGrid(f"{name} must be an integer, got {raw!r}") from None


def _query_float(request: Request, name: str) -> float:
    raw = _query_str(request, name)
    try:
        return float(raw)
    except ValueError:
        raise BadGrid(f"{name} must be a number, got {raw!r}") from None


def _query_instant(request: Request, name: str) -> datetime | None:
    raw = request.query_params.get(name)
    if raw is None or not raw.strip():
        return None
    return parse_timestamp(raw)


def _sites_param(request: Request, config: ServerConfig) -> list[str]:
    """Comma-set of site ids, validated and returned in config order."""
    raw = _query_str(request, "sites")
    requested = {part.strip() for part in raw.split(",") if part.strip()}
    if not requested:
        raise BadRequest("sites must name at least one site", field="sites")
    known = set(config.site_ids)
    for site_id in sorted(requested):
        if site_id not in known:
            raise UnknownSite(site_id)
    return [site_id for site_id in config.site_ids if site_id in requested]


def _metric_param(request: Request) -> MetricKind:
    return MetricKind.parse(_query_str(request, "metric"))


def _summary_payload(summary: aggregate.SiteSummary) -> dict:
    return {
        "site_id": summary.site_id,
        "status": summary.status.value,
        "available": summary.available,
        "avg_ping_ms": summary.avg_ping_ms,
        "avg_upload_mbps": summary.avg_upload_mbps,
        "avg_download_mbps": summary.avg_download_mbps,
        "last_seen": summary.last_seen,
    }


def create_app(store: MeasurementStore, config: ServerConfig) -> FastAPI:
    """Wire the endpoints over one store and one configuration."""
    app = FastAPI(title="covmap", docs_url=None, redoc_url=None, openapi_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    def _now_of(snap: Snapshot) -> datetime | None:
        return from_epoch_us(snap.max_ts_us) if snap.max_ts_us is not None else None

    def _site_summary(snap: Snapshot, site: Site) -> aggregate.SiteSummary:
        return aggregate.site_summary(
            snap,
            site,
            _now_of(snap),
            summary_window=config.summary_window,
            availability_window=config.availability_window,
        )

    @app.exception_handler(AppError)
    async def _app_error(request: Request, exc: AppError) -> Response:
        # safety net; endpoints normally map their own statuses
        return _error_response(exc, 400)

    @app.get("/api/sites")
    def sites(request: Request) -> Response:
        snap = store.snapshot()
        payload = []
        for site in config.sites:
            summary = _site_summary(snap, site)
            payload.append(
                {
                    "site_id": site.site_id,
                    "name": site.name,
                    "address": site.address,
                    "latitude": site.latitude,
                    "longitude": site.longitude,
                    "status": site.status.value,
                    "available": summary.available,
                }
            )
        return _json_response(payload)

    @app.get("/api/heatmap")
    def heatmap(request: Request) -> Response:
        try:
            sites = _sites_param(request, config)
            metric = _metric_param(request)
            grid = GridSpec(
                zoom=_query_int(request, "zoom"),
                origin_x=_query_float(request, "origin_x"),
                origin_y=_query_float(request, "origin_y"),
                width_px=_query_float(request, "width_px"),
                height_px=_query_float(request, "height_px"),
                cell_px=_query_int(request, "cell_px"),
            )
            cells = aggregate.heatmap(
                store.snapshot(),
                sites,
                metric,
                grid,
                config.k_min,
                min_cell_meters=config.min_cell_meters,
                max_cells=config.max_cells,
            )
        except AppError as exc:
            return _error_response(exc, 400)
        payload = [
            {"i": cell.index.i, "j": cell.index.j, "value": cell.value, "count": cell.count}
            for cell in cells
        ]
        return _json_response(payload)

    @app.get("/api/timeseries")
    def timeseries(request: Request) -> Response:
        try:
            sites = _sites_param(request, config)
            metric = _metric_param(request)
            start = _query_instant(request, "from")
            end = _query_instant(request, "to")
            if start is not None and end is not None and start >= end:
                raise BadRange(f"empty time range: 'from' {start} >= 'to' {end}")
            series = aggregate.timeseries(store.snapshot(), sites, metric, start, end)
        except AppError as exc:
            return _error_response(exc, 400)
        payload = {
            site_id: [
                {"t": point.bucket.start, "value": point.value, "count": point.count}
                for point in series[site_id]
            ]
            for site_id in sites
        }
        return _json_response(payload)

    @app.get("/api/site-summary")
    def site_summary(request: Request) -> Response:
        try:
            site_id = _query_str(request, "site")
        except AppError as exc:
            return _error_response(exc, 400)
        site = config.site(site_id)
        if site is None:
            return _error_response(UnknownSite(site_id), 404)
        summary = _site_summary(store.snapshot(), site)
        return _json_response(_summary_payload(summary))

    @app.post("/api/measurements")
    async def post_measurement(request: Request) -> Response:
        body = await request.body()
        try:
            record = json.loads(body)
        except (json.JSONDecodeError, UnicodeDecodeError):
            return _error_response(BadRequest("request body is not valid JSON"), 400)
        if not isinstance(record, dict):
            return _error_response(BadRequest("request body must be a JSON object"), 400)
        try:
            sequence = store.ingest(record)
        except AppError as exc:
            return _error_response(exc, 422)
        return _json_response({"sequence": sequence}, 201)

    return app
