"""Server and simulator configuration files (YAML).

A commented example lives at `config.example.yaml` in the repository root;
the dataset file format is documented in the README.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from datetime import timedelta

import yaml

from .errors import BadConfig
from .model import DEFAULT_SITES, Site, SiteStatus, parse_timestamp
from .simulate import SimConfig


@dataclass(frozen=True)
class ServerConfig:
    """Everything the service needs besides the dataset itself."""

    sites: tuple[Site, ...] = DEFAULT_SITES
    k_min: int = 5
    min_cell_meters: float = 300.0
    max_cells: int = 65536
    summary_window: timedelta = timedelta(hours=24)
    availability_window: timedelta = timedelta(minutes=60)
    listen: str = "127.0.0.1:8787"

    def __post_init__(self):
        if not self.sites:
            raise BadConfig("at least one site must be configured")
        ids = [s.site_id for s in self.sites]
        if len(set(ids)) != len(ids):
            raise BadConfig("site ids must be unique")
        if self.k_min < 1:
            raise BadConfig("k_min must be >= 1")
        if self.min_cell_meters <= 0:
            raise BadConfig("min_cell_meters must be positive")
        if self.max_cells < 1:
            raise BadConfig("max_cells must be >= 1")
        if self.summary_window <= timedelta(0) or self.availability_window <= timedelta(0):
            raise BadConfig("summary/availability windows must be positive")

    @property
    def site_ids(self) -> tuple[str, ...]:
        return tuple(s.site_id for s in self.sites)

    def site(self, site_id: str) -> Site | None:
        for s in self.sites:
            if s.site_id == site_id:
                return s
        return None

    def host_port(self) -> tuple[str, int]:
        return parse_listen(self.listen)


def parse_listen(listen: str) -> tuple[str, int]:
    host, sep, port = listen.rpartition(":")
    if not sep or not host:
        raise BadConfig(f"listen address must be host:port, got {listen!r}")
    try:
        return host, int(port)
    except ValueError:
        raise BadConfig(f"listen port must be an integer, got {port!r}") from None


def _load_yaml(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise BadConfig(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise BadConfig(f"config file {path} is not valid YAML: {exc}") from None
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise BadConfig(f"config file {path} must contain a mapping")
    return doc


def _parse_sites(raw: object, path: str) -> tuple[Site, ...]:
    if not isinstance(raw, list) or not raw:
        raise BadConfig(f"{path}: 'sites' must be a non-empty list")
    sites = []
    for k, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise BadConfig(f"{path}: sites[{k}] must be a mapping")
        try:
            sites.append(
                Site(
                    site_id=str(entry["site_id"]),
                    name=str(entry.get("name", entry["site_id"])),
                    address=str(entry.get("address", "")),
                    latitude=float(entry["latitude"]),
                    longitude=float(entry["longitude"]),
                    status=SiteStatus.parse(str(entry.get("status", "active"))),
                )
            )
        except KeyError as exc:
            raise BadConfig(f"{path}: sites[{k}] is missing {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise BadConfig(f"{path}: sites[{k}]: {exc}") from None
    return tuple(sites)


_SERVER_KEYS = {
    "sites", "k_min", "min_cell_meters", "max_cells",
    "summary_window_hours", "availability_window_minutes", "listen",
}


def load_server_config(path) -> ServerConfig:
    """Read a server config file; unknown keys are rejected loudly."""
    path = str(path)
    doc = _load_yaml(path)
    unknown = set(doc) - _SERVER_KEYS
    if unknown:
        raise BadConfig(f"{path}: unknown config keys: {sorted(unknown)}")
    kwargs: dict = {}
    if "sites" in doc:
        kwargs["sites"] = _parse_sites(doc["sites"], path)
    for key in ("k_min", "max_cells"):
        if key in doc:
            kwargs[key] = int(doc[key])
    if "min_cell_meters" in doc:
        kwargs["min_cell_meters"] = float(doc["min_cell_meters"])
    if "summary_window_hours" in doc:
        kwargs["summary_window"] = timedelta(hours=float(doc["summary_window_hours"]))
    if "availability_window_minutes" in doc:
        kwargs["availability_window"] = timedelta(minutes=float(doc["availability_window_minutes"]))
    if "listen" in doc:
        kwargs["listen"] = str(doc["listen"])
        parse_listen(kwargs["listen"])
    return ServerConfig(**kwargs)


_SIM_KEYS = {
    "sites", "devices_per_site", "period_start", "period_end", "cadence_minutes",
    "coverage_radius_m", "seed", "mean_connected_hours", "mean_gap_hours",
    "jitter_m", "base_ping_ms", "base_download_mbps", "upload_fraction",
    "ping_slope", "download_slope", "download_floor", "noise_sigma",
}


def load_sim_config(path) -> SimConfig:
    """Read a simulator config file; unknown keys are rejected loudly."""
    path = str(path)
    doc = _load_yaml(path)
    unknown = set(doc) - _SIM_KEYS
    if unknown:
        raise BadConfig(f"{path}: unknown config keys: {sorted(unknown)}")
    kwargs: dict = {}
    if "sites" in doc:
        kwargs["sites"] = _parse_sites(doc["sites"], path)
    if "devices_per_site" in doc:
        kwargs["devices_per_site"] = int(doc["devices_per_site"])
    if "seed" in doc:
        kwargs["seed"] = int(doc["seed"])
    if "period_start" in doc:
        kwargs["period_start"] = parse_timestamp(str(doc["period_start"]))
    if "period_end" in doc:
        kwargs["period_end"] = parse_timestamp(str(doc["period_end"]))
    if "cadence_minutes" in doc:
        kwargs["cadence"] = timedelta(minutes=float(doc["cadence_minutes"]))
    if "mean_connected_hours" in doc:
        kwargs["mean_connected"] = timedelta(hours=float(doc["mean_connected_hours"]))
    if "mean_gap_hours" in doc:
        kwargs["mean_gap"] = timedelta(hours=float(doc["mean_gap_hours"]))
    for key in ("coverage_radius_m", "jitter_m", "base_ping_ms", "base_download_mbps",
                "upload_fraction", "ping_slope", "download_slope", "download_floor",
                "noise_sigma"):
        if key in doc:
            kwargs[key] = float(doc[key])
    return SimConfig(**kwargs)
