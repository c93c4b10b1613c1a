from __future__ import annotations

from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import settings

from covmap.model import Measurement, Site, SiteStatus

settings.register_profile("covmap", deadline=None, max_examples=60)
settings.load_profile("covmap")

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _ACCEPTANCE_RESULTS.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_RESULTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, outcome in _ACCEPTANCE_RESULTS:
            label = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
            terminalreporter.write_line(f"{label}  {name}")

UTC = timezone.utc
T0 = datetime(2021, 2, 1, tzinfo=UTC)


@pytest.fixture
def three_sites() -> tuple[Site, ...]:
    return (
        Site("alpha", "Alpha", "1 Alpha St", 47.25, -122.44, SiteStatus.ACTIVE),
        Site("bravo", "Bravo", "2 Bravo Ave", 47.24, -122.44, SiteStatus.ACTIVE),
        Site("charlie", "Charlie", "3 Charlie Way", 47.55, -122.28, SiteStatus.CONFIRMED),
    )


def make_measurement(
    device_id: str = "dev-001",
    site_id: str = "alpha",
    at: datetime | None = None,
    lat: float = 47.25,
    lon: float = -122.44,
    ping: float = 42.0,
    up: float = 5.0,
    down: float = 20.0,
) -> Measurement:
    return Measurement(
        device_id=device_id,
        site_id=site_id,
        timestamp=at if at is not None else T0,
        latitude=lat,
        longitude=lon,
        ping_ms=ping,
        upload_mbps=up,
        download_mbps=down,
    )


def random_measurements(
    rng: np.random.Generator,
    n: int,
    sites: list[str],
    lat_range=(47.0, 47.8),
    lon_range=(-122.6, -122.1),
    start: datetime = T0,
    span: timedelta = timedelta(days=7),
) -> list[Measurement]:
    """Uniform random reports around the Puget Sound test region."""
    out = []
    span_s = int(span.total_seconds())
    for k in range(n):
        out.append(
            Measurement(
                device_id=f"dev-{k % 37:03d}",
                site_id=sites[int(rng.integers(len(sites)))],
                timestamp=start + timedelta(seconds=int(rng.integers(span_s))),
                latitude=float(rng.uniform(*lat_range)),
                longitude=float(rng.uniform(*lon_range)),
                ping_ms=float(rng.uniform(1.0, 200.0)),
                upload_mbps=float(rng.uniform(0.0, 20.0)),
                download_mbps=float(rng.uniform(0.0, 80.0)),
            )
        )
    return out
