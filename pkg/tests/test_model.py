from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from covmap.errors import (
    AppError,
    BadMetric,
    BadTimestamp,
    MissingField,
    OutOfRange,
)
from covmap.model import (
    MEASUREMENT_FIELDS,
    Measurement,
    MetricKind,
    Site,
    SiteStatus,
    TimeBucket,
    epoch_us,
    format_timestamp,
    from_epoch_us,
    hour_floor,
    metric_of,
    parse_timestamp,
    validate_measurement,
)
from covmap.store import format_record, parse_record

UTC = timezone.utc


def valid_raw(**overrides) -> dict:
    raw = {
        "device_id": "dev-001",
        "site_id": "alpha",
        "timestamp": "2021-02-01T00:15:00Z",
        "latitude": 47.60,
        "longitude": -122.33,
        "ping_ms": 42.0,
        "upload_mbps": 1.5,
        "download_mbps": 18.5,
    }
    raw.update(overrides)
    return raw


class TestValidateMeasurement:
    def test_full_valid_record_accepted(self):
        m = validate_measurement(valid_raw())
        assert m.latitude == 47.60
        assert m.longitude == -122.33
        assert m.ping_ms == 42.0
        assert m.timestamp == datetime(2021, 2, 1, 0, 15, tzinfo=UTC)

    def test_latitude_91_out_of_range(self):
        with pytest.raises(OutOfRange) as exc:
            validate_measurement(valid_raw(latitude=91.0))
        assert exc.value.field == "latitude"

    def test_missing_download_mbps(self):
        raw = valid_raw()
        del raw["download_mbps"]
        with pytest.raises(MissingField) as exc:
            validate_measurement(raw)
        assert exc.value.field == "download_mbps"

    @pytest.mark.parametrize("field,value", [
        ("latitude", -90.1),
        ("longitude", 180.5),
        ("longitude", -181),
        ("ping_ms", 0.0),
        ("ping_ms", -1.0),
        ("upload_mbps", -0.1),
        ("download_mbps", -5),
        ("ping_ms", float("nan")),
        ("download_mbps", float("inf")),
        ("latitude", "not-a-number"),
    ])
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(OutOfRange) as exc:
            validate_measurement(valid_raw(**{field: value}))
        assert exc.value.field == field

    def test_boundary_coordinates_accepted(self):
        m = validate_measurement(valid_raw(latitude=90, longitude=-180))
        assert m.latitude == 90.0

    def test_zero_speeds_accepted_zero_ping_rejected(self):
        m = validate_measurement(valid_raw(upload_mbps=0.0, download_mbps=0))
        assert m.upload_mbps == 0.0
        with pytest.raises(OutOfRange):
            validate_measurement(valid_raw(ping_ms=0))

    def test_empty_device_id_is_missing(self):
        with pytest.raises(MissingField) as exc:
            validate_measurement(valid_raw(device_id="  "))
        assert exc.value.field == "device_id"

    def test_numeric_strings_coerced(self):
        m = validate_measurement(valid_raw(latitude="47.6", ping_ms="10"))
        assert m.latitude == 47.6 and m.ping_ms == 10.0

    def test_extra_keys_ignored(self):
        m = validate_measurement(valid_raw(extra="whatever"))
        assert m.device_id == "dev-001"

    @given(st.dictionaries(
        st.sampled_from(MEASUREMENT_FIELDS + ("junk",)),
        st.one_of(
            st.none(),
            st.booleans(),
            st.integers(-200, 200),
            st.floats(allow_nan=True, allow_infinity=True),
            st.text(max_size=12),
            st.just("2021-03-04T05:06:07Z"),
        ),
        max_size=10,
    ))
    def test_total_over_arbitrary_maps(self, raw):
        # every input map yields a Measurement or exactly one typed error
        try:
            m = validate_measurement(raw)
        except (MissingField, OutOfRange, BadTimestamp):
            return
        assert isinstance(m, Measurement)


class TestTimestamps:
    def test_z_suffix_parsed_utc(self):
        assert parse_timestamp("2021-02-01T00:15:00Z") == datetime(2021, 2, 1, 0, 15, tzinfo=UTC)

    def test_offset_normalized(self):
        m = validate_measurement(valid_raw(timestamp="2021-02-01T05:15:00+05:00"))
        assert m.timestamp == datetime(2021, 2, 1, 0, 15, tzinfo=UTC)

    def test_naive_rejected(self):
        with pytest.raises(BadTimestamp):
            parse_timestamp("2021-02-01T00:15:00")
        with pytest.raises(BadTimestamp):
            parse_timestamp(datetime(2021, 2, 1))

    @pytest.mark.parametrize("bad", ["yesterday", "2021-13-01T00:00:00Z", 1612137600, 3.5])
    def test_garbage_rejected(self, bad):
        with pytest.raises(BadTimestamp):
            parse_timestamp(bad)

    def test_epoch_us_round_trip_exact(self):
        instant = datetime(2021, 6, 30, 23, 59, 59, 999999, tzinfo=UTC)
        assert from_epoch_us(epoch_us(instant)) == instant

    def test_format_timestamp(self):
        assert format_timestamp(datetime(2021, 2, 1, tzinfo=UTC)) == "2021-02-01T00:00:00Z"
        assert format_timestamp(datetime(2021, 2, 1, 0, 0, 0, 120, tzinfo=UTC)) == "2021-02-01T00:00:00.000120Z"


class TestMetricKind:
    def test_projection_examples(self, ):
        from tests.conftest import make_measurement
        m = make_measurement(ping=42.0, up=0.0, down=18.5)
        assert metric_of(m, MetricKind.PING) == 42.0
        assert metric_of(m, MetricKind.UPLOAD) == 0.0
        assert metric_of(m, MetricKind.DOWNLOAD) == 18.5

    def test_parse_bijective_with_api_strings(self):
        assert [MetricKind.parse(s) for s in ("ping", "upload", "download")] == list(MetricKind)
        assert {m.value for m in MetricKind} == {"ping", "upload", "download"}

    @pytest.mark.parametrize("bad", ["latency", "PING", "", "down"])
    def test_parse_rejects_unknown(self, bad):
        with pytest.raises(BadMetric):
            MetricKind.parse(bad)


class TestRecordRoundTrip:
    @given(
        lat=st.floats(-90, 90),
        lon=st.floats(-180, 180),
        ping=st.floats(1e-6, 1e4),
        up=st.floats(0, 1e4),
        down=st.floats(0, 1e4),
        us=st.integers(0, 4_102_444_800_000_000),
        device=st.text(st.characters(codec="utf-8", exclude_categories=("Cs", "Cc")), min_size=1, max_size=24).filter(str.strip),
    )
    def test_format_parse_identity(self, lat, lon, ping, up, down, us, device):
        m = Measurement(device, "site-1", from_epoch_us(us), lat, lon, ping, up, down)
        assert parse_record(format_record(m)) == m


class TestSiteAndBuckets:
    def test_site_validation(self):
        with pytest.raises(OutOfRange):
            Site("x", "X", "addr", 95.0, 0.0, SiteStatus.ACTIVE)
        with pytest.raises(MissingField):
            Site("", "X", "addr", 0.0, 0.0, SiteStatus.ACTIVE)
        with pytest.raises(OutOfRange):
            SiteStatus.parse("unknown")

    def test_status_strings(self):
        assert {s.value for s in SiteStatus} == {"active", "confirmed", "in-progress"}

    def test_hour_floor_and_bucket(self):
        instant = datetime(2021, 2, 1, 10, 59, 59, 999999, tzinfo=UTC)
        assert hour_floor(instant) == datetime(2021, 2, 1, 10, tzinfo=UTC)
        bucket = TimeBucket.containing(instant)
        assert bucket.start == datetime(2021, 2, 1, 10, tzinfo=UTC)
        assert bucket.end == datetime(2021, 2, 1, 11, tzinfo=UTC)

    def test_bucket_must_be_aligned(self):
        with pytest.raises(ValueError):
            TimeBucket(datetime(2021, 2, 1, 10, 30, tzinfo=UTC))

    def test_bucket_duration_fixed(self):
        assert TimeBucket.DURATION == timedelta(hours=1)

    def test_measurement_immutable(self):
        from tests.conftest import make_measurement
        m = make_measurement()
        with pytest.raises(Exception):
            m.ping_ms = 1.0  # type: ignore[misc]
