from __future__ import annotations

from datetime import timedelta

import numpy as np
import pytest

from covmap import aggregate
from covmap.mercator import GridSpec, grid_cell_meters, world_px
from covmap.model import MetricKind
from covmap.oracle import (
    BulkOracle,
    compare_heatmap,
    compare_timeseries,
    heatmap_reference,
    random_grids,
    run_oracle_check,
    timeseries_reference,
)
from covmap.store import MeasurementStore, Snapshot

from tests.conftest import random_measurements


@pytest.fixture(scope="module")
def snapshot() -> Snapshot:
    rng = np.random.default_rng(909)
    return Snapshot.from_measurements(
        random_measurements(rng, 2500, ["alpha", "bravo", "charlie"], span=timedelta(days=5))
    )


@pytest.fixture(scope="module")
def multipart_snapshot(tmp_path_factory) -> Snapshot:
    rng = np.random.default_rng(910)
    ms = random_measurements(rng, 900, ["alpha", "bravo"], span=timedelta(days=3))
    with MeasurementStore(tmp_path_factory.mktemp("parts") / "d.jsonl", fsync=False) as st:
        st.SEAL_THRESHOLD = 128
        for m in ms:
            st.ingest(m)
        return st.snapshot()


class TestTriangulation:
    """BulkOracle, pure-Python reference, and production must all agree."""

    @pytest.mark.parametrize("seed", range(4))
    def test_heatmap_three_way(self, snapshot, seed):
        rng = np.random.default_rng(seed)
        grids = random_grids(rng, (47.0, 47.8), (-122.6, -122.1), 3, min_cell_meters=300.0)
        oracle = BulkOracle(snapshot)
        ms = snapshot.measurements()
        for grid in grids:
            metric = list(MetricKind)[seed % 3]
            produced = aggregate.heatmap(snapshot, ["alpha", "charlie"], metric, grid, 2)
            bulk = oracle.heatmap(["alpha", "charlie"], metric, grid, 2)
            pure = heatmap_reference(ms, ["alpha", "charlie"], metric, grid, 2)
            assert compare_heatmap(produced, bulk) == []
            assert compare_heatmap(produced, pure) == []

    def test_timeseries_three_way(self, snapshot):
        oracle = BulkOracle(snapshot)
        ms = snapshot.measurements()
        sites = ["alpha", "bravo", "charlie"]
        for metric in MetricKind:
            produced = aggregate.timeseries(snapshot, sites, metric)
            bulk = oracle.timeseries(sites, metric)
            pure = timeseries_reference(ms, sites, metric)
            assert compare_timeseries(produced, bulk) == []
            assert compare_timeseries(produced, pure) == []

    def test_heatmap_across_sealed_parts(self, multipart_snapshot):
        assert len(multipart_snapshot.parts) > 3
        rng = np.random.default_rng(5)
        (grid,) = random_grids(rng, (47.0, 47.8), (-122.6, -122.1), 1, min_cell_meters=300.0)
        produced = aggregate.heatmap(multipart_snapshot, ["alpha", "bravo"], MetricKind.PING, grid, 1)
        pure = heatmap_reference(multipart_snapshot.measurements(), ["alpha", "bravo"], MetricKind.PING, grid, 1)
        assert compare_heatmap(produced, pure) == []


class TestCompareFunctions:
    def test_compare_detects_count_and_value_drift(self, snapshot):
        rng = np.random.default_rng(1)
        (grid,) = random_grids(rng, (47.0, 47.8), (-122.6, -122.1), 1, min_cell_meters=300.0)
        cells = aggregate.heatmap(snapshot, ["alpha"], MetricKind.PING, grid, 1)
        if not cells:
            pytest.skip("grid missed the data")
        expected = BulkOracle(snapshot).heatmap(["alpha"], MetricKind.PING, grid, 1)
        key = (cells[0].index.i, cells[0].index.j)
        tampered = dict(expected)
        tampered[key] = (expected[key][0] * (1 + 1e-6), expected[key][1])
        assert compare_heatmap(cells, tampered) != []
        tampered[key] = (expected[key][0], expected[key][1] + 1)
        assert compare_heatmap(cells, tampered) != []
        missing = dict(expected)
        del missing[key]
        assert compare_heatmap(cells, missing) != []


class TestRandomGrids:
    def test_grids_honor_floor_and_bounds(self):
        rng = np.random.default_rng(55)
        grids = random_grids(rng, (47.0, 47.8), (-122.6, -122.1), 40, min_cell_meters=300.0)
        assert len(grids) == 40
        for g in grids:
            assert grid_cell_meters(g) >= 300.0
            assert g.origin_x + g.width_px <= world_px(g.zoom)
            assert g.origin_y + g.height_px <= world_px(g.zoom)
            assert g.n_cells <= 65536

    def test_deterministic_given_seed(self):
        a = random_grids(np.random.default_rng(9), (47.0, 47.8), (-122.6, -122.1), 5, min_cell_meters=300.0)
        b = random_grids(np.random.default_rng(9), (47.0, 47.8), (-122.6, -122.1), 5, min_cell_meters=300.0)
        assert a == b


class TestRunOracleCheck:
    def test_passes_on_consistent_store(self, snapshot):
        report = run_oracle_check(snapshot, ["alpha", "bravo", "charlie"], n_grids=8, seed=3)
        assert report.ok, report.problems
        assert report.grids_checked == 8
        assert report.series_checked == 3

    def test_empty_snapshot_fails(self):
        report = run_oracle_check(Snapshot.from_measurements([]), ["alpha"], n_grids=2)
        assert not report.ok
