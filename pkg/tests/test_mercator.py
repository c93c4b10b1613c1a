from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from covmap.errors import BadGrid, LatitudeOutOfProjectionDomain, OutOfRange
from covmap.mercator import (
    MAX_LATITUDE,
    CellIndex,
    GridSpec,
    PixelPoint,
    cell_of,
    grid_cell_meters,
    meters_per_pixel,
    project,
    project_many,
    unproject,
    world_px,
)

# Frozen from an independent straight transcription of the Mercator formulas
# (REPL, asinh/log-tan cross-checked; tile row 357 confirms the y value).
SEATTLE = (47.6062, -122.3321)
SEATTLE_Z10_PX = (41992.483271111116, 91551.96008643284)


class TestProjectAnchors:
    def test_world_center_exact(self):
        p = project(0.0, 0.0, 0)
        assert (p.x, p.y) == (128.0, 128.0)

    def test_right_edge_exact(self):
        p = project(0.0, 180.0, 0)
        assert (p.x, p.y) == (256.0, 128.0)

    def test_seattle_anchor_within_tenth_pixel(self):
        p = project(*SEATTLE, 10)
        assert p.x == pytest.approx(SEATTLE_Z10_PX[0], abs=0.1)
        assert p.y == pytest.approx(SEATTLE_Z10_PX[1], abs=0.1)

    def test_domain_edges(self):
        top = project(MAX_LATITUDE, 0.0, 0)
        assert 0.0 <= top.y <= 1e-4  # clamped sliver at the domain bound
        with pytest.raises(LatitudeOutOfProjectionDomain):
            project(85.06, 0.0, 0)
        with pytest.raises(LatitudeOutOfProjectionDomain):
            project(-90.0, 0.0, 0)
        with pytest.raises(OutOfRange):
            project(0.0, 180.5, 0)
        with pytest.raises(BadGrid):
            project(0.0, 0.0, -1)


class TestUnproject:
    def test_center(self):
        lat, lon = unproject(PixelPoint(128.0, 128.0), 0)
        assert abs(lat) < 1e-12 and abs(lon) < 1e-12

    def test_top_left_corner(self):
        lat, lon = unproject(PixelPoint(0.0, 0.0), 0)
        assert lat == pytest.approx(85.05113, abs=1e-4)
        assert lon == pytest.approx(-180.0, abs=1e-9)

    def test_out_of_world_rejected(self):
        with pytest.raises(OutOfRange):
            unproject(PixelPoint(-1.0, 0.0), 0)

    @given(
        lat=st.floats(-85.0511, 85.0511),
        lon=st.floats(-180.0, 180.0),
        zoom=st.integers(0, 19),
    )
    def test_round_trip_identity(self, lat, lon, zoom):
        back_lat, back_lon = unproject(project(lat, lon, zoom), zoom)
        assert back_lat == pytest.approx(lat, abs=1e-9)
        assert back_lon == pytest.approx(lon, abs=1e-9)


class TestProjectionProperties:
    @given(
        lat=st.floats(-84.0, 84.0),
        lon=st.floats(-179.0, 179.0),
        zoom=st.integers(0, 18),
        dlat=st.floats(0.001, 1.0),
        dlon=st.floats(0.001, 1.0),
    )
    def test_monotone(self, lat, lon, zoom, dlat, dlon):
        p = project(lat, lon, zoom)
        east = project(lat, lon + dlon, zoom)
        north = project(lat + dlat, lon, zoom)
        assert east.x > p.x       # x strictly increases with longitude
        assert north.y < p.y      # y strictly decreases with latitude

    @given(
        lat=st.floats(-85.0, 85.0),
        lon=st.floats(-180.0, 180.0),
        zoom=st.integers(0, 20),
    )
    def test_zoom_doubling_exact(self, lat, lon, zoom):
        p = project(lat, lon, zoom)
        q = project(lat, lon, zoom + 1)
        assert q.x == 2.0 * p.x
        assert q.y == 2.0 * p.y

    def test_project_many_matches_scalar(self):
        rng = np.random.default_rng(7)
        lats = rng.uniform(-84, 84, 500)
        lons = rng.uniform(-180, 180, 500)
        xs, ys = project_many(lats, lons, 11)
        for k in range(500):
            p = project(float(lats[k]), float(lons[k]), 11)
            assert xs[k] == pytest.approx(p.x, abs=1e-9)
            assert ys[k] == pytest.approx(p.y, abs=1e-9)

    def test_project_many_nan_outside_domain(self):
        xs, ys = project_many(np.array([0.0, 89.0, -90.0]), np.array([0.0, 0.0, 0.0]), 3)
        assert not np.isnan(xs[0])
        assert np.isnan(xs[1]) and np.isnan(ys[1])
        assert np.isnan(xs[2]) and np.isnan(ys[2])


class TestGridSpec:
    def test_valid(self):
        g = GridSpec(10, 1000.0, 2000.0, 800.0, 600.0, 32)
        assert g.n_cols == 25 and g.n_rows == 19 and g.n_cells == 475

    def test_ragged_edge_counts(self):
        g = GridSpec(10, 0.0, 0.0, 810.0, 601.0, 32)
        assert g.n_cols == math.ceil(810 / 32)
        assert g.n_rows == math.ceil(601 / 32)

    @pytest.mark.parametrize("kwargs", [
        dict(zoom=-1),
        dict(cell_px=0),
        dict(cell_px=2.5),
        dict(origin_x=-1.0),
        dict(width_px=0.0),
        dict(height_px=-5.0),
        dict(origin_x=262000.0, width_px=500.0),  # spills past the z10 world
        dict(width_px=float("nan")),
    ])
    def test_invalid_rejected(self, kwargs):
        base = dict(zoom=10, origin_x=1000.0, origin_y=2000.0, width_px=800.0, height_px=600.0, cell_px=32)
        base.update(kwargs)
        with pytest.raises(BadGrid):
            GridSpec(**base)

    def test_world_sized_viewport_allowed(self):
        g = GridSpec(2, 0.0, 0.0, world_px(2), world_px(2), 256)
        assert g.n_cells == 16


class TestCellOf:
    GRID = GridSpec(10, 1000.0, 2000.0, 800.0, 600.0, 32)

    def test_origin_is_cell_zero(self):
        assert cell_of(PixelPoint(1000.0, 2000.0), self.GRID) == CellIndex(0, 0)

    def test_boundary_belongs_to_next_cell(self):
        assert cell_of(PixelPoint(1032.0, 2000.0), self.GRID) == CellIndex(1, 0)

    def test_left_of_viewport_outside(self):
        assert cell_of(PixelPoint(999.0, 2000.0), self.GRID) is None

    def test_right_bottom_edges_outside(self):
        assert cell_of(PixelPoint(1800.0, 2000.0), self.GRID) is None
        assert cell_of(PixelPoint(1000.0, 2600.0), self.GRID) is None

    @given(
        fx=st.floats(0.0, 1.0, exclude_max=True),
        fy=st.floats(0.0, 1.0, exclude_max=True),
    )
    def test_partition(self, fx, fy):
        # every in-viewport point lands in exactly one in-range cell
        p = PixelPoint(self.GRID.origin_x + fx * self.GRID.width_px,
                       self.GRID.origin_y + fy * self.GRID.height_px)
        # fx→1 can round the product onto the exclusive far edge
        assume(p.x - self.GRID.origin_x < self.GRID.width_px)
        assume(p.y - self.GRID.origin_y < self.GRID.height_px)
        cell = cell_of(p, self.GRID)
        assert cell is not None
        assert 0 <= cell.i < self.GRID.n_cols
        assert 0 <= cell.j < self.GRID.n_rows
        # the cell's half-open pixel box actually contains the point
        assert self.GRID.origin_x + cell.i * self.GRID.cell_px <= p.x
        assert p.x < self.GRID.origin_x + (cell.i + 1) * self.GRID.cell_px


class TestGroundScale:
    def test_meters_per_pixel_anchor(self):
        # frozen: cos(47.3°)·2πR/(256·2^10) at the web-mercator radius
        assert meters_per_pixel(47.3, 10) == pytest.approx(103.67, abs=0.01)

    def test_grid_cell_meters_tracks_cell_size(self):
        g32 = GridSpec(10, 41800.0, 91400.0, 800.0, 600.0, 32)
        g16 = GridSpec(10, 41800.0, 91400.0, 800.0, 600.0, 16)
        assert grid_cell_meters(g32) == pytest.approx(2 * grid_cell_meters(g16), rel=1e-9)
        assert grid_cell_meters(g32) == pytest.approx(32 * meters_per_pixel(47.45, 10), rel=0.01)
