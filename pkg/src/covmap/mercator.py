"""Web-Mercator world-pixel projection and viewport grid binning.

World pixel space at zoom z is a square with side 256·2^z pixels, origin at
the top-left (longitude −180°, latitude +85.05113°); x grows east and y grows
south. This is the coordinate space of standard street-tile basemaps, so grid
boxes computed here line up with the tiles the dashboard draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadGrid, LatitudeOutOfProjectionDomain, OutOfRange

TILE_PX = 256

#: Projection domain bound. Slightly beyond the exact y=0 latitude
#: atan(sinh(pi)) ≈ 85.0511288°; projected pixels are clamped into the world
#: square to absorb the ~1e-5 px excursion at the bound itself.
MAX_LATITUDE = 85.05113

#: Equatorial radius of the Web-Mercator sphere, meters.
EARTH_RADIUS_M = 6378137.0


def world_px(zoom: int) -> float:
    """Side length in pixels of the world square at `zoom`."""
    if not isinstance(zoom, int) or isinstance(zoom, bool) or zoom < 0:
        raise BadGrid(f"zoom must be a non-negative integer, got {zoom!r}")
    return float(TILE_PX * (1 << zoom))


@dataclass(frozen=True)
class PixelPoint:
    """A position in world-pixel space at some zoom."""

    x: float
    y: float


@dataclass(frozen=True)
class CellIndex:
    """(column, row) of a grid box, counted from the viewport top-left."""

    i: int
    j: int


@dataclass(frozen=True)
class GridSpec:
    """Viewport and grid-box geometry of one heatmap request."""

    zoom: int
    origin_x: float
    origin_y: float
    width_px: float
    height_px: float
    cell_px: int

    def __post_init__(self):
        world = world_px(self.zoom)
        if not isinstance(self.cell_px, int) or isinstance(self.cell_px, bool) or self.cell_px < 1:
            raise BadGrid(f"cell_px must be a positive integer, got {self.cell_px!r}")
        for name in ("origin_x", "origin_y", "width_px", "height_px"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                raise BadGrid(f"{name} must be a finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.origin_x < 0 or self.origin_y < 0:
            raise BadGrid("viewport origin must be non-negative")
        if self.width_px <= 0 or self.height_px <= 0:
            raise BadGrid("viewport extent must be positive")
        if self.origin_x + self.width_px > world or self.origin_y + self.height_px > world:
            raise BadGrid(f"viewport exceeds the {world:.0f} px world at zoom {self.zoom}")

    @property
    def n_cols(self) -> int:
        return math.ceil(self.width_px / self.cell_px)

    @property
    def n_rows(self) -> int:
        return math.ceil(self.height_px / self.cell_px)

    @property
    def n_cells(self) -> int:
        return self.n_cols * self.n_rows


def project(latitude: float, longitude: float, zoom: int) -> PixelPoint:
    """Map WGS84 degrees to world pixels at `zoom`.

    x is linear in longitude; y follows the spherical Mercator stretch
    y = (1 − ln(tan φ + sec φ)/π)/2 · world.
    """
    if not (-MAX_LATITUDE <= latitude <= MAX_LATITUDE):
        raise LatitudeOutOfProjectionDomain(
            f"latitude {latitude} outside the ±{MAX_LATITUDE}° projection domain"
        )
    if not (-180.0 <= longitude <= 180.0):
        raise OutOfRange("longitude", f"longitude {longitude} outside [-180, 180]")
    world = world_px(zoom)
    x = (longitude + 180.0) / 360.0 * world
    phi = math.radians(latitude)
    y = (1.0 - math.log(math.tan(phi) + 1.0 / math.cos(phi)) / math.pi) / 2.0 * world
    return PixelPoint(min(max(x, 0.0), world), min(max(y, 0.0), world))


def unproject(point: PixelPoint, zoom: int) -> tuple[float, float]:
    """Inverse of `project`: world pixels back to (latitude, longitude)."""
    world = world_px(zoom)
    if not (0.0 <= point.x <= world and 0.0 <= point.y <= world):
        raise OutOfRange("point", f"pixel point {point} outside the world square at zoom {zoom}")
    longitude = point.x / world * 360.0 - 180.0
    latitude = math.degrees(math.atan(math.sinh(math.pi * (1.0 - 2.0 * point.y / world))))
    return latitude, longitude


def project_many(latitudes: np.ndarray, longitudes: np.ndarray, zoom: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized `project`; rows with |latitude| beyond the domain become NaN.

    NaN rows fail every viewport comparison, so unprojectable (but otherwise
    valid) measurements simply never land in any grid cell.
    """
    world = world_px(zoom)
    lat = np.asarray(latitudes, dtype=np.float64)
    lon = np.asarray(longitudes, dtype=np.float64)
    x = (lon + 180.0) / 360.0 * world
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        phi = np.radians(lat)
        y = (1.0 - np.log(np.tan(phi) + 1.0 / np.cos(phi)) / math.pi) / 2.0 * world
    x = np.clip(x, 0.0, world)
    y = np.clip(y, 0.0, world)
    bad = np.abs(lat) > MAX_LATITUDE
    if bad.any():
        x = np.where(bad, np.nan, x)
        y = np.where(bad, np.nan, y)
    return x, y


def cell_of(point: PixelPoint, grid: GridSpec) -> CellIndex | None:
    """Grid box containing `point`, or None when outside the viewport.

    Boxes are half-open: a point exactly on a shared edge belongs to the box
    to its right/below, and the viewport itself is half-open on its
    right/bottom edges.
    """
    dx = point.x - grid.origin_x
    dy = point.y - grid.origin_y
    if not (0.0 <= dx < grid.width_px and 0.0 <= dy < grid.height_px):
        return None
    return CellIndex(int(dx // grid.cell_px), int(dy // grid.cell_px))


def meters_per_pixel(latitude: float, zoom: int) -> float:
    """Ground distance covered by one pixel at `latitude` and `zoom`."""
    return math.cos(math.radians(latitude)) * 2.0 * math.pi * EARTH_RADIUS_M / world_px(zoom)


def grid_cell_meters(grid: GridSpec) -> float:
    """Ground edge length of one grid box, evaluated at the viewport center."""
    center = PixelPoint(grid.origin_x + grid.width_px / 2.0, grid.origin_y + grid.height_px / 2.0)
    latitude, _ = unproject(center, grid.zoom)
    return grid.cell_px * meters_per_pixel(latitude, grid.zoom)
