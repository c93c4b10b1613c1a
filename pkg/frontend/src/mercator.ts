/** Client-side Web-Mercator math, matching the server's projection.
 *
 * World pixel space at zoom z is a 256·2^z square, origin at the top-left;
 * x grows east, y grows south.
 */

export const TILE_PX = 256;
export const MAX_LATITUDE = 85.05113;
const EARTH_RADIUS_M = 6378137.0;

export interface PixelPoint {
  x: number;
  y: number;
}

export function worldPx(zoom: number): number {
  return TILE_PX * Math.pow(2, zoom);
}

export function project(lat: number, lon: number, zoom: number): PixelPoint {
  const world = worldPx(zoom);
  const clampedLat = Math.max(-MAX_LATITUDE, Math.min(MAX_LATITUDE, lat));
  const phi = (clampedLat * Math.PI) / 180;
  const x = ((lon + 180) / 360) * world;
  const y = ((1 - Math.log(Math.tan(phi) + 1 / Math.cos(phi)) / Math.PI) / 2) * world;
  return { x: Math.min(Math.max(x, 0), world), y: Math.min(Math.max(y, 0), world) };
}

export function unproject(x: number, y: number, zoom: number): { lat: number; lon: number } {
  const world = worldPx(zoom);
  const lon = (x / world) * 360 - 180;
  const lat = (Math.atan(Math.sinh(Math.PI * (1 - (2 * y) / world))) * 180) / Math.PI;
  return { lat, lon };
}

/** Ground distance covered by one pixel at this latitude and zoom. */
export function metersPerPixel(lat: number, zoom: number): number {
  return (Math.cos((lat * Math.PI) / 180) * 2 * Math.PI * EARTH_RADIUS_M) / worldPx(zoom);
}

/**
 * Smallest cell size (px) that keeps a grid box at or above the server's
 * ground-distance privacy floor, so zooming in never trips the server's
 * grid_too_fine rejection.
 */
export function clampCellPx(
  desiredPx: number,
  centerLat: number,
  zoom: number,
  minCellMeters: number,
): number {
  // 0.1% headroom: the server re-derives the center latitude from the
  // viewport, so an exact-boundary cell size could round the other way there
  const floorPx = Math.ceil((minCellMeters * 1.001) / metersPerPixel(centerLat, zoom));
  return Math.max(1, desiredPx, floorPx);
}
