/** Slippy-map pane: grey street tiles, site pins, heatmap overlay, legend.
 *
 * The heatmap is drawn as translucent absolutely-positioned boxes, one per
 * grid cell, colored on the Viridis ramp with per-response normalization.
 * No measurement data lives here: everything rendered arrives from the API.
 */

import { clampCellPx, project, unproject, worldPx } from './mercator.js';
import { GridRequest, HeatmapCell, Metric, METRIC_UNITS, SiteInfo, SiteSummary } from './types.js';
import { colorScale } from './viridis.js';

const DEFAULT_TILE_URL = 'https://basemaps.cartocdn.com/light_all/{z}/{x}/{y}.png';

export interface MapOptions {
  width: number;
  height: number;
  minCellMeters: number;
  desiredCellPx?: number;
  tileUrl?: string;
  /** Fired after the user zooms or pans (viewport intent, not yet rendered). */
  onViewportChange?: (centerLat: number, centerLon: number, zoom: number) => void;
  onPinClick?: (site: SiteInfo) => void;
}

interface Viewport {
  centerLat: number;
  centerLon: number;
  zoom: number;
}

export class MapView {
  private readonly opts: Required<Pick<MapOptions, 'width' | 'height' | 'minCellMeters'>> &
    MapOptions;
  private view: Viewport = { centerLat: 47.4, centerLon: -122.35, zoom: 10 };
  private sites: SiteInfo[] = [];
  private visible = new Set<string>();

  readonly root: HTMLElement;
  private readonly tileLayer: HTMLElement;
  private readonly heatLayer: HTMLElement;
  private readonly pinLayer: HTMLElement;
  private readonly popup: HTMLElement;
  private readonly legend: HTMLElement;

  constructor(container: HTMLElement, options: MapOptions) {
    this.opts = { desiredCellPx: 32, tileUrl: DEFAULT_TILE_URL, ...options };
    this.root = document.createElement('div');
    this.root.className = 'map-root';
    this.root.style.width = `${options.width}px`;
    this.root.style.height = `${options.height}px`;

    this.tileLayer = this.layer('tile-layer');
    this.heatLayer = this.layer('heatmap-layer');
    this.pinLayer = this.layer('pin-layer');

    this.popup = document.createElement('div');
    this.popup.className = 'map-popup';
    this.popup.hidden = true;
    this.root.appendChild(this.popup);

    this.legend = document.createElement('div');
    this.legend.className = 'map-legend';
    this.legend.hidden = true;
    this.root.appendChild(this.legend);

    const zoomBox = document.createElement('div');
    zoomBox.className = 'zoom-controls';
    const zoomIn = document.createElement('button');
    zoomIn.className = 'zoom-in';
    zoomIn.textContent = '+';
    zoomIn.addEventListener('click', () => this.zoomBy(1));
    const zoomOut = document.createElement('button');
    zoomOut.className = 'zoom-out';
    zoomOut.textContent = '−';
    zoomOut.addEventListener('click', () => this.zoomBy(-1));
    zoomBox.append(zoomIn, zoomOut);
    this.root.appendChild(zoomBox);

    this.attachDragPan();
    container.appendChild(this.root);
  }

  private layer(className: string): HTMLElement {
    const el = document.createElement('div');
    el.className = `map-layer ${className}`;
    this.root.appendChild(el);
    return el;
  }

  // -- viewport --------------------------------------------------------------

  get viewport(): Viewport {
    return { ...this.view };
  }

  /** World-pixel coordinates of the viewport's top-left corner. */
  private origin(): { x: number; y: number } {
    const center = project(this.view.centerLat, this.view.centerLon, this.view.zoom);
    const world = worldPx(this.view.zoom);
    const x = Math.min(Math.max(center.x - this.opts.width / 2, 0), Math.max(world - this.opts.width, 0));
    const y = Math.min(Math.max(center.y - this.opts.height / 2, 0), Math.max(world - this.opts.height, 0));
    return { x, y };
  }

  /** The heatmap request for the current viewport; cell size stays at or
   * above the privacy floor, so zooming in never trips the server. */
  gridRequest(): GridRequest {
    const { x, y } = this.origin();
    const world = worldPx(this.view.zoom);
    return {
      zoom: this.view.zoom,
      origin_x: x,
      origin_y: y,
      width_px: Math.min(this.opts.width, world),
      height_px: Math.min(this.opts.height, world),
      cell_px: clampCellPx(
        this.opts.desiredCellPx ?? 32,
        this.view.centerLat,
        this.view.zoom,
        this.opts.minCellMeters,
      ),
    };
  }

  setViewport(centerLat: number, centerLon: number, zoom: number): void {
    this.view = { centerLat, centerLon, zoom };
    this.renderTiles();
    this.renderPins();
  }

  zoomBy(delta: number): void {
    const zoom = Math.min(19, Math.max(2, this.view.zoom + delta));
    if (zoom !== this.view.zoom) {
      this.opts.onViewportChange?.(this.view.centerLat, this.view.centerLon, zoom);
    }
  }

  panBy(dxPx: number, dyPx: number): void {
    const { x, y } = this.origin();
    const center = unproject(
      x + this.opts.width / 2 + dxPx,
      y + this.opts.height / 2 + dyPx,
      this.view.zoom,
    );
    this.opts.onViewportChange?.(center.lat, center.lon, this.view.zoom);
  }

  private attachDragPan(): void {
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    this.root.addEventListener('mousedown', (event) => {
      dragging = true;
      lastX = event.clientX;
      lastY = event.clientY;
    });
    window.addEventListener('mouseup', (event) => {
      if (!dragging) return;
      dragging = false;
      const dx = lastX - event.clientX;
      const dy = lastY - event.clientY;
      if (dx !== 0 || dy !== 0) {
        this.panBy(dx, dy);
      }
    });
  }

  // -- layers ----------------------------------------------------------------

  private renderTiles(): void {
    this.tileLayer.replaceChildren();
    const { x, y } = this.origin();
    const zoom = this.view.zoom;
    const maxTile = Math.pow(2, zoom) - 1;
    const x0 = Math.floor(x / 256);
    const y0 = Math.floor(y / 256);
    const x1 = Math.floor((x + this.opts.width - 1) / 256);
    const y1 = Math.floor((y + this.opts.height - 1) / 256);
    for (let ty = Math.max(0, y0); ty <= Math.min(maxTile, y1); ty++) {
      for (let tx = Math.max(0, x0); tx <= Math.min(maxTile, x1); tx++) {
        const img = document.createElement('img');
        img.className = 'map-tile';
        img.width = 256;
        img.height = 256;
        img.style.left = `${tx * 256 - x}px`;
        img.style.top = `${ty * 256 - y}px`;
        img.alt = '';
        img.draggable = false;
        img.addEventListener('error', () => {
          img.style.visibility = 'hidden'; // grey pane background shows instead
        });
        img.src = (this.opts.tileUrl ?? DEFAULT_TILE_URL)
          .replace('{z}', String(zoom))
          .replace('{x}', String(tx))
          .replace('{y}', String(ty));
        this.tileLayer.appendChild(img);
      }
    }
  }

  setSites(sites: SiteInfo[]): void {
    this.sites = sites;
    this.renderPins();
  }

  setVisibleSites(siteIds: Iterable<string>): void {
    this.visible = new Set(siteIds);
    this.renderPins();
    if (this.popup.dataset.siteId && !this.visible.has(this.popup.dataset.siteId)) {
      this.closePopup();
    }
  }

  private renderPins(): void {
    this.pinLayer.replaceChildren();
    const { x, y } = this.origin();
    for (const site of this.sites) {
      if (!this.visible.has(site.site_id)) continue;
      const p = project(site.latitude, site.longitude, this.view.zoom);
      const pin = document.createElement('button');
      pin.className = 'site-pin';
      pin.dataset.siteId = site.site_id;
      pin.title = site.name;
      pin.style.left = `${p.x - x}px`;
      pin.style.top = `${p.y - y}px`;
      pin.addEventListener('click', (event) => {
        event.stopPropagation();
        this.opts.onPinClick?.(site);
      });
      this.pinLayer.appendChild(pin);
    }
  }

  /** Draw one response's cells. `grid` must be the request that produced
   * them; boxes are placed at grid-origin offsets so they tile exactly. */
  renderHeatmap(cells: HeatmapCell[], metric: Metric, grid: GridRequest): void {
    this.heatLayer.replaceChildren();
    if (!cells.length) {
      this.legend.hidden = true;
      return;
    }
    const { x, y } = this.origin();
    const scale = colorScale(cells.map((cell) => cell.value), metric);
    for (const cell of cells) {
      const box = document.createElement('div');
      box.className = 'heat-cell';
      box.style.left = `${grid.origin_x - x + cell.i * grid.cell_px}px`;
      box.style.top = `${grid.origin_y - y + cell.j * grid.cell_px}px`;
      box.style.width = `${grid.cell_px}px`;
      box.style.height = `${grid.cell_px}px`;
      box.style.background = scale.color(cell.value);
      box.title = `${cell.value.toPrecision(4)} ${METRIC_UNITS[metric]} (${cell.count} reports)`;
      this.heatLayer.appendChild(box);
    }
    this.renderLegend(scale.min, scale.max, metric, scale.cssGradient(), scale.betterEnd);
  }

  private renderLegend(
    min: number,
    max: number,
    metric: Metric,
    gradient: string,
    betterEnd: 'min' | 'max',
  ): void {
    this.legend.hidden = false;
    this.legend.replaceChildren();
    const bar = document.createElement('div');
    bar.className = 'legend-bar';
    bar.style.background = gradient;
    const labels = document.createElement('div');
    labels.className = 'legend-labels';
    const unit = METRIC_UNITS[metric];
    const left = document.createElement('span');
    left.textContent = `${min.toPrecision(3)} ${unit}${betterEnd === 'min' ? ' (better)' : ''}`;
    const right = document.createElement('span');
    right.textContent = `${max.toPrecision(3)} ${unit}${betterEnd === 'max' ? ' (better)' : ''}`;
    labels.append(left, right);
    this.legend.append(bar, labels);
  }

  // -- popup -----------------------------------------------------------------

  /** Show the single pin popup; filled from the summary fetch when it lands. */
  showPopup(site: SiteInfo, summary: Promise<SiteSummary>): void {
    this.popup.hidden = false;
    this.popup.dataset.siteId = site.site_id;
    this.popup.replaceChildren();

    const name = document.createElement('div');
    name.className = 'popup-name';
    name.textContent = site.name;
    const status = document.createElement('div');
    status.className = 'popup-status';
    status.textContent = `status: ${site.status} · ${site.available ? 'available now' : 'not reporting'}`;
    const address = document.createElement('div');
    address.className = 'popup-address';
    address.textContent = site.address;
    const metrics = document.createElement('div');
    metrics.className = 'popup-metrics';
    metrics.textContent = 'loading…';
    this.popup.append(name, status, address, metrics);

    const forSite = site.site_id;
    summary.then(
      (body) => {
        if (this.popup.hidden || this.popup.dataset.siteId !== forSite) return;
        if (body.avg_ping_ms === null) {
          metrics.textContent = 'no recent data';
          return;
        }
        metrics.replaceChildren();
        const rows: Array<[string, number | null, string]> = [
          ['ping', body.avg_ping_ms, 'ms'],
          ['upload', body.avg_upload_mbps, 'Mbps'],
          ['download', body.avg_download_mbps, 'Mbps'],
        ];
        for (const [label, value, unit] of rows) {
          const row = document.createElement('div');
          row.className = 'popup-metric';
          row.textContent = `${label}: ${value === null ? '—' : `${value.toPrecision(3)} ${unit}`}`;
          metrics.appendChild(row);
        }
      },
      () => {
        if (this.popup.hidden || this.popup.dataset.siteId !== forSite) return;
        metrics.textContent = 'summary unavailable';
      },
    );
  }

  closePopup(): void {
    this.popup.hidden = true;
    delete this.popup.dataset.siteId;
  }

  get popupElement(): HTMLElement {
    return this.popup;
  }

  get heatLayerElement(): HTMLElement {
    return this.heatLayer;
  }

  get legendElement(): HTMLElement {
    return this.legend;
  }
}
