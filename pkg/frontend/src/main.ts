/** Dashboard wiring: controls on the left; map with heatmap overlay and the
 * per-site summary line chart on the right. All data arrives through the
 * backend API; interactions re-request aggregates for the current view.
 */

import { ApiClient } from './api.js';
import { LineChart } from './chart.js';
import { MetricPicker, SiteSelector } from './controls.js';
import { MapView } from './map.js';
import { debounce, Store } from './state.js';
import { Metric } from './types.js';

export interface DashboardOptions {
  apiBase: string;
  fetchFn?: (url: string) => Promise<Response>;
  mapWidth?: number;
  mapHeight?: number;
  minCellMeters?: number;
  /** Delay before zoom/pan refetches; site/metric changes refresh at once. */
  viewportDebounceMs?: number;
  initialCenter?: { lat: number; lon: number };
  initialZoom?: number;
}

export interface Dashboard {
  store: Store;
  map: MapView;
  chart: LineChart;
  selector: SiteSelector;
  api: ApiClient;
  /** Resolves when the in-flight refresh (if any) settles. */
  whenIdle(): Promise<void>;
  loadingElement: HTMLElement;
  errorElement: HTMLElement;
}

export function initDashboard(root: HTMLElement, options: DashboardOptions): Dashboard {
  const api = new ApiClient(options.apiBase, options.fetchFn);
  const store = new Store({
    selectedSites: [],
    metric: 'ping',
    centerLat: options.initialCenter?.lat ?? 47.4,
    centerLon: options.initialCenter?.lon ?? -122.35,
    zoom: options.initialZoom ?? 10,
  });

  root.replaceChildren();
  const sidebar = document.createElement('aside');
  sidebar.className = 'sidebar';
  const content = document.createElement('main');
  content.className = 'content';
  root.append(sidebar, content);

  const loading = document.createElement('div');
  loading.className = 'loading-sign';
  loading.textContent = 'loading…';
  loading.hidden = true;

  const error = document.createElement('div');
  error.className = 'error-banner';
  error.hidden = true;

  const mapBox = document.createElement('section');
  mapBox.className = 'map-box';
  const chartBox = document.createElement('section');
  chartBox.className = 'chart-box';
  content.append(error, loading, mapBox, chartBox);

  const siteNames = new Map<string, string>();
  const inflight = new Set<Promise<unknown>>();

  const map = new MapView(mapBox, {
    width: options.mapWidth ?? 760,
    height: options.mapHeight ?? 480,
    minCellMeters: options.minCellMeters ?? 300,
    onViewportChange: (lat, lon, zoom) =>
      store.update({ centerLat: lat, centerLon: lon, zoom }),
    onPinClick: (site) => {
      map.showPopup(site, track(api.getSiteSummary(site.site_id)));
    },
  });
  const chart = new LineChart(chartBox);
  const selector = new SiteSelector(sidebar, (siteIds) =>
    store.update({ selectedSites: siteIds }),
  );
  new MetricPicker(sidebar, store.current.metric, (metric: Metric) =>
    store.update({ metric }),
  );

  store.onPending((pending) => {
    loading.hidden = pending === 0;
  });

  function track<T>(promise: Promise<T>): Promise<T> {
    const done = store.begin();
    const wrapped = promise.finally(done);
    inflight.add(wrapped);
    wrapped.catch(() => undefined).finally(() => inflight.delete(wrapped));
    return wrapped;
  }

  function showError(message: string): void {
    error.textContent = message;
    error.hidden = false;
  }

  function refresh(): void {
    const version = store.version;
    const { selectedSites, metric } = store.current;
    error.hidden = true;
    if (!selectedSites.length) {
      map.renderHeatmap([], metric, map.gridRequest());
      chart.render({}, metric, siteNames);
      return;
    }
    const grid = map.gridRequest();
    track(api.getHeatmap(selectedSites, metric, grid)).then(
      (cells) => {
        if (store.isCurrent(version)) map.renderHeatmap(cells, metric, grid);
      },
      (err) => {
        if (store.isCurrent(version)) showError(`heatmap request failed: ${err.message}`);
      },
    );
    track(api.getTimeseries(selectedSites, metric)).then(
      (series) => {
        if (store.isCurrent(version)) chart.render(series, metric, siteNames);
      },
      (err) => {
        if (store.isCurrent(version)) showError(`chart request failed: ${err.message}`);
      },
    );
  }

  const refreshSoon = debounce(refresh, options.viewportDebounceMs ?? 250);

  store.onChange((state) => {
    const viewportChanged =
      state.zoom !== map.viewport.zoom ||
      state.centerLat !== map.viewport.centerLat ||
      state.centerLon !== map.viewport.centerLon;
    map.setViewport(state.centerLat, state.centerLon, state.zoom);
    map.setVisibleSites(state.selectedSites);
    if (viewportChanged) {
      refreshSoon();
    } else {
      refresh();
    }
  });

  map.setViewport(store.current.centerLat, store.current.centerLon, store.current.zoom);

  track(api.getSites()).then(
    (sites) => {
      for (const site of sites) siteNames.set(site.site_id, site.name);
      selector.setSites(sites);
      map.setSites(sites);
    },
    (err) => showError(`could not load sites: ${err.message}`),
  );

  async function whenIdle(): Promise<void> {
    while (inflight.size) {
      await Promise.allSettled(Array.from(inflight));
    }
  }

  return { store, map, chart, selector, api, whenIdle, loadingElement: loading, errorElement: error };
}
