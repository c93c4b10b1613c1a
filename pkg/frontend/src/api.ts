/** Typed client for the coverage backend; all data reaches the dashboard
 * through these four endpoints.
 */

import {
  GridRequest,
  HeatmapCell,
  Metric,
  SiteInfo,
  SiteSummary,
  TimeseriesResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (url: string) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  private async getJson<T>(path: string, params?: Record<string, string | number>): Promise<T> {
    const query = params
      ? '?' +
        Object.entries(params)
          .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`)
          .join('&')
      : '';
    const response = await this.fetchFn(`${this.baseUrl}${path}${query}`);
    if (!response.ok) {
      let code = 'error';
      let message = `${response.status} on ${path}`;
      try {
        const body = (await response.json()) as { code?: string; message?: string };
        code = body.code ?? code;
        message = body.message ?? message;
      } catch {
        // leave the generic message
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  getSites(): Promise<SiteInfo[]> {
    return this.getJson<SiteInfo[]>('/api/sites');
  }

  getHeatmap(sites: string[], metric: Metric, grid: GridRequest): Promise<HeatmapCell[]> {
    return this.getJson<HeatmapCell[]>('/api/heatmap', {
      sites: sites.join(','),
      metric,
      zoom: grid.zoom,
      origin_x: grid.origin_x,
      origin_y: grid.origin_y,
      width_px: grid.width_px,
      height_px: grid.height_px,
      cell_px: grid.cell_px,
    });
  }

  getTimeseries(sites: string[], metric: Metric): Promise<TimeseriesResponse> {
    return this.getJson<TimeseriesResponse>('/api/timeseries', {
      sites: sites.join(','),
      metric,
    });
  }

  getSiteSummary(siteId: string): Promise<SiteSummary> {
    return this.getJson<SiteSummary>('/api/site-summary', { site: siteId });
  }
}
