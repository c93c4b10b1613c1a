/** Shapes of the backend API responses (see the server README). */

export type Metric = 'ping' | 'upload' | 'download';

export const METRICS: readonly Metric[] = ['ping', 'upload', 'download'];

export const METRIC_LABELS: Record<Metric, string> = {
  ping: 'Network latency (ping)',
  upload: 'Upload speed',
  download: 'Download speed',
};

export const METRIC_UNITS: Record<Metric, string> = {
  ping: 'ms',
  upload: 'Mbps',
  download: 'Mbps',
};

/** Lower ping is better; higher throughput is better. */
export function lowerIsBetter(metric: Metric): boolean {
  return metric === 'ping';
}

export interface SiteInfo {
  site_id: string;
  name: string;
  address: string;
  latitude: number;
  longitude: number;
  status: string;
  available: boolean;
}

export interface HeatmapCell {
  i: number;
  j: number;
  value: number;
  count: number;
}

export interface SeriesPoint {
  t: string;
  value: number;
  count: number;
}

export type TimeseriesResponse = Record<string, SeriesPoint[]>;

export interface SiteSummary {
  site_id: string;
  status: string;
  available: boolean;
  avg_ping_ms: number | null;
  avg_upload_mbps: number | null;
  avg_download_mbps: number | null;
  last_seen: string | null;
}

/** Heatmap request geometry, mirroring the server's GridSpec. */
export interface GridRequest {
  zoom: number;
  origin_x: number;
  origin_y: number;
  width_px: number;
  height_px: number;
  cell_px: number;
}
