/** Multi-series SVG line chart: one line per base station, hourly means.
 *
 * Hovering a line names its base station. Hours with no data are simply
 * absent from the series, so lines connect across gaps.
 */

import { Metric, METRIC_LABELS, METRIC_UNITS, TimeseriesResponse } from './types.js';
import { seriesColor } from './viridis.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface ChartOptions {
  width?: number;
  height?: number;
}

const MARGIN = { top: 10, right: 16, bottom: 24, left: 48 };

export class LineChart {
  private readonly root: HTMLElement;
  private readonly width: number;
  private readonly height: number;
  private readonly hoverLabel: HTMLElement;

  constructor(container: HTMLElement, options: ChartOptions = {}) {
    this.width = options.width ?? 720;
    this.height = options.height ?? 220;
    this.root = document.createElement('div');
    this.root.className = 'chart';
    this.hoverLabel = document.createElement('div');
    this.hoverLabel.className = 'chart-hover';
    this.hoverLabel.hidden = true;
    container.appendChild(this.root);
    container.appendChild(this.hoverLabel);
  }

  /** Replace the chart with the given per-site series. */
  render(series: TimeseriesResponse, metric: Metric, siteNames: Map<string, string>): void {
    this.root.replaceChildren();
    this.hoverLabel.hidden = true;

    const svg = document.createElementNS(SVG_NS, 'svg');
    svg.setAttribute('width', String(this.width));
    svg.setAttribute('height', String(this.height));
    svg.setAttribute('viewBox', `0 0 ${this.width} ${this.height}`);
    svg.setAttribute('role', 'img');
    this.root.appendChild(svg);

    const siteIds = Object.keys(series).filter((site) => (series[site] ?? []).length > 0);
    const axisLabel = document.createElementNS(SVG_NS, 'text');
    axisLabel.setAttribute('class', 'chart-axis-label');
    axisLabel.setAttribute('x', '4');
    axisLabel.setAttribute('y', '14');
    axisLabel.textContent = `${METRIC_LABELS[metric]}, ${METRIC_UNITS[metric]}`;
    svg.appendChild(axisLabel);

    if (!siteIds.length) {
      const empty = document.createElementNS(SVG_NS, 'text');
      empty.setAttribute('class', 'chart-empty');
      empty.setAttribute('x', String(this.width / 2));
      empty.setAttribute('y', String(this.height / 2));
      empty.setAttribute('text-anchor', 'middle');
      empty.textContent = 'no sites selected';
      svg.appendChild(empty);
      return;
    }

    let tMin = Infinity;
    let tMax = -Infinity;
    let vMin = Infinity;
    let vMax = -Infinity;
    for (const site of siteIds) {
      for (const point of series[site] ?? []) {
        const t = Date.parse(point.t);
        tMin = Math.min(tMin, t);
        tMax = Math.max(tMax, t);
        vMin = Math.min(vMin, point.value);
        vMax = Math.max(vMax, point.value);
      }
    }
    if (tMax === tMin) tMax = tMin + 1;
    if (vMax === vMin) vMax = vMin + 1;

    const plotW = this.width - MARGIN.left - MARGIN.right;
    const plotH = this.height - MARGIN.top - MARGIN.bottom;
    const xOf = (t: number) => MARGIN.left + ((t - tMin) / (tMax - tMin)) * plotW;
    const yOf = (v: number) => MARGIN.top + (1 - (v - vMin) / (vMax - vMin)) * plotH;

    for (const [tick, anchor] of [
      [vMax, 'hanging'],
      [vMin, 'auto'],
    ] as const) {
      const label = document.createElementNS(SVG_NS, 'text');
      label.setAttribute('class', 'chart-tick');
      label.setAttribute('x', '4');
      label.setAttribute('y', String(yOf(tick)));
      label.setAttribute('dominant-baseline', anchor);
      label.textContent = tick.toPrecision(4);
      svg.appendChild(label);
    }
    for (const t of [tMin, tMax]) {
      const label = document.createElementNS(SVG_NS, 'text');
      label.setAttribute('class', 'chart-tick');
      label.setAttribute('x', String(xOf(t)));
      label.setAttribute('y', String(this.height - 6));
      label.setAttribute('text-anchor', t === tMin ? 'start' : 'end');
      label.textContent = new Date(t).toISOString().slice(0, 16).replace('T', ' ');
      svg.appendChild(label);
    }

    siteIds.forEach((site, index) => {
      const points = series[site] ?? [];
      const d = points
        .map(
          (point, k) =>
            `${k === 0 ? 'M' : 'L'}${xOf(Date.parse(point.t)).toFixed(1)},${yOf(point.value).toFixed(1)}`,
        )
        .join(' ');
      const path = document.createElementNS(SVG_NS, 'path');
      path.setAttribute('class', 'series-line');
      path.setAttribute('d', d);
      path.setAttribute('fill', 'none');
      path.setAttribute('stroke', seriesColor(index));
      path.setAttribute('stroke-width', '2');
      path.dataset.siteId = site;
      const name = siteNames.get(site) ?? site;
      path.addEventListener('mouseenter', () => {
        this.hoverLabel.textContent = name;
        this.hoverLabel.hidden = false;
      });
      path.addEventListener('mouseleave', () => {
        this.hoverLabel.hidden = true;
      });
      svg.appendChild(path);
    });
  }

  /** Site ids of the lines currently drawn (for tests and debugging). */
  seriesIds(): string[] {
    return Array.from(this.root.querySelectorAll<SVGPathElement>('path.series-line')).map(
      (path) => path.dataset.siteId ?? '',
    );
  }
}
