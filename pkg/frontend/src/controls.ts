/** Left-hand site multi-select and the metric radio buttons. */

import { Metric, METRIC_LABELS, METRICS, SiteInfo } from './types.js';

export class SiteSelector {
  private readonly list: HTMLElement;
  private readonly onChange: (siteIds: string[]) => void;
  private order: string[] = [];

  constructor(container: HTMLElement, onChange: (siteIds: string[]) => void) {
    this.onChange = onChange;
    const heading = document.createElement('h2');
    heading.textContent = 'Base stations';
    this.list = document.createElement('div');
    this.list.className = 'site-list';
    container.append(heading, this.list);
  }

  setSites(sites: SiteInfo[]): void {
    this.order = sites.map((site) => site.site_id);
    this.list.replaceChildren();
    for (const site of sites) {
      const label = document.createElement('label');
      label.className = 'site-option';
      const box = document.createElement('input');
      box.type = 'checkbox';
      box.value = site.site_id;
      box.addEventListener('change', () => this.onChange(this.selected()));
      const text = document.createElement('span');
      text.textContent = site.name;
      label.append(box, text);
      this.list.appendChild(label);
    }
  }

  selected(): string[] {
    const checked = new Set(
      Array.from(this.list.querySelectorAll<HTMLInputElement>('input:checked')).map(
        (input) => input.value,
      ),
    );
    return this.order.filter((siteId) => checked.has(siteId));
  }

  /** Programmatic toggle; fires the change callback like a click would. */
  setChecked(siteId: string, checked: boolean): void {
    const input = this.list.querySelector<HTMLInputElement>(`input[value="${siteId}"]`);
    if (input && input.checked !== checked) {
      input.checked = checked;
      this.onChange(this.selected());
    }
  }
}

export class MetricPicker {
  constructor(container: HTMLElement, initial: Metric, onChange: (metric: Metric) => void) {
    const heading = document.createElement('h2');
    heading.textContent = 'Measurement';
    const group = document.createElement('div');
    group.className = 'metric-group';
    for (const metric of METRICS) {
      const label = document.createElement('label');
      label.className = 'metric-option';
      const radio = document.createElement('input');
      radio.type = 'radio';
      radio.name = 'metric';
      radio.value = metric;
      radio.checked = metric === initial;
      radio.addEventListener('change', () => {
        if (radio.checked) onChange(metric);
      });
      const text = document.createElement('span');
      text.textContent = METRIC_LABELS[metric];
      label.append(radio, text);
      group.appendChild(label);
    }
    container.append(heading, group);
  }
}
