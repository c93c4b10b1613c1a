/** Dashboard view state with response-version tagging.
 *
 * Every state change that invalidates in-flight responses bumps `version`;
 * a response only renders when its captured version is still current, so
 * rapid toggling can never paint stale data. `pending` counts in-flight
 * requests and drives the loading indicator.
 */

import { Metric } from './types.js';

export interface ViewState {
  selectedSites: string[];
  metric: Metric;
  centerLat: number;
  centerLon: number;
  zoom: number;
}

type ChangeListener = (state: ViewState) => void;
type PendingListener = (pending: number) => void;

export class Store {
  private state: ViewState;
  private _version = 0;
  private _pending = 0;
  private changeListeners: ChangeListener[] = [];
  private pendingListeners: PendingListener[] = [];

  constructor(initial: ViewState) {
    this.state = { ...initial, selectedSites: [...initial.selectedSites] };
  }

  get current(): ViewState {
    return { ...this.state, selectedSites: [...this.state.selectedSites] };
  }

  get version(): number {
    return this._version;
  }

  get pending(): number {
    return this._pending;
  }

  isCurrent(version: number): boolean {
    return version === this._version;
  }

  onChange(listener: ChangeListener): void {
    this.changeListeners.push(listener);
  }

  onPending(listener: PendingListener): void {
    this.pendingListeners.push(listener);
  }

  /** Apply a partial update; no-ops (no version bump) when nothing changes. */
  update(partial: Partial<ViewState>): boolean {
    const next: ViewState = { ...this.state, ...partial };
    if (partial.selectedSites) {
      next.selectedSites = [...partial.selectedSites];
    }
    if (
      next.metric === this.state.metric &&
      next.zoom === this.state.zoom &&
      next.centerLat === this.state.centerLat &&
      next.centerLon === this.state.centerLon &&
      next.selectedSites.length === this.state.selectedSites.length &&
      next.selectedSites.every((s, k) => s === this.state.selectedSites[k])
    ) {
      return false;
    }
    this.state = next;
    this._version += 1;
    for (const listener of this.changeListeners) {
      listener(this.current);
    }
    return true;
  }

  /** Track one in-flight request for the loading indicator. */
  begin(): () => void {
    this._pending += 1;
    this.notifyPending();
    let closed = false;
    return () => {
      if (!closed) {
        closed = true;
        this._pending -= 1;
        this.notifyPending();
      }
    };
  }

  private notifyPending(): void {
    for (const listener of this.pendingListeners) {
      listener(this._pending);
    }
  }
}

/** Trailing-edge debounce used for zoom/pan refetches. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) {
      clearTimeout(timer);
    }
    timer = setTimeout(() => {
      timer = undefined;
      fn(...args);
    }, waitMs);
  };
}
