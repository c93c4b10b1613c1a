import { describe, expect, it, vi } from 'vitest';

import { clampCellPx, metersPerPixel, project, unproject } from '../src/mercator.js';
import { debounce, Store } from '../src/state.js';
import { colorScale, seriesColor, viridis } from '../src/viridis.js';

describe('mercator (client mirror of the server projection)', () => {
  it('matches the server anchors', () => {
    expect(project(0, 0, 0)).toEqual({ x: 128, y: 128 });
    expect(project(0, 180, 0)).toEqual({ x: 256, y: 128 });
    const seattle = project(47.6062, -122.3321, 10);
    expect(seattle.x).toBeCloseTo(41992.483271111116, 6);
    expect(seattle.y).toBeCloseTo(91551.96008643284, 6);
  });

  it('round-trips', () => {
    const { lat, lon } = unproject(41992.48, 91551.96, 10);
    const back = project(lat, lon, 10);
    expect(back.x).toBeCloseTo(41992.48, 6);
    expect(back.y).toBeCloseTo(91551.96, 6);
  });

  it('clamps cell size up to the privacy floor when zoomed in', () => {
    // ~3.24 m/px at z15 around Seattle: 32 px would be ~104 m on the ground
    const clamped = clampCellPx(32, 47.3, 15, 300);
    expect(clamped * metersPerPixel(47.3, 15)).toBeGreaterThanOrEqual(300);
    expect(clamped).toBeGreaterThan(32);
  });

  it('keeps the desired cell size when already above the floor', () => {
    expect(clampCellPx(32, 47.3, 10, 300)).toBe(32);
  });
});

describe('viridis color mapping', () => {
  it('covers the ramp endpoints', () => {
    expect(viridis(0)).toBe('rgb(68,1,84)');
    expect(viridis(1)).toBe('rgb(253,231,37)');
  });

  it('maps high download to the bright end', () => {
    const scale = colorScale([10, 50], 'download');
    expect(scale.position(50)).toBe(1);
    expect(scale.position(10)).toBe(0);
    expect(scale.betterEnd).toBe('max');
  });

  it('inverts ping so low (better) is bright', () => {
    const scale = colorScale([10, 50], 'ping');
    expect(scale.position(10)).toBe(1);
    expect(scale.position(50)).toBe(0);
    expect(scale.betterEnd).toBe('min');
  });

  it('midpoint when all values equal', () => {
    expect(colorScale([7, 7], 'upload').position(7)).toBe(0.5);
  });

  it('distinct series colors cycle', () => {
    expect(seriesColor(0)).not.toBe(seriesColor(1));
    expect(seriesColor(0)).toBe(seriesColor(6));
  });
});

describe('view-state store', () => {
  const initial = {
    selectedSites: [] as string[],
    metric: 'ping' as const,
    centerLat: 47.4,
    centerLon: -122.35,
    zoom: 10,
  };

  it('bumps the version on every effective change', () => {
    const store = new Store(initial);
    expect(store.update({ metric: 'download' })).toBe(true);
    const v = store.version;
    expect(store.update({ selectedSites: ['a'] })).toBe(true);
    expect(store.version).toBe(v + 1);
  });

  it('reselecting the same metric is a no-op (no duplicate request trigger)', () => {
    const store = new Store(initial);
    const seen: number[] = [];
    store.onChange(() => seen.push(store.version));
    expect(store.update({ metric: 'ping' })).toBe(false);
    expect(seen).toEqual([]);
  });

  it('stale versions are detectable', () => {
    const store = new Store(initial);
    store.update({ selectedSites: ['a'] });
    const v = store.version;
    store.update({ selectedSites: ['a', 'b'] });
    expect(store.isCurrent(v)).toBe(false);
    expect(store.isCurrent(store.version)).toBe(true);
  });

  it('pending counter tracks begin/end pairs once each', () => {
    const store = new Store(initial);
    const seen: number[] = [];
    store.onPending((n) => seen.push(n));
    const done1 = store.begin();
    const done2 = store.begin();
    done1();
    done1(); // double-release is a silent no-op, never negative
    done2();
    expect(seen).toEqual([1, 2, 1, 0]);
    expect(store.pending).toBe(0);
  });
});

describe('debounce', () => {
  it('collapses bursts to the trailing call', () => {
    vi.useFakeTimers();
    try {
      const calls: number[] = [];
      const fn = debounce((n: number) => calls.push(n), 250);
      fn(1);
      fn(2);
      vi.advanceTimersByTime(200);
      fn(3);
      vi.advanceTimersByTime(249);
      expect(calls).toEqual([]);
      vi.advanceTimersByTime(1);
      expect(calls).toEqual([3]);
    } finally {
      vi.useRealTimers();
    }
  });
});
