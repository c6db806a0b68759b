/** Axis scales and tick generation (pure functions, no DOM). */

export type Scale = (value: number) => number;

export function extent(values: ArrayLike<number>): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (let i = 0; i < values.length; i++) {
    const v = values[i];
    if (Number.isNaN(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo > hi) throw new Error("extent of empty/NaN data");
  return [lo, hi];
}

export function linearScale(domain: [number, number],
                            range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function logScale(domain: [number, number],
                         range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) throw new Error("log scale needs positive domain");
  const l0 = Math.log10(d0);
  const span = Math.log10(d1) - l0 || 1;
  const [r0, r1] = range;
  return (v) => r0 + ((Math.log10(v) - l0) / span) * (r1 - r0);
}

/** Round tick positions on a 1-2-5 grid covering [lo, hi]. */
export function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / Math.max(count, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const i0 = Math.ceil(lo / step - 1e-12);
  const i1 = Math.floor(hi / step + 1e-12);
  const decimals = Math.max(0, -Math.floor(Math.log10(step)) + 1);
  const ticks: number[] = [];
  for (let i = i0; i <= i1; i++) {
    ticks.push(i === 0 ? 0 : Number((i * step).toFixed(decimals + 6)));
  }
  return ticks;
}

/** Decade ticks for log axes. */
export function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  const eLo = Math.ceil(Math.log10(lo) - 1e-12);
  const eHi = Math.floor(Math.log10(hi) + 1e-12);
  const stride = Math.max(1, Math.ceil((eHi - eLo) / 8));
  for (let e = eLo; e <= eHi; e += stride) ticks.push(Math.pow(10, e));
  return ticks.length ? ticks : [lo];
}

export function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    const e = Math.floor(Math.log10(a));
    const m = v / Math.pow(10, e);
    const mm = Math.round(m * 100) / 100;
    return `${mm}e${e}`;
  }
  return String(Math.round(v * 1e6) / 1e6);
}
