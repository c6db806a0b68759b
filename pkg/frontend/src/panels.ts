/** Figure assembly: dynamics overlays, Wigner heatmap rows, scaling panels.
 *
 * Renderers are pure (artifact data in, SVG string + PNG buffer + metadata
 * out) and deterministic for fixed inputs and style, so image diffs stay
 * meaningful in CI. The SVG is the primary (vector) output; the PNG mirror
 * carries curves and heatmaps without text.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { SweepRow, Trajectory, WignerGrid } from "./csv.js";
import { Raster, Rgb, diverging } from "./raster.js";
import {
  Scale,
  extent,
  formatTick,
  linearScale,
  logScale,
  logTicks,
  niceTicks,
} from "./scales.js";
import { Svg } from "./svg.js";

const HERE = dirname(fileURLToPath(import.meta.url));
export const STYLE = JSON.parse(
  readFileSync(join(HERE, "..", "style.json"), "utf-8"));

export interface Figure {
  svg: string;
  png: Buffer;
  meta: Record<string, unknown>;
}

interface Frame {
  x0: number;
  y0: number;
  w: number;
  h: number;
  xScale: Scale;
  yScale: Scale;
}

function drawFrame(svg: Svg, raster: Raster, frame: Frame,
                   xTicks: number[], yTicks: number[],
                   xLabel: string, yLabel: string, title: string,
                   fmt: (v: number) => string = formatTick): void {
  const s = STYLE;
  svg.rect(frame.x0, frame.y0, frame.w, frame.h,
           { fill: "none", stroke: s.axisColor, "stroke-width": 1 });
  raster.drawPolyline([
    [frame.x0, frame.y0], [frame.x0 + frame.w, frame.y0],
    [frame.x0 + frame.w, frame.y0 + frame.h], [frame.x0, frame.y0 + frame.h],
    [frame.x0, frame.y0],
  ], [34, 34, 34]);
  for (const v of xTicks) {
    const x = frame.xScale(v);
    svg.line(x, frame.y0 + frame.h, x, frame.y0 + frame.h + 4,
             { stroke: s.axisColor });
    svg.line(x, frame.y0, x, frame.y0 + frame.h,
             { stroke: s.gridColor, "stroke-width": 0.5 });
    svg.text(x, frame.y0 + frame.h + 16, fmt(v), {
      "text-anchor": "middle", "font-family": s.fontFamily,
      "font-size": s.fontSize, fill: s.axisColor,
    });
  }
  for (const v of yTicks) {
    const y = frame.yScale(v);
    svg.line(frame.x0 - 4, y, frame.x0, y, { stroke: s.axisColor });
    svg.line(frame.x0, y, frame.x0 + frame.w, y,
             { stroke: s.gridColor, "stroke-width": 0.5 });
    svg.text(frame.x0 - 7, y + 4, fmt(v), {
      "text-anchor": "end", "font-family": s.fontFamily,
      "font-size": s.fontSize, fill: s.axisColor,
    });
  }
  svg.text(frame.x0 + frame.w / 2, frame.y0 + frame.h + 34, xLabel, {
    "text-anchor": "middle", "font-family": s.fontFamily,
    "font-size": s.fontSize, fill: s.axisColor,
  });
  svg.open("g", {
    transform: `translate(${frame.x0 - 46} ${frame.y0 + frame.h / 2}) rotate(-90)`,
  });
  svg.text(0, 0, yLabel, {
    "text-anchor": "middle", "font-family": s.fontFamily,
    "font-size": s.fontSize, fill: s.axisColor,
  });
  svg.close("g");
  svg.text(frame.x0 + frame.w / 2, frame.y0 - 8, title, {
    "text-anchor": "middle", "font-family": s.fontFamily,
    "font-size": s.titleSize, "font-weight": "bold", fill: s.axisColor,
  });
}

function polylineSegments(xs: ArrayLike<number>, ys: ArrayLike<number>,
                          xScale: Scale, yScale: Scale
                          ): Array<Array<[number, number]>> {
  const segments: Array<Array<[number, number]>> = [];
  let current: Array<[number, number]> = [];
  for (let i = 0; i < xs.length; i++) {
    if (Number.isNaN(ys[i])) {
      if (current.length > 1) segments.push(current);
      current = [];
    } else {
      current.push([xScale(xs[i]), yScale(ys[i])]);
    }
  }
  if (current.length > 1) segments.push(current);
  return segments;
}

function hexToRgb(hex: string): Rgb {
  return [parseInt(hex.slice(1, 3), 16), parseInt(hex.slice(3, 5), 16),
          parseInt(hex.slice(5, 7), 16)];
}

/** Trajectory overlays: scaled photon number (solid primary vs dashed
 * secondary), plus Fano factor and entanglement with snapshot markers. */
export function renderDynamics(opts: {
  primary: Trajectory;
  secondary?: Trajectory | null;
  nDetectors: number;
  markers?: number[];
  title?: string;
}): Figure {
  const s = STYLE;
  const warnings: string[] = [];
  if (!opts.secondary) {
    warnings.push("no moment-closure overlay provided; "
      + "rendering solid curves only");
  }
  const width = s.width;
  const height = 2 * s.height;
  const svg = new Svg(width, height, s.background);
  const raster = new Raster(width, height);
  const t = opts.primary.t;
  const nOverN = Float64Array.from(
    opts.primary.columns.get("n")!, (v) => v / opts.nDetectors);
  const tExt = extent(t);
  const series: Array<{ ys: Float64Array; traj: Trajectory }> = [
    { ys: nOverN, traj: opts.primary },
  ];
  if (opts.secondary) {
    series.push({
      ys: Float64Array.from(opts.secondary.columns.get("n")!,
                            (v) => v / opts.nDetectors),
      traj: opts.secondary,
    });
  }
  let yHi = 0;
  for (const { ys } of series) yHi = Math.max(yHi, extent(ys)[1]);
  const panelA: Frame = {
    x0: s.margin.left, y0: s.margin.top,
    w: width - s.margin.left - s.margin.right,
    h: s.height - s.margin.top - s.margin.bottom,
    xScale: linearScale(tExt, [s.margin.left,
                               width - s.margin.right]),
    yScale: linearScale([0, 1.05 * yHi],
                        [s.height - s.margin.bottom, s.margin.top]),
  };
  drawFrame(svg, raster, panelA, niceTicks(tExt[0], tExt[1], 6),
            niceTicks(0, 1.05 * yHi, 5), "t (s)", "photons per detector",
            opts.title ?? "photon production from vacuum");
  const colors = [s.series.primary, s.series.secondary];
  series.forEach(({ ys, traj }, i) => {
    const attrs: Record<string, string | number> = {
      stroke: colors[i], "stroke-width": s.lineWidth,
    };
    if (i === 1) attrs["stroke-dasharray"] = s.dash;
    for (const seg of polylineSegments(traj.t, ys, panelA.xScale,
                                       panelA.yScale)) {
      svg.polyline(seg, attrs);
      raster.drawPolyline(seg, hexToRgb(colors[i]));
    }
  });

  // panel B: Fano factor and entanglement with snapshot markers
  const fano = opts.primary.columns.get("fano");
  const en = opts.primary.columns.get("E_N");
  let yMaxB = 1.0;
  for (const col of [fano, en]) {
    if (!col) continue;
    for (const v of col) if (!Number.isNaN(v)) yMaxB = Math.max(yMaxB, v);
  }
  const panelB: Frame = {
    x0: s.margin.left, y0: s.height + s.margin.top,
    w: width - s.margin.left - s.margin.right,
    h: s.height - s.margin.top - s.margin.bottom,
    xScale: panelA.xScale,
    yScale: linearScale([0, 1.05 * yMaxB],
                        [2 * s.height - s.margin.bottom,
                         s.height + s.margin.top]),
  };
  drawFrame(svg, raster, panelB, niceTicks(tExt[0], tExt[1], 6),
            niceTicks(0, 1.05 * yMaxB, 5), "t (s)", "Fano / entanglement",
            "photon statistics and cavity-ensemble entanglement");
  const curves: Array<[Float64Array | undefined, string]> = [
    [fano, s.series.fano], [en, s.series.entanglement]];
  for (const [col, color] of curves) {
    if (!col) continue;
    for (const seg of polylineSegments(t, col, panelB.xScale,
                                       panelB.yScale)) {
      svg.polyline(seg, { stroke: color, "stroke-width": s.lineWidth });
      raster.drawPolyline(seg, hexToRgb(color));
    }
  }
  for (const tm of opts.markers ?? []) {
    const x = panelB.xScale(tm);
    svg.line(x, panelB.y0, x, panelB.y0 + panelB.h, {
      stroke: s.series.marker, "stroke-dasharray": s.markerDash,
    });
    raster.drawLine(x, panelB.y0, x, panelB.y0 + panelB.h, [136, 136, 136]);
  }
  svg.open("g", {
    "data-extent-t": `${tExt[0]} ${tExt[1]}`,
    "data-extent-n": `0 ${1.05 * yHi}`,
  });
  svg.close("g");
  return {
    svg: svg.render(), png: raster.toPng(),
    meta: {
      extentT: tExt, extentNOverN: [0, 1.05 * yHi],
      hasOverlay: Boolean(opts.secondary), warnings,
      markers: opts.markers ?? [],
    },
  };
}

/** Heatmap row of phase-space snapshots with a shared diverging scale. */
export function renderWignerRow(grids: WignerGrid[],
                                title = "cavity phase-space snapshots"
                                ): Figure {
  if (grids.length === 0) throw new Error("no Wigner grids to render");
  const s = STYLE;
  const hm = s.heatmap;
  let vmax = 0;
  for (const g of grids) {
    for (const row of g.values) {
      for (const v of row) vmax = Math.max(vmax, Math.abs(v));
    }
  }
  const panels = grids.map((g) => {
    const aspect = (g.imMax - g.imMin) / (g.reMax - g.reMin);
    return { g, w: hm.panel, h: hm.panel * aspect };
  });
  const maxH = Math.max(...panels.map((p) => p.h));
  const width = s.margin.left
    + panels.reduce((acc, p) => acc + p.w + hm.gap, 0)
    + hm.colorbarWidth + 40 + s.margin.right;
  const height = s.margin.top + 24 + maxH + s.margin.bottom;
  const svg = new Svg(width, height, s.background);
  const raster = new Raster(width, height);
  svg.text(width / 2, 18, title, {
    "text-anchor": "middle", "font-family": s.fontFamily,
    "font-size": s.titleSize, "font-weight": "bold", fill: s.axisColor,
  });
  const neg = hm.negative as Rgb;
  const zero = hm.zero as Rgb;
  const pos = hm.positive as Rgb;
  let x = s.margin.left;
  const y0 = s.margin.top + 24;
  const meta: Array<Record<string, unknown>> = [];
  for (const { g, w, h } of panels) {
    const rows = g.values.length;
    const cols = g.values[0].length;
    const cell = new Raster(cols, rows);
    let best = { value: -Infinity, re: 0, im: 0 };
    for (let r = 0; r < rows; r++) {
      for (let c = 0; c < cols; c++) {
        const v = g.values[r][c];
        // row r corresponds to Im alpha ascending; draw top-down
        cell.set(c, rows - 1 - r, diverging(v, vmax, neg, zero, pos));
        if (v > best.value) {
          best = {
            value: v,
            re: g.reMin + (c * (g.reMax - g.reMin)) / (cols - 1),
            im: g.imMin + (r * (g.imMax - g.imMin)) / (rows - 1),
          };
        }
      }
    }
    svg.image(x, y0, w, h, cell.toPng().toString("base64"));
    svg.rect(x, y0, w, h, { fill: "none", stroke: s.axisColor });
    // nearest-cell copy into the standalone raster
    for (let yy = 0; yy < Math.round(h); yy++) {
      for (let xx = 0; xx < Math.round(w); xx++) {
        const c = Math.min(cols - 1, Math.floor((xx / w) * cols));
        const r = Math.min(rows - 1, Math.floor((yy / h) * rows));
        const o = 4 * (r * cols + c);
        raster.set(x + xx, y0 + yy,
                   [cell.data[o], cell.data[o + 1], cell.data[o + 2]]);
      }
    }
    const label = Number.isNaN(g.time) ? g.tag : `${g.tag} (t=${g.time})`;
    svg.text(x + w / 2, y0 + h + 16, label, {
      "text-anchor": "middle", "font-family": s.fontFamily,
      "font-size": s.fontSize, fill: s.axisColor,
    });
    svg.text(x + w / 2, y0 + h + 30,
             `Re a in [${g.reMin}, ${g.reMax}]`, {
               "text-anchor": "middle", "font-family": s.fontFamily,
               "font-size": s.fontSize - 1, fill: s.axisColor,
             });
    meta.push({
      tag: g.tag, time: g.time, maxCell: best,
      extentRe: [g.reMin, g.reMax], extentIm: [g.imMin, g.imMax],
      aspect: h / w,
    });
    x += w + hm.gap;
  }
  // shared colorbar
  const cbH = Math.round(maxH);
  const cb = new Raster(hm.colorbarWidth, cbH);
  for (let yy = 0; yy < cbH; yy++) {
    const v = vmax * (1 - (2 * yy) / (cbH - 1));
    cb.fillRect(0, yy, hm.colorbarWidth, 1, diverging(v, vmax, neg, zero, pos));
  }
  svg.image(x, y0, hm.colorbarWidth, maxH, cb.toPng().toString("base64"));
  svg.rect(x, y0, hm.colorbarWidth, maxH,
           { fill: "none", stroke: s.axisColor });
  svg.text(x + hm.colorbarWidth + 4, y0 + 10, formatTick(vmax), {
    "font-family": s.fontFamily, "font-size": s.fontSize - 1,
    fill: s.axisColor,
  });
  svg.text(x + hm.colorbarWidth + 4, y0 + maxH, formatTick(-vmax), {
    "font-family": s.fontFamily, "font-size": s.fontSize - 1,
    fill: s.axisColor,
  });
  return {
    svg: svg.render(), png: raster.toPng(),
    meta: { vmax, panels: meta },
  };
}

/** Burst-peak power law (log-log) and inverse delay (linear) panels. */
export function renderScaling(rows: SweepRow[], fits: {
  alpha?: number;
  alphaStderr?: number;
  linSlope?: number;
  linIntercept?: number;
  linR2?: number;
}, nCrit: number): Figure {
  const usable = rows.filter((r) => r.peak !== null && r.td !== null
    && r.peak! > 0 && r.td! > 0);
  if (usable.length < 2) {
    throw new Error(`need at least 2 sweep points with bursts, got ${usable.length}`);
  }
  const s = STYLE;
  const width = 2 * s.width;
  const height = s.height + 40;
  const svg = new Svg(width, height, s.background);
  const raster = new Raster(width, height);

  // left: peak/N vs N/N_crit, log-log
  const xs = usable.map((r) => r.ratio);
  const ys = usable.map((r) => r.peak! / r.N);
  const xExt = extent(xs);
  const yExt = extent(ys);
  const padLog = (e: [number, number]): [number, number] =>
    [e[0] / 1.6, e[1] * 1.6];
  const left: Frame = {
    x0: s.margin.left, y0: s.margin.top,
    w: s.width - s.margin.left - s.margin.right,
    h: height - s.margin.top - s.margin.bottom,
    xScale: logScale(padLog(xExt), [s.margin.left,
                                    s.width - s.margin.right]),
    yScale: logScale(padLog(yExt), [height - s.margin.bottom, s.margin.top]),
  };
  drawFrame(svg, raster, left, logTicks(...padLog(xExt)),
            logTicks(...padLog(yExt)), "N / N_crit",
            "burst peak photons per detector", "first burst peak scaling");
  for (let i = 0; i < xs.length; i++) {
    const px = left.xScale(xs[i]);
    const py = left.yScale(ys[i]);
    svg.circle(px, py, 3.5, { fill: s.series.primary });
    raster.fillRect(px - 2, py - 2, 4, 4, hexToRgb(s.series.primary));
  }
  if (fits.alpha !== undefined) {
    // anchor the power law through the geometric-mean point
    const gx = Math.exp(xs.reduce((a, v) => a + Math.log(v), 0) / xs.length);
    const gy = Math.exp(ys.reduce((a, v) => a + Math.log(v), 0) / ys.length);
    const slope = fits.alpha - 1;   // peak/N against N
    const line: Array<[number, number]> = [xExt[0], xExt[1]].map((v) => [
      left.xScale(v),
      left.yScale(gy * Math.pow(v / gx, slope)),
    ]);
    svg.polyline(line, { stroke: s.series.fit, "stroke-width": 1.2,
                         "stroke-dasharray": s.dash });
    raster.drawPolyline(line, hexToRgb(s.series.fit));
    const err = fits.alphaStderr !== undefined
      ? ` ± ${fits.alphaStderr.toFixed(3)}` : "";
    svg.text(left.x0 + 10, left.y0 + 18,
             `peak ∝ N^α, α = ${fits.alpha.toFixed(3)}${err}`, {
               "font-family": s.fontFamily, "font-size": s.fontSize,
               fill: s.axisColor,
             });
  }

  // right: 1/t_d vs N, linear axes
  const xs2 = usable.map((r) => r.N);
  const ys2 = usable.map((r) => 1 / r.td!);
  const xExt2 = extent(xs2);
  const yExt2 = extent(ys2);
  const right: Frame = {
    x0: s.width + s.margin.left, y0: s.margin.top,
    w: s.width - s.margin.left - s.margin.right,
    h: height - s.margin.top - s.margin.bottom,
    xScale: linearScale([0, 1.05 * xExt2[1]],
                        [s.width + s.margin.left, 2 * s.width - s.margin.right]),
    yScale: linearScale([0, 1.15 * yExt2[1]],
                        [height - s.margin.bottom, s.margin.top]),
  };
  drawFrame(svg, raster, right, niceTicks(0, 1.05 * xExt2[1], 5),
            niceTicks(0, 1.15 * yExt2[1], 5), "N", "1 / t_d (1/s)",
            "inverse burst delay");
  for (let i = 0; i < xs2.length; i++) {
    const px = right.xScale(xs2[i]);
    const py = right.yScale(ys2[i]);
    svg.circle(px, py, 3.5, { fill: s.series.secondary });
    raster.fillRect(px - 2, py - 2, 4, 4, hexToRgb(s.series.secondary));
  }
  if (fits.linSlope !== undefined) {
    const b = fits.linIntercept ?? 0;
    const line: Array<[number, number]> = [0, 1.05 * xExt2[1]].map((v) => [
      right.xScale(v), right.yScale(fits.linSlope! * v + b)]);
    svg.polyline(line, { stroke: s.series.fit, "stroke-width": 1.2,
                         "stroke-dasharray": s.dash });
    raster.drawPolyline(line, hexToRgb(s.series.fit));
    const r2 = fits.linR2 !== undefined
      ? `, R² = ${fits.linR2.toFixed(4)}` : "";
    svg.text(right.x0 + 10, right.y0 + 18,
             `1/t_d linear in N${r2}`, {
               "font-family": s.fontFamily, "font-size": s.fontSize,
               fill: s.axisColor,
             });
  }
  svg.open("g", {
    "data-extent-ratio": `${xExt[0]} ${xExt[1]}`,
    "data-extent-peak-per-n": `${yExt[0]} ${yExt[1]}`,
    "data-ncrit": String(nCrit),
  });
  svg.close("g");
  return {
    svg: svg.render(), png: raster.toPng(),
    meta: {
      extentRatio: xExt, extentPeakPerN: yExt, extentN: xExt2,
      extentInvTd: yExt2, pointCount: usable.length,
    },
  };
}
