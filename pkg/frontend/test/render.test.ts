import { mkdtempSync, readFileSync, readdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { describe, expect, it, vi } from "vitest";

import { parseSweepCsv, parseTrajectoryCsv, parseWignerCsv, readJson }
  from "../src/csv.js";
import { main, renderRunDir, renderSweepDir } from "../src/main.js";
import { renderDynamics, renderScaling, renderWignerRow }
  from "../src/panels.js";
import { extent, linearScale, logScale, logTicks, niceTicks }
  from "../src/scales.js";

const GOLDEN = resolve(__dirname, "..", "..", "src", "drivendicke", "golden");
const FIG2 = join(GOLDEN, "fig2_n15");
const FIG3 = join(GOLDEN, "fig3_sweep");

const PNG_MAGIC = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

function goldenTrajectory() {
  return parseTrajectoryCsv(readFileSync(join(FIG2, "trajectory.csv"), "utf-8"));
}

describe("scales", () => {
  it("linear scale maps the domain endpoints to the range", () => {
    const s = linearScale([2, 4], [0, 100]);
    expect(s(2)).toBe(0);
    expect(s(4)).toBe(100);
    expect(s(3)).toBe(50);
  });

  it("log scale is linear in the exponent", () => {
    const s = logScale([1, 100], [0, 2]);
    expect(s(10)).toBeCloseTo(1, 12);
  });

  it("nice ticks land on a 1-2-5 grid", () => {
    expect(niceTicks(0, 1, 5)).toEqual([0, 0.2, 0.4, 0.6, 0.8, 1.0]);
    expect(logTicks(1, 1000)).toEqual([1, 10, 100, 1000]);
  });

  it("extent skips gaps", () => {
    expect(extent([NaN, 3, -1, NaN, 7])).toEqual([-1, 7]);
  });
});

describe("artifact parsing", () => {
  it("reads the golden trajectory with blank-aware columns", () => {
    const traj = goldenTrajectory();
    expect(traj.t.length).toBe(2001);
    expect(traj.columns.get("fano")![0]).toBeNaN();   // vacuum start
    expect(traj.columns.get("E_N")![0]).toBe(0);
    const n = traj.columns.get("n")!;
    expect(extent(n)[1]).toBeGreaterThan(8);          // the burst peak
  });

  it("reads golden Wigner grids with their headers", () => {
    const grid = parseWignerCsv(
      readFileSync(join(FIG2, "wigner_fano_trough.csv"), "utf-8"));
    expect(grid.values.length).toBe(81);
    expect(grid.reMin).toBe(-8);
    expect(Math.abs(Number(grid.meta["normalization"]) - 1)).toBeLessThan(1e-3);
  });

  it("reads the golden sweep table", () => {
    const rows = parseSweepCsv(readFileSync(join(FIG3, "sweep.csv"), "utf-8"));
    expect(rows.length).toBe(11);
    const below = rows.filter((r) => r.ratio < 1.5);
    expect(below.every((r) => r.peak === null)).toBe(true);
  });
});

describe("dynamics panel", () => {
  it("renders the golden run with extents matching the data", () => {
    const traj = goldenTrajectory();
    const summary = readJson(join(FIG2, "summary.json"));
    const fig = renderDynamics({
      primary: traj, nDetectors: summary.N,
      markers: Object.values(summary.wigner_snapshots ?? {})
        .map((w: any) => w.time),
    });
    const [tLo, tHi] = fig.meta.extentT as [number, number];
    expect(tLo).toBe(0);
    expect(tHi).toBe(400);
    const nn = fig.meta.extentNOverN as [number, number];
    const peakPerN = summary.burst.peak_value / summary.N;
    expect(nn[1]).toBeGreaterThanOrEqual(peakPerN);
    expect(nn[1]).toBeLessThanOrEqual(1.2 * peakPerN);
    expect(fig.svg).toContain("</svg>");
    expect(fig.svg).toContain("data-extent-t");
    expect(fig.png.subarray(0, 8).equals(PNG_MAGIC)).toBe(true);
    expect(fig.meta.hasOverlay).toBe(false);
    expect((fig.meta.warnings as string[]).length).toBe(1);
  });

  it("overlays a dashed secondary curve when given", () => {
    const traj = goldenTrajectory();
    const fig = renderDynamics({
      primary: traj, secondary: traj, nDetectors: 15,
    });
    expect(fig.meta.hasOverlay).toBe(true);
    expect(fig.svg).toContain("stroke-dasharray");
    expect((fig.meta.warnings as string[]).length).toBe(0);
  });

  it("is deterministic", () => {
    const traj = goldenTrajectory();
    const a = renderDynamics({ primary: traj, nDetectors: 15 });
    const b = renderDynamics({ primary: traj, nDetectors: 15 });
    expect(a.svg).toBe(b.svg);
    expect(a.png.equals(b.png)).toBe(true);
  });
});

describe("wigner row", () => {
  const files = ["wigner_fano_peak.csv", "wigner_fano_trough.csv",
                 "wigner_final.csv"];

  it("renders the three golden snapshots as one row", () => {
    const grids = files.map((f) =>
      parseWignerCsv(readFileSync(join(FIG2, f), "utf-8")));
    const fig = renderWignerRow(grids);
    const panels = fig.meta.panels as Array<any>;
    expect(panels.length).toBe(3);
    // ring at the trough: maximum away from the origin
    const trough = panels.find((p) => p.tag === "fano_trough");
    const radius = Math.hypot(trough.maxCell.re, trough.maxCell.im);
    expect(radius).toBeGreaterThan(1.0);
    // spread blob at the Fano peak: maximum at the origin cell
    const peak = panels.find((p) => p.tag === "fano_peak");
    expect(Math.hypot(peak.maxCell.re, peak.maxCell.im)).toBeLessThan(0.5);
    expect(fig.svg).toContain("image");
  });

  it("centres a synthetic vacuum blob", () => {
    const n = 41;
    const values = Array.from({ length: n }, (_, r) =>
      Array.from({ length: n }, (_, c) => {
        const re = -3 + (6 * c) / (n - 1);
        const im = -3 + (6 * r) / (n - 1);
        return (2 / Math.PI) * Math.exp(-2 * (re * re + im * im));
      }));
    const fig = renderWignerRow([{
      meta: {}, values, reMin: -3, reMax: 3, imMin: -3, imMax: 3,
      tag: "vacuum", time: 0,
    }]);
    const panel = (fig.meta.panels as Array<any>)[0];
    expect(panel.maxCell.re).toBeCloseTo(0, 6);
    expect(panel.maxCell.im).toBeCloseTo(0, 6);
  });

  it("preserves the aspect of non-square grids", () => {
    const values = Array.from({ length: 11 }, () =>
      Array.from({ length: 21 }, () => 0.01));
    const fig = renderWignerRow([{
      meta: {}, values, reMin: -4, reMax: 4, imMin: -2, imMax: 2,
      tag: "wide", time: 0,
    }]);
    const panel = (fig.meta.panels as Array<any>)[0];
    expect(panel.aspect).toBeCloseTo(0.5, 9);
  });

  it("rejects an empty grid list", () => {
    expect(() => renderWignerRow([])).toThrow();
  });
});

describe("scaling panels", () => {
  it("renders the golden sweep with the fitted exponent annotated", () => {
    const rows = parseSweepCsv(readFileSync(join(FIG3, "sweep.csv"), "utf-8"));
    const summary = readJson(join(FIG3, "summary.json"));
    const fig = renderScaling(rows, {
      alpha: summary.peak_power_fit.alpha,
      alphaStderr: summary.peak_power_fit.stderr,
      linSlope: summary.inverse_delay_linear_fit.slope,
      linIntercept: summary.inverse_delay_linear_fit.intercept,
      linR2: summary.inverse_delay_linear_fit.r_squared,
    }, summary.N_crit);
    expect(fig.svg).toContain(
      `α = ${summary.peak_power_fit.alpha.toFixed(3)}`);
    const ext = fig.meta.extentRatio as [number, number];
    const withBurst = rows.filter((r) => r.peak !== null);
    expect(ext[0]).toBeCloseTo(Math.min(...withBurst.map((r) => r.ratio)), 9);
    expect(ext[1]).toBeCloseTo(Math.max(...withBurst.map((r) => r.ratio)), 9);
    expect(fig.meta.pointCount).toBe(withBurst.length);
  });

  it("draws a straight line for a synthetic pure power law", () => {
    const rows = Array.from({ length: 6 }, (_, i) => {
      const N = 10 ** (i + 3);
      return { N, ratio: N / 100, nssThird: 1, nssFourth: 1,
               peak: 3 * N * N, td: 1 / (0.7 * N) };
    });
    const fig = renderScaling(rows, { alpha: 2.0, linSlope: 0.7,
                                      linIntercept: 0, linR2: 1.0 }, 100);
    // exact power law: the points are collinear on the log-log panel
    const ys = rows.map((r) => Math.log(r.peak / r.N));
    const xs = rows.map((r) => Math.log(r.ratio));
    const slope = (ys[5] - ys[0]) / (xs[5] - xs[0]);
    expect(slope).toBeCloseTo(1.0, 9);     // alpha - 1
    expect(fig.svg).toContain("R² = 1.0000");
  });

  it("rejects sweeps without enough burst points", () => {
    const rows = [{ N: 10, ratio: 0.1, nssThird: 1, nssFourth: 1,
                    peak: null, td: null },
                  { N: 100, ratio: 1.0, nssThird: 1, nssFourth: 1,
                    peak: 5, td: 2 }];
    expect(() => renderScaling(rows, {}, 100)).toThrow(/at least 2/);
  });
});

describe("command line", () => {
  it("regenerates every panel from the shipped goldens without errors", () => {
    const out = mkdtempSync(join(tmpdir(), "ddplots-"));
    const warn = vi.spyOn(console, "warn").mockImplementation(() => {});
    const log = vi.spyOn(console, "log").mockImplementation(() => {});
    try {
      const code = main(["--run", FIG2, "--sweep", FIG3, "--out", out]);
      expect(code).toBe(0);
      const files = readdirSync(out).sort();
      expect(files).toEqual([
        "dynamics.png", "dynamics.svg", "scaling.png", "scaling.svg",
        "wigner_row.png", "wigner_row.svg",
      ]);
      for (const f of files.filter((f) => f.endsWith(".png"))) {
        const buf = readFileSync(join(out, f));
        expect(buf.subarray(0, 8).equals(PNG_MAGIC)).toBe(true);
      }
    } finally {
      warn.mockRestore();
      log.mockRestore();
    }
  });

  it("fails cleanly on a missing directory", () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    try {
      expect(main(["--run", "/nonexistent", "--out",
                   mkdtempSync(join(tmpdir(), "ddplots-"))])).toBe(1);
    } finally {
      err.mockRestore();
    }
  });

  it("rejects malformed arguments", () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    try {
      expect(main(["--run"])).toBe(2);
      expect(main([])).toBe(2);
    } finally {
      err.mockRestore();
    }
  });
});
