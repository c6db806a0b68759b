/** CLI: render figures from simulator output directories.
 *
 *   node dist/main.js --run <dir> [--overlay <trajectory.csv>]
 *                     [--sweep <dir>] [--out <dir>]
 *
 * --run expects trajectory.csv + summary.json (+ wigner_*.csv) as written
 * by the simulator's run command; --sweep expects sweep.csv + summary.json.
 * Rendering never recomputes physics; it is read-only over the artifacts.
 */

import { existsSync, mkdirSync, readFileSync, readdirSync, writeFileSync }
  from "node:fs";
import { basename, join } from "node:path";

import { parseSweepCsv, parseTrajectoryCsv, parseWignerCsv, readJson }
  from "./csv.js";
import { Figure, renderDynamics, renderScaling, renderWignerRow }
  from "./panels.js";

function writeFigure(outDir: string, name: string, fig: Figure): void {
  writeFileSync(join(outDir, `${name}.svg`), fig.svg);
  writeFileSync(join(outDir, `${name}.png`), fig.png);
  console.log(`wrote ${join(outDir, name)}.{svg,png}`);
}

export function renderRunDir(runDir: string, outDir: string,
                             overlayPath?: string): void {
  const summary = readJson(join(runDir, "summary.json"));
  const primary = parseTrajectoryCsv(
    readFileSync(join(runDir, "trajectory.csv"), "utf-8"));
  let secondary = null;
  if (overlayPath) {
    secondary = parseTrajectoryCsv(readFileSync(overlayPath, "utf-8"));
  } else {
    console.warn("warning: no moment-closure overlay given "
      + "(--overlay); dynamics panel will show solid curves only");
  }
  const markers = Object.values(summary.wigner_snapshots ?? {})
    .map((w: any) => Number(w.time))
    .filter((v) => Number.isFinite(v));
  const fig = renderDynamics({
    primary, secondary, nDetectors: Number(summary.N),
    markers, title: `photon production, N = ${summary.N}`,
  });
  writeFigure(outDir, "dynamics", fig);

  const wignerFiles = readdirSync(runDir)
    .filter((f) => f.startsWith("wigner_") && f.endsWith(".csv"))
    .sort();
  if (wignerFiles.length > 0) {
    const grids = wignerFiles.map((f) =>
      parseWignerCsv(readFileSync(join(runDir, f), "utf-8")));
    grids.sort((a, b) => (a.time || 0) - (b.time || 0));
    writeFigure(outDir, "wigner_row", renderWignerRow(grids));
  }
}

export function renderSweepDir(sweepDir: string, outDir: string): void {
  const summary = readJson(join(sweepDir, "summary.json"));
  const rows = parseSweepCsv(
    readFileSync(join(sweepDir, "sweep.csv"), "utf-8"));
  const fig = renderScaling(rows, {
    alpha: summary.peak_power_fit?.alpha,
    alphaStderr: summary.peak_power_fit?.stderr,
    linSlope: summary.inverse_delay_linear_fit?.slope,
    linIntercept: summary.inverse_delay_linear_fit?.intercept,
    linR2: summary.inverse_delay_linear_fit?.r_squared,
  }, Number(summary.N_crit));
  writeFigure(outDir, "scaling", fig);
}

export function main(argv: string[]): number {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      console.error(`malformed arguments near '${argv[i]}'`);
      return 2;
    }
    args.set(argv[i].slice(2), argv[i + 1]);
  }
  const outDir = args.get("out") ?? "render";
  if (!args.has("run") && !args.has("sweep")) {
    console.error("usage: main.js [--run DIR [--overlay FILE]] "
      + "[--sweep DIR] [--out DIR]");
    return 2;
  }
  mkdirSync(outDir, { recursive: true });
  try {
    if (args.has("run")) {
      const dir = args.get("run")!;
      if (!existsSync(join(dir, "trajectory.csv"))) {
        throw new Error(`no trajectory.csv in ${dir}`);
      }
      renderRunDir(dir, outDir, args.get("overlay"));
    }
    if (args.has("sweep")) {
      renderSweepDir(args.get("sweep")!, outDir);
    }
  } catch (err) {
    console.error(`render failed: ${(err as Error).message}`);
    return 1;
  }
  return 0;
}

if (process.argv[1] && basename(process.argv[1]) === "main.js") {
  process.exit(main(process.argv.slice(2)));
}
