/** Parsers for the simulator's CSV/JSON artifacts (read-only). */

import { readFileSync } from "node:fs";

export interface Trajectory {
  t: Float64Array;
  columns: Map<string, Float64Array>;
}

export interface WignerGrid {
  meta: Record<string, string>;
  values: number[][];
  reMin: number;
  reMax: number;
  imMin: number;
  imMax: number;
  tag: string;
  time: number;
}

export interface SweepRow {
  N: number;
  ratio: number;
  nssThird: number;
  nssFourth: number;
  peak: number | null;
  td: number | null;
}

function parseCell(cell: string): number {
  return cell === "" ? NaN : Number(cell);
}

export function parseTrajectoryCsv(text: string): Trajectory {
  const lines = text.trim().split("\n");
  const header = lines[0].split(",");
  const cols = header.map(() => new Float64Array(lines.length - 1));
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    for (let j = 0; j < header.length; j++) {
      cols[j][i - 1] = parseCell(cells[j] ?? "");
    }
  }
  const columns = new Map<string, Float64Array>();
  header.forEach((name, j) => columns.set(name, cols[j]));
  const t = columns.get("t");
  if (!t) throw new Error("trajectory CSV lacks a 't' column");
  return { t, columns };
}

export function parseWignerCsv(text: string): WignerGrid {
  const meta: Record<string, string> = {};
  const values: number[][] = [];
  for (const line of text.split("\n")) {
    if (line.startsWith("#")) {
      const eq = line.indexOf("=");
      meta[line.slice(1, eq).trim()] = line.slice(eq + 1).trim();
    } else if (line.trim() !== "") {
      values.push(line.split(",").map(Number));
    }
  }
  if (values.length === 0) throw new Error("Wigner CSV holds no grid rows");
  return {
    meta,
    values,
    reMin: Number(meta["re_min"]),
    reMax: Number(meta["re_max"]),
    imMin: Number(meta["im_min"]),
    imMax: Number(meta["im_max"]),
    tag: meta["tag"] ?? "grid",
    time: Number(meta["time"] ?? NaN),
  };
}

export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text.trim().split("\n");
  const header = lines[0].split(",");
  const expect = "N,N_over_Ncrit,n_ss_third,n_ss_fourth,peak,t_d";
  if (header.join(",") !== expect) {
    throw new Error(`sweep CSV header mismatch: ${lines[0]}`);
  }
  return lines.slice(1).map((line) => {
    const c = line.split(",");
    const peak = parseCell(c[4] ?? "");
    const td = parseCell(c[5] ?? "");
    return {
      N: Number(c[0]),
      ratio: Number(c[1]),
      nssThird: Number(c[2]),
      nssFourth: Number(c[3]),
      peak: Number.isNaN(peak) ? null : peak,
      td: Number.isNaN(td) ? null : td,
    };
  });
}

export function readJson(path: string): any {
  return JSON.parse(readFileSync(path, "utf-8"));
}
