/**
 * Turn a sweep table (engine CLI: `pursuitsim sweep ... --out DIR`) into two
 * figures: capture rate and capture timestep against the swept parameter,
 * one series per policy.
 *
 *   node dist/plotSweep.js runs/sweep.csv [--out-dir figures/]
 */
import * as fs from "fs";
import * as path from "path";

import { PALETTE, Series, lineChart } from "./svg";

export interface SweepRow {
  scenario: string;
  policy: string;
  axis: string;
  value: number;
  capture_rate: number;
  capture_timestep_mean: number;
}

export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text.trim().split(/\r?\n/);
  if (lines.length < 2) throw new Error("sweep table has no data rows");
  const header = lines[0].split(",");
  const col = (name: string) => {
    const idx = header.indexOf(name);
    if (idx < 0) throw new Error(`sweep table is missing the '${name}' column`);
    return idx;
  };
  const idx = {
    scenario: col("scenario"),
    policy: col("policy"),
    axis: col("axis"),
    value: col("value"),
    rate: col("capture_rate"),
    step: col("capture_timestep_mean"),
  };
  return lines.slice(1).map((line) => {
    const cells = line.split(",");
    return {
      scenario: cells[idx.scenario],
      policy: cells[idx.policy],
      axis: cells[idx.axis],
      value: parseFloat(cells[idx.value]),
      capture_rate: parseFloat(cells[idx.rate]),
      capture_timestep_mean: parseFloat(cells[idx.step]),
    };
  });
}

function bySeries(rows: SweepRow[], metric: (r: SweepRow) => number): Series[] {
  const policies = [...new Set(rows.map((r) => r.policy))];
  return policies.map((policy, i) => ({
    label: policy,
    color: PALETTE[i % PALETTE.length],
    points: rows
      .filter((r) => r.policy === policy)
      .sort((a, b) => a.value - b.value)
      .map((r) => [r.value, metric(r)] as [number, number]),
  }));
}

export function plotSweep(csvPath: string, outDir: string): string[] {
  const rows = parseSweepCsv(fs.readFileSync(csvPath, "utf-8"));
  const axis = rows[0].axis;
  const scenario = rows[0].scenario;
  const axisLabel =
    axis === "capture_radius" ? "capture radius (m)" : "evader speed (m/s)";
  fs.mkdirSync(outDir, { recursive: true });

  const rateSvg = lineChart({
    title: `capture rate vs ${axisLabel} (${scenario})`,
    xLabel: axisLabel,
    yLabel: "capture rate (episodes with a capture before the horizon)",
    series: bySeries(rows, (r) => r.capture_rate),
    yMin: 0,
    yMax: 1,
  });
  const stepSvg = lineChart({
    title: `capture timestep vs ${axisLabel} (${scenario})`,
    xLabel: axisLabel,
    yLabel: "mean capture timestep (failures count as the horizon)",
    series: bySeries(rows, (r) => r.capture_timestep_mean),
  });

  const ratePath = path.join(outDir, "sweep_capture_rate.svg");
  const stepPath = path.join(outDir, "sweep_capture_timestep.svg");
  fs.writeFileSync(ratePath, rateSvg);
  fs.writeFileSync(stepPath, stepSvg);
  return [ratePath, stepPath];
}

if (require.main === module) {
  const args = process.argv.slice(2);
  const file = args.find((a) => !a.startsWith("--"));
  if (!file) {
    console.error("usage: plotSweep <sweep.csv> [--out-dir DIR]");
    process.exit(2);
  }
  const outFlag = args.indexOf("--out-dir");
  const outDir = outFlag >= 0 ? args[outFlag + 1] : ".";
  for (const written of plotSweep(file, outDir)) console.log(`wrote ${written}`);
}
