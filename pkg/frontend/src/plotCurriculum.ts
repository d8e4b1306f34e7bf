/**
 * Visualize a curriculum report (engine CLI: `pursuitsim curriculum ...
 * --out report.jsonl`): phase progression with evaluation capture rate and
 * archive occupancy over iterations.
 *
 *   node dist/plotCurriculum.js report.jsonl [--out figure.svg]
 */
import * as fs from "fs";

import { PALETTE, lineChart } from "./svg";

export interface CurriculumRecord {
  iteration: number;
  phase: number;
  capture_radius: number;
  evader_speed: number;
  batch_capture_rate: number;
  eval_capture_rate: number;
  archive_size: number;
  advanced: boolean;
}

export interface CurriculumReport {
  records: CurriculumRecord[];
  summary: { completed: boolean; iterations: number; final_phase: number; total_phases: number };
}

export function parseCurriculumReport(text: string): CurriculumReport {
  const lines = text
    .split(/\r?\n/)
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line));
  if (lines.length === 0) throw new Error("curriculum report is empty");
  const summary = lines[lines.length - 1];
  if (!summary.summary) throw new Error("curriculum report is missing its summary line");
  return { records: lines.slice(0, -1) as CurriculumRecord[], summary };
}

export function plotCurriculum(reportPath: string, outPath: string): string {
  const report = parseCurriculumReport(fs.readFileSync(reportPath, "utf-8"));
  const { records, summary } = report;
  const maxArchive = Math.max(1, ...records.map((r) => r.archive_size));
  const maxPhase = Math.max(1, summary.total_phases - 1);
  const svg = lineChart({
    title:
      `curriculum progress: ${summary.completed ? "completed" : "incomplete"} ` +
      `after ${summary.iterations} iterations ` +
      `(phase ${summary.final_phase}/${summary.total_phases - 1})`,
    xLabel: "iteration",
    yLabel: "normalized: phase / final, eval capture rate, archive fill",
    yMin: 0,
    yMax: 1,
    series: [
      {
        label: "phase (scaled)",
        color: PALETTE[0],
        points: records.map((r) => [r.iteration, r.phase / maxPhase] as [number, number]),
      },
      {
        label: "eval capture rate",
        color: PALETTE[1],
        points: records.map((r) => [r.iteration, r.eval_capture_rate] as [number, number]),
      },
      {
        label: "archive fill",
        color: PALETTE[2],
        dashed: true,
        points: records.map((r) => [r.iteration, r.archive_size / maxArchive] as [number, number]),
      },
    ],
  });
  fs.writeFileSync(outPath, svg);
  return outPath;
}

if (require.main === module) {
  const args = process.argv.slice(2);
  const file = args.find((a) => !a.startsWith("--"));
  if (!file) {
    console.error("usage: plotCurriculum <report.jsonl> [--out figure.svg]");
    process.exit(2);
  }
  const outFlag = args.indexOf("--out");
  const out = outFlag >= 0 ? args[outFlag + 1] : "curriculum.svg";
  console.log(`wrote ${plotCurriculum(file, out)}`);
}
