/**
 * Draw the top-down view of one episode from its trajectory log
 * (engine CLI: `pursuitsim sim ... --traj-dir DIR`, one JSONL file per
 * episode). Pass the scenario JSON to overlay obstacles: full-height
 * cylinders draw dark, flyable ones light.
 *
 *   node dist/plotTrajectory.js runs/traj/episode_00000.jsonl \
 *        [--scenario tower1.json] [--out figure.svg] [--arena-radius 0.9]
 */
import * as fs from "fs";

import { PALETTE } from "./svg";

interface StepRecord {
  step: number;
  drones: { position: number[]; velocity: number[] }[];
  evader: { position: number[]; velocity: number[] };
  rewards: number[];
  captured: boolean;
}

export function parseTrajectory(text: string): StepRecord[] {
  const records = text
    .split(/\r?\n/)
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line) as StepRecord);
  if (records.length === 0) throw new Error("trajectory log is empty");
  return records;
}

export interface TrajectoryPlotOptions {
  arenaRadius?: number;
  scenarioPath?: string;
}

export function plotTrajectory(
  logPath: string,
  outPath: string,
  options: TrajectoryPlotOptions = {},
): string {
  const records = parseTrajectory(fs.readFileSync(logPath, "utf-8"));
  let arenaRadius = options.arenaRadius ?? 0.9;
  let obstacles: { x: number; y: number; radius: number; height: number }[] = [];
  let arenaHeight = 1.2;
  if (options.scenarioPath) {
    const doc = JSON.parse(fs.readFileSync(options.scenarioPath, "utf-8"));
    arenaRadius = doc.arena.radius;
    arenaHeight = doc.arena.height;
    obstacles = doc.obstacles ?? [];
  }

  const size = 600;
  const pad = 30;
  const scale = (size - 2 * pad) / (2 * arenaRadius);
  const sx = (x: number) => pad + (x + arenaRadius) * scale;
  const sy = (y: number) => size - pad - (y + arenaRadius) * scale;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${size}" height="${size + 30}" ` +
      `font-family="sans-serif" font-size="12">`,
    `<rect width="${size}" height="${size + 30}" fill="white"/>`,
    `<circle cx="${sx(0)}" cy="${sy(0)}" r="${arenaRadius * scale}" ` +
      `fill="#fafafa" stroke="#333" stroke-width="2"/>`,
  );
  for (const o of obstacles) {
    const dark = o.height >= arenaHeight;
    parts.push(
      `<circle cx="${sx(o.x)}" cy="${sy(o.y)}" r="${o.radius * scale}" ` +
        `fill="${dark ? "#555" : "#bbb"}" stroke="#333"/>`,
    );
  }

  const nDrones = records[0].drones.length;
  for (let i = 0; i < nDrones; i++) {
    const color = PALETTE[i % PALETTE.length];
    const pts = records
      .map((r) => `${sx(r.drones[i].position[0])},${sy(r.drones[i].position[1])}`)
      .join(" ");
    parts.push(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.5"/>`);
    const start = records[0].drones[i].position;
    parts.push(`<circle cx="${sx(start[0])}" cy="${sy(start[1])}" r="5" fill="${color}"/>`);
  }
  const evaderPts = records
    .map((r) => `${sx(r.evader.position[0])},${sy(r.evader.position[1])}`)
    .join(" ");
  parts.push(
    `<polyline points="${evaderPts}" fill="none" stroke="#d62728" stroke-width="2" ` +
      `stroke-dasharray="7 4"/>`,
  );
  const evaderStart = records[0].evader.position;
  parts.push(
    `<rect x="${sx(evaderStart[0]) - 5}" y="${sy(evaderStart[1]) - 5}" width="10" height="10" ` +
      `fill="#d62728"/>`,
  );

  const last = records[records.length - 1];
  if (last.captured) {
    const p = last.evader.position;
    parts.push(
      `<circle cx="${sx(p[0])}" cy="${sy(p[1])}" r="9" fill="none" stroke="#d62728" ` +
        `stroke-width="2.5"/>`,
    );
  }
  const caption = last.captured
    ? `captured at step ${last.step}`
    : `no capture within ${last.step} steps`;
  parts.push(
    `<text x="${size / 2}" y="${size + 18}" text-anchor="middle">` +
      `top-down view, ${nDrones} pursuers (dots mark spawns), evader dashed; ${caption}</text>`,
    "</svg>",
  );

  const svg = parts.join("\n");
  fs.writeFileSync(outPath, svg);
  return outPath;
}

if (require.main === module) {
  const args = process.argv.slice(2);
  const file = args.find((a) => !a.startsWith("--"));
  if (!file) {
    console.error(
      "usage: plotTrajectory <episode.jsonl> [--scenario s.json] [--out f.svg] [--arena-radius R]",
    );
    process.exit(2);
  }
  const flag = (name: string) => {
    const i = args.indexOf(name);
    return i >= 0 ? args[i + 1] : undefined;
  };
  const out = flag("--out") ?? "trajectory.svg";
  const written = plotTrajectory(file, out, {
    scenarioPath: flag("--scenario"),
    arenaRadius: flag("--arena-radius") ? parseFloat(flag("--arena-radius")!) : undefined,
  });
  console.log(`wrote ${written}`);
}
