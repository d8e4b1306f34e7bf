/** Dependency-free SVG figure helpers for the plotting CLIs. */

export interface Series {
  label: string;
  points: Array<[number, number]>;
  color: string;
  dashed?: boolean;
}

export const PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

function ticks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) return [lo];
  const out: number[] = [];
  for (let i = 0; i <= count; i++) out.push(lo + ((hi - lo) * i) / count);
  return out;
}

const fmt = (x: number): string =>
  Math.abs(x) >= 1000 ? x.toFixed(0) : parseFloat(x.toPrecision(4)).toString();

export function lineChart(opts: {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  yMin?: number;
  yMax?: number;
  width?: number;
  height?: number;
}): string {
  const width = opts.width ?? 640;
  const height = opts.height ?? 420;
  const margin = { left: 70, right: 20, top: 40, bottom: 55 };
  const innerW = width - margin.left - margin.right;
  const innerH = height - margin.top - margin.bottom;

  const xs = opts.series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = opts.series.flatMap((s) => s.points.map((p) => p[1]));
  if (xs.length === 0) throw new Error("nothing to plot: no data points");
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = opts.yMin ?? Math.min(...ys);
  const yHi = opts.yMax ?? Math.max(...ys);
  const sx = (x: number) =>
    margin.left + (xHi > xLo ? ((x - xLo) / (xHi - xLo)) * innerW : innerW / 2);
  const sy = (y: number) =>
    margin.top + (yHi > yLo ? (1 - (y - yLo) / (yHi - yLo)) * innerH : innerH / 2);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="20" text-anchor="middle" font-size="14">${opts.title}</text>`,
  );

  for (const t of ticks(xLo, xHi)) {
    const x = sx(t);
    parts.push(
      `<line x1="${x}" y1="${margin.top}" x2="${x}" y2="${margin.top + innerH}" stroke="#ddd"/>`,
      `<text x="${x}" y="${margin.top + innerH + 16}" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  for (const t of ticks(yLo, yHi)) {
    const y = sy(t);
    parts.push(
      `<line x1="${margin.left}" y1="${y}" x2="${margin.left + innerW}" y2="${y}" stroke="#ddd"/>`,
      `<text x="${margin.left - 8}" y="${y + 4}" text-anchor="end">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${margin.left}" y="${margin.top}" width="${innerW}" height="${innerH}" ` +
      `fill="none" stroke="#333"/>`,
    `<text x="${margin.left + innerW / 2}" y="${height - 12}" text-anchor="middle">` +
      `${opts.xLabel}</text>`,
    `<text x="18" y="${margin.top + innerH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${margin.top + innerH / 2})">${opts.yLabel}</text>`,
  );

  opts.series.forEach((s, i) => {
    const path = s.points.map(([x, y]) => `${sx(x)},${sy(y)}`).join(" ");
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    parts.push(
      `<polyline points="${path}" fill="none" stroke="${s.color}" stroke-width="2"${dash}/>`,
    );
    for (const [x, y] of s.points) {
      parts.push(`<circle cx="${sx(x)}" cy="${sy(y)}" r="3.5" fill="${s.color}"/>`);
    }
    const ly = margin.top + 16 + i * 16;
    parts.push(
      `<line x1="${width - 150}" y1="${ly - 4}" x2="${width - 126}" y2="${ly - 4}" ` +
        `stroke="${s.color}" stroke-width="2"/>`,
      `<text x="${width - 120}" y="${ly}">${s.label}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}
