/**
 * Dependency-free SVG line charts.
 *
 * Deterministic output: same series in, byte-identical SVG out.
 */

import { Series } from "./csv";

export interface ChartOptions {
  xLabel: string;
  yLabel: string;
  title?: string;
  logX?: boolean;
  logY?: boolean;
  width?: number;
  height?: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
const MARGIN = { left: 72, right: 16, top: 28, bottom: 48 };

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) return v.toExponential(1);
  return String(Number(v.toPrecision(6)));
}

function niceTicks(lo: number, hi: number, target = 5): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const raw = (hi - lo) / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(lo); e <= Math.floor(hi); e++) {
    ticks.push(e);
  }
  if (ticks.length === 0) {
    ticks.push(lo, hi);
  }
  return ticks;
}

export function renderLineChart(series: Series[], options: ChartOptions): string {
  const width = options.width ?? 640;
  const height = options.height ?? 420;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const tx = (v: number) => (options.logX ? Math.log10(v) : v);
  const ty = (v: number) => (options.logY ? Math.log10(v) : v);
  const points = series.flatMap((s) =>
    s.x.map((x, i) => ({ x: tx(x), y: ty(s.y[i]) })),
  );
  if (points.length === 0) {
    throw new Error("nothing to plot: all series are empty");
  }
  if (points.some((p) => !Number.isFinite(p.x) || !Number.isFinite(p.y))) {
    throw new Error("log scale requires strictly positive values");
  }
  let xLo = Math.min(...points.map((p) => p.x));
  let xHi = Math.max(...points.map((p) => p.x));
  let yLo = Math.min(...points.map((p) => p.y));
  let yHi = Math.max(...points.map((p) => p.y));
  if (xHi === xLo) {
    xLo -= 0.5;
    xHi += 0.5;
  }
  if (yHi === yLo) {
    yLo -= 0.5;
    yHi += 0.5;
  }
  const padY = 0.05 * (yHi - yLo);
  yLo -= padY;
  yHi += padY;

  const px = (v: number) => MARGIN.left + ((v - xLo) / (xHi - xLo)) * plotW;
  const py = (v: number) => MARGIN.top + plotH - ((v - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="11">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  if (options.title) {
    parts.push(
      `<text x="${width / 2}" y="16" text-anchor="middle" font-size="13">${options.title}</text>`,
    );
  }

  const xTicks = options.logX ? logTicks(xLo, xHi) : niceTicks(xLo, xHi);
  const yTicks = options.logY ? logTicks(yLo, yHi) : niceTicks(yLo, yHi);
  for (const t of xTicks) {
    const x = px(t);
    parts.push(
      `<line x1="${x.toFixed(2)}" y1="${MARGIN.top}" x2="${x.toFixed(2)}" ` +
        `y2="${MARGIN.top + plotH}" stroke="#dddddd"/>`,
    );
    const label = options.logX ? `1e${t}` : fmtTick(t);
    parts.push(
      `<text x="${x.toFixed(2)}" y="${MARGIN.top + plotH + 16}" text-anchor="middle">${label}</text>`,
    );
  }
  for (const t of yTicks) {
    const y = py(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y.toFixed(2)}" x2="${MARGIN.left + plotW}" ` +
        `y2="${y.toFixed(2)}" stroke="#dddddd"/>`,
    );
    const label = options.logY ? `1e${t}` : fmtTick(t);
    parts.push(
      `<text x="${MARGIN.left - 6}" y="${(y + 4).toFixed(2)}" text-anchor="end">${label}</text>`,
    );
  }
  // zero line when visible on a linear axis
  if (!options.logY && yLo < 0 && yHi > 0) {
    const y0 = py(0);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y0.toFixed(2)}" x2="${MARGIN.left + plotW}" ` +
        `y2="${y0.toFixed(2)}" stroke="#999999"/>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333333"/>`,
  );

  series.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const coords = s.x
      .map((x, i) => `${px(tx(x)).toFixed(2)},${py(ty(s.y[i])).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline points="${coords}" fill="none" stroke="${color}" stroke-width="1.5"/>`,
    );
    for (let i = 0; i < s.x.length; i++) {
      parts.push(
        `<circle cx="${px(tx(s.x[i])).toFixed(2)}" cy="${py(ty(s.y[i])).toFixed(2)}" ` +
          `r="2.5" fill="${color}"/>`,
      );
    }
    parts.push(
      `<text x="${MARGIN.left + plotW - 8}" y="${MARGIN.top + 14 + 14 * idx}" ` +
        `text-anchor="end" fill="${color}">${s.label}</text>`,
    );
  });

  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 12}" text-anchor="middle">` +
      `${options.xLabel}</text>`,
  );
  parts.push(
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${options.yLabel}</text>`,
  );
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
