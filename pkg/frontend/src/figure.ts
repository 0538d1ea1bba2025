/**
 * Deterministic SVG line-chart rendering for simulator result CSVs.
 *
 * One series per method (legend labels are the CSV method strings verbatim),
 * mean values plotted exactly as stored, stderr drawn as error bars, and
 * closed-form overlay rows (EQ*) drawn as dashed lines. No timestamps or
 * randomness: identical input yields identical bytes.
 */
import { OVERLAY_METHODS, ResultRow, SchemaError } from "./schema.js";

export interface FigureSpec {
  xColumn: "sweep_value" | "snr_db" | "n_rf" | "n_r" | "bits";
  xLabel: string;
  yLabel: string;
  logX?: boolean;
  title?: string;
  width?: number;
  height?: number;
}

export interface SeriesPoint {
  x: number;
  y: number;
  err: number;
}

export interface Series {
  method: string;
  overlay: boolean;
  points: SeriesPoint[];
}

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#e377c2",
];

const MARGIN = { top: 34, right: 20, bottom: 50, left: 66 };

export function groupSeries(rows: ResultRow[], xColumn: FigureSpec["xColumn"]): Series[] {
  const order: string[] = [];
  const byMethod = new Map<string, SeriesPoint[]>();
  for (const row of rows) {
    const x = row[xColumn];
    if (!Number.isFinite(x)) {
      throw new SchemaError(
        `column '${xColumn}' is not finite for method '${row.method}'`,
      );
    }
    if (!byMethod.has(row.method)) {
      byMethod.set(row.method, []);
      order.push(row.method);
    }
    byMethod.get(row.method)!.push({ x, y: row.mean, err: row.stderr });
  }
  return order.map((method) => ({
    method,
    overlay: OVERLAY_METHODS.has(method),
    points: [...byMethod.get(method)!].sort((a, b) => a.x - b.x),
  }));
}

/** Round for SVG output; fixed precision keeps bytes reproducible. */
function fmt(value: number): string {
  const rounded = Math.round(value * 100) / 100;
  return Object.is(rounded, -0) ? "0" : String(rounded);
}

function fmtTick(value: number): string {
  const rounded = Math.round(value * 1000) / 1000;
  return Object.is(rounded, -0) ? "0" : String(rounded);
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  if (lo === hi) return [lo];
  const span = hi - lo;
  const step0 = span / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  let step = mag;
  for (const mult of [1, 2, 5, 10]) {
    if (mag * mult >= step0) {
      step = mag * mult;
      break;
    }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) {
    ticks.push(Math.abs(v) < 1e-12 ? 0 : v);
  }
  return ticks;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderFigure(rows: ResultRow[], spec: FigureSpec): string {
  if (rows.length === 0) {
    throw new SchemaError("no data rows to render");
  }
  const series = groupSeries(rows, spec.xColumn);
  const width = spec.width ?? 760;
  const height = spec.height ?? 500;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const xsRaw = series.flatMap((s) => s.points.map((p) => p.x));
  if (spec.logX && xsRaw.some((x) => x <= 0)) {
    throw new SchemaError("log x-axis requires strictly positive x values");
  }
  const toX = (x: number) => (spec.logX ? Math.log10(x) : x);
  const xs = xsRaw.map(toX);
  const ys = series.flatMap((s) => s.points.flatMap((p) => [p.y - p.err, p.y + p.err]));
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  if (xLo === xHi) {
    xLo -= 1;
    xHi += 1;
  }
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  const pad = yLo === yHi ? 1 : 0.05 * (yHi - yLo);
  yLo -= pad;
  yHi += pad;

  const sx = (x: number) => MARGIN.left + ((toX(x) - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number) => MARGIN.top + plotH - ((y - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  if (spec.title) {
    parts.push(
      `<text x="${fmt(width / 2)}" y="20" text-anchor="middle" font-size="14">${escapeXml(spec.title)}</text>`,
    );
  }

  // axes box
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333" stroke-width="1"/>`,
  );

  // x ticks: the unique swept values themselves (subsampled if crowded)
  const uniqueX = [...new Set(xsRaw)].sort((a, b) => a - b);
  const stride = Math.max(1, Math.ceil(uniqueX.length / 12));
  for (let i = 0; i < uniqueX.length; i += stride) {
    const x = uniqueX[i];
    const px = sx(x);
    parts.push(
      `<line x1="${fmt(px)}" y1="${fmt(MARGIN.top + plotH)}" x2="${fmt(px)}" y2="${fmt(MARGIN.top + plotH + 5)}" stroke="#333"/>`,
    );
    parts.push(
      `<text x="${fmt(px)}" y="${fmt(MARGIN.top + plotH + 18)}" text-anchor="middle" font-size="11">${fmtTick(x)}</text>`,
    );
  }
  for (const y of niceTicks(yLo, yHi, 6)) {
    const py = sy(y);
    parts.push(
      `<line x1="${fmt(MARGIN.left - 5)}" y1="${fmt(py)}" x2="${fmt(MARGIN.left)}" y2="${fmt(py)}" stroke="#333"/>`,
    );
    parts.push(
      `<line x1="${fmt(MARGIN.left)}" y1="${fmt(py)}" x2="${fmt(MARGIN.left + plotW)}" y2="${fmt(py)}" stroke="#ddd" stroke-width="0.5"/>`,
    );
    parts.push(
      `<text x="${fmt(MARGIN.left - 8)}" y="${fmt(py + 4)}" text-anchor="end" font-size="11">${fmtTick(y)}</text>`,
    );
  }
  parts.push(
    `<text x="${fmt(MARGIN.left + plotW / 2)}" y="${fmt(height - 12)}" text-anchor="middle" font-size="12">${escapeXml(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="16" y="${fmt(MARGIN.top + plotH / 2)}" text-anchor="middle" font-size="12" transform="rotate(-90 16 ${fmt(MARGIN.top + plotH / 2)})">${escapeXml(spec.yLabel)}</text>`,
  );

  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const dash = s.overlay ? ` stroke-dasharray="6,4"` : "";
    const pts = s.points
      .map((p) => `${fmt(sx(p.x))},${fmt(sy(p.y))}`)
      .join(" ");
    parts.push(
      `<g class="series" data-method="${escapeXml(s.method)}">`,
    );
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.8"${dash}/>`,
    );
    for (const p of s.points) {
      const px = sx(p.x);
      if (p.err > 0) {
        const yTop = sy(p.y + p.err);
        const yBot = sy(p.y - p.err);
        parts.push(
          `<line class="errorbar" x1="${fmt(px)}" y1="${fmt(yTop)}" x2="${fmt(px)}" y2="${fmt(yBot)}" stroke="${color}" stroke-width="1"/>`,
        );
        parts.push(
          `<line x1="${fmt(px - 4)}" y1="${fmt(yTop)}" x2="${fmt(px + 4)}" y2="${fmt(yTop)}" stroke="${color}" stroke-width="1"/>`,
        );
        parts.push(
          `<line x1="${fmt(px - 4)}" y1="${fmt(yBot)}" x2="${fmt(px + 4)}" y2="${fmt(yBot)}" stroke="${color}" stroke-width="1"/>`,
        );
      }
      if (!s.overlay) {
        parts.push(
          `<circle cx="${fmt(px)}" cy="${fmt(sy(p.y))}" r="3" fill="${color}"/>`,
        );
      }
    }
    parts.push(`</g>`);
  });

  // legend, top-right inside the plot area
  const legendX = MARGIN.left + plotW - 190;
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const y = MARGIN.top + 16 + 16 * i;
    const dash = s.overlay ? ` stroke-dasharray="6,4"` : "";
    parts.push(
      `<line x1="${fmt(legendX)}" y1="${fmt(y - 4)}" x2="${fmt(legendX + 26)}" y2="${fmt(y - 4)}" stroke="${color}" stroke-width="1.8"${dash}/>`,
    );
    parts.push(
      `<text x="${fmt(legendX + 32)}" y="${fmt(y)}" font-size="11">${escapeXml(s.method)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
