/**
 * Minimal hand-rolled SVG line charts, deterministic output.
 */

export interface Series {
  x: number[];
  y: number[];
  color?: string;
  label?: string;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logY?: boolean;
  refY?: { value: number; label: string };
  annotation?: string;
  width?: number;
  height?: number;
}

const MARGIN = { top: 48, right: 24, bottom: 52, left: 84 };

function niceTicks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = (span / count) / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = step * mult;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) ticks.push(v);
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  const lo10 = Math.ceil(Math.log10(lo));
  const hi10 = Math.floor(Math.log10(hi));
  const stride = Math.max(1, Math.ceil((hi10 - lo10) / 8));
  for (let e = lo10; e <= hi10; e += stride) ticks.push(Math.pow(10, e));
  return ticks.length > 0 ? ticks : [lo];
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0);
  return String(Math.round(v * 1e6) / 1e6);
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function lineChart(series: Series[], opts: ChartOptions): string {
  const width = opts.width ?? 720;
  const height = opts.height ?? 440;
  const iw = width - MARGIN.left - MARGIN.right;
  const ih = height - MARGIN.top - MARGIN.bottom;

  const xs = series.flatMap((s) => s.x);
  let ys = series.flatMap((s) => s.y);
  if (opts.logY) ys = ys.filter((v) => v > 0);
  if (opts.refY && !opts.logY) ys = ys.concat([opts.refY.value]);
  if (xs.length === 0 || ys.length === 0) throw new Error("nothing to plot");

  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  if (yHi === yLo) {
    yLo -= 0.5;
    yHi += 0.5;
  }

  const tx = (x: number) => MARGIN.left + ((x - xLo) / (xHi - xLo || 1)) * iw;
  const ty = opts.logY
    ? (y: number) =>
        MARGIN.top + ih - ((Math.log10(y) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo) || 1)) * ih
    : (y: number) => MARGIN.top + ih - ((y - yLo) / (yHi - yLo)) * ih;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">${esc(opts.title)}</text>`,
  );

  const xTicks = niceTicks(xLo, xHi, 6);
  const yTicks = opts.logY ? logTicks(yLo, yHi) : niceTicks(yLo, yHi, 6);
  for (const t of xTicks) {
    const px = tx(t);
    parts.push(`<line x1="${px.toFixed(2)}" y1="${MARGIN.top}" x2="${px.toFixed(2)}" y2="${MARGIN.top + ih}" stroke="#ddd"/>`);
    parts.push(
      `<text x="${px.toFixed(2)}" y="${MARGIN.top + ih + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmtTick(t)}</text>`,
    );
  }
  for (const t of yTicks) {
    const py = ty(t);
    parts.push(`<line x1="${MARGIN.left}" y1="${py.toFixed(2)}" x2="${MARGIN.left + iw}" y2="${py.toFixed(2)}" stroke="#ddd"/>`);
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${(py + 4).toFixed(2)}" text-anchor="end" font-family="sans-serif" font-size="11">${fmtTick(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${iw}" height="${ih}" fill="none" stroke="#333"/>`,
  );

  if (opts.refY) {
    const py = ty(opts.refY.value);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py.toFixed(2)}" x2="${MARGIN.left + iw}" y2="${py.toFixed(2)}" stroke="#c22" stroke-dasharray="6 4"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left + iw - 6}" y="${(py - 6).toFixed(2)}" text-anchor="end" font-family="sans-serif" font-size="11" fill="#c22">${esc(opts.refY.label)}</text>`,
    );
  }

  const colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];
  series.forEach((s, si) => {
    const pts: string[] = [];
    for (let i = 0; i < s.x.length; i++) {
      const y = s.y[i];
      if (opts.logY && !(y > 0)) continue;
      pts.push(`${tx(s.x[i]).toFixed(2)},${ty(y).toFixed(2)}`);
    }
    parts.push(
      `<polyline points="${pts.join(" ")}" fill="none" stroke="${s.color ?? colors[si % colors.length]}" stroke-width="1.5"/>`,
    );
    if (s.label) {
      parts.push(
        `<text x="${MARGIN.left + 10}" y="${MARGIN.top + 16 + 16 * si}" font-family="sans-serif" font-size="12" fill="${s.color ?? colors[si % colors.length]}">${esc(s.label)}</text>`,
      );
    }
  });

  if (opts.annotation) {
    parts.push(
      `<text x="${MARGIN.left + iw - 8}" y="${MARGIN.top + ih - 10}" text-anchor="end" font-family="sans-serif" font-size="12" fill="#555">${esc(opts.annotation)}</text>`,
    );
  }

  parts.push(
    `<text x="${MARGIN.left + iw / 2}" y="${height - 14}" text-anchor="middle" font-family="sans-serif" font-size="13">${esc(opts.xLabel)}</text>`,
  );
  parts.push(
    `<text x="20" y="${MARGIN.top + ih / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 20 ${MARGIN.top + ih / 2})">${esc(opts.yLabel)}</text>`,
  );
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
