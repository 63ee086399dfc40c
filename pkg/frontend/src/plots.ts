/**
 * Figure builders: Lyapunov decay, total entropy, free surface, velocity.
 *
 * Strictly read-only over the solver's CSV columns; the only derived
 * quantities are the free surface u0 + alpha and the velocity magnitude
 * |u[1..]| / u0 of shallow water snapshots.
 */

import { DiagnosticsRow, SnapshotRow } from "./csv.js";
import { lineChart } from "./svg.js";

/** Geometric decay factor per step, fitted over the final half of the series. */
export function fitDecayRate(v: number[]): number | null {
  const tail = v.slice(Math.floor(v.length / 2)).filter((x) => x > 0);
  if (tail.length < 2) return null;
  // least squares on log(V) against the step index
  const n = tail.length;
  let sx = 0;
  let sy = 0;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    const y = Math.log(tail[i]);
    sx += i;
    sy += y;
    sxx += i * i;
    sxy += i * y;
  }
  const slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return Math.exp(slope);
}

export function makeLyapunovFigure(rows: DiagnosticsRow[]): string {
  const steps = rows.map((r) => r.step);
  const v = rows.map((r) => r.lyapunovV);
  if (v.some((x) => Number.isNaN(x))) {
    throw new Error("lyapunov_V column holds no values: the run had no stationary family");
  }
  const rate = fitDecayRate(v);
  const allZero = v.every((x) => x === 0);
  return lineChart([{ x: steps, y: v, label: "V" }], {
    title: "Lyapunov functional",
    xLabel: "step",
    yLabel: "V = sum |K| h(u, v)",
    logY: !allZero,
    annotation: rate === null ? undefined : `fitted decay rate ${rate.toFixed(6)} / step`,
  });
}

export function makeEntropyFigure(rows: DiagnosticsRow[]): string {
  return lineChart([{ x: rows.map((r) => r.time), y: rows.map((r) => r.totalEntropy), label: "total entropy" }], {
    title: "Total entropy",
    xLabel: "time",
    yLabel: "sum |K| eta(u, alpha)",
  });
}

export function makeSurfaceFigure(rows: SnapshotRow[], z0?: number): string {
  const sorted = [...rows].sort((a, b) => a.x - b.x);
  const x = sorted.map((r) => r.x);
  const surface = sorted.map((r) => r.u[0] + r.alpha);
  const bottom = sorted.map((r) => r.alpha);
  return lineChart(
    [
      { x, y: surface, label: "h + alpha" },
      { x, y: bottom, label: "alpha", color: "#8c564b" },
    ],
    {
      title: "Free surface",
      xLabel: "x",
      yLabel: "h + alpha",
      refY: z0 === undefined ? undefined : { value: z0, label: `z0 = ${z0}` },
    },
  );
}

export function makeVelocityFigure(rows: SnapshotRow[]): string {
  const sorted = [...rows].sort((a, b) => a.x - b.x);
  const x = sorted.map((r) => r.x);
  const speed = sorted.map((r) => {
    let q2 = 0;
    for (let k = 1; k < r.u.length; k++) q2 += r.u[k] * r.u[k];
    return Math.sqrt(q2) / r.u[0];
  });
  return lineChart([{ x, y: speed, label: "|U|" }], {
    title: "Velocity magnitude",
    xLabel: "x",
    yLabel: "|U|",
  });
}
