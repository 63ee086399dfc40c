import { test } from "node:test";
import assert from "node:assert/strict";

import { DiagnosticsRow, SnapshotRow } from "../src/csv.js";
import {
  fitDecayRate,
  makeEntropyFigure,
  makeLyapunovFigure,
  makeSurfaceFigure,
  makeVelocityFigure,
} from "../src/plots.js";

function diagRow(step: number, v: number): DiagnosticsRow {
  return {
    step,
    time: step * 0.01,
    dt: 0.01,
    masses: [1, 0],
    totalEntropy: 0.5,
    lyapunovV: v,
    worstResidual: 0,
    totalDissipation: 1e-9,
    maxStationarityResidual: 0,
  };
}

function snapRow(i: number, h: number, q: number, alpha: number): SnapshotRow {
  return { cellId: i, x: (i + 0.5) / 8, y: 0, area: 1 / 8, alpha, u: [h, q] };
}

test("lyapunov figure annotates the fitted geometric rate", () => {
  const rows = Array.from({ length: 200 }, (_, n) => diagRow(n, 1e-3 * Math.pow(0.99, n)));
  const svg = makeLyapunovFigure(rows);
  assert.match(svg, /<svg /);
  assert.match(svg, /polyline/);
  assert.match(svg, /fitted decay rate 0\.99/);
});

test("fitDecayRate recovers a geometric factor", () => {
  const v = Array.from({ length: 400 }, (_, n) => 2.5 * Math.pow(0.995, n));
  const rate = fitDecayRate(v);
  assert.ok(rate !== null && Math.abs(rate - 0.995) < 1e-6);
});

test("stationary-run diagnostics gives a flat zero Lyapunov line", () => {
  const rows = Array.from({ length: 50 }, (_, n) => diagRow(n, 0));
  const svg = makeLyapunovFigure(rows);
  assert.match(svg, /polyline/);
});

test("lyapunov figure refuses runs without a stationary family", () => {
  const rows = [diagRow(0, Number.NaN), diagRow(1, Number.NaN)];
  assert.throws(() => makeLyapunovFigure(rows), /no stationary family/);
});

test("entropy figure is produced", () => {
  const rows = Array.from({ length: 50 }, (_, n) => diagRow(n, 1e-4));
  assert.match(makeEntropyFigure(rows), /Total entropy/);
});

test("surface figure draws the reference level when given", () => {
  const rows = Array.from({ length: 8 }, (_, i) => snapRow(i, 1 - 0.2 * (i % 2), 0, 0.2 * (i % 2)));
  const svg = makeSurfaceFigure(rows, 1.0);
  assert.match(svg, /z0 = 1/);
  assert.match(svg, /h \+ alpha/);
  const noRef = makeSurfaceFigure(rows);
  assert.doesNotMatch(noRef, /z0 =/);
});

test("velocity figure uses |u[1..]| / u0", () => {
  const rows = Array.from({ length: 8 }, (_, i) => snapRow(i, 2, 1, 0));
  const svg = makeVelocityFigure(rows);
  assert.match(svg, /Velocity magnitude/);
});

test("figures are deterministic", () => {
  const rows = Array.from({ length: 60 }, (_, n) => diagRow(n, 1e-3 * Math.pow(0.98, n)));
  assert.equal(makeLyapunovFigure(rows), makeLyapunovFigure(rows));
});
