import { test } from "node:test";
import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import {
  CsvFormatError,
  fmt17,
  parseDiagnostics,
  parseSnapshot,
  reserializeNumericFields,
} from "../src/csv.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "..", "..", "test", "fixtures");

const DIAG_HEADER =
  "step,time,dt,mass0,mass1,total_entropy,lyapunov_V,worst_residual,total_dissipation,max_stationarity_residual";

test("fmt17 matches the solver's fixed scientific format", () => {
  assert.equal(fmt17(0), "0.0000000000000000e+00");
  assert.equal(fmt17(1), "1.0000000000000000e+00");
  assert.equal(fmt17(0.1), "1.0000000000000001e-01");
  assert.equal(fmt17(-9.81), "-9.8100000000000005e+00");
  assert.equal(fmt17(1e-30), "1.0000000000000001e-30");
  assert.equal(fmt17(6.0221408e23), "6.0221408000000000e+23");
  assert.equal(fmt17(Number.NaN), "nan");
});

test("fmt17 round-trips through parsing", () => {
  const values = [0, 1, -1, 0.1, Math.PI, 9.81, 1.2345678901234567e-12, 3.6e17, 2 ** -40];
  for (const v of values) {
    assert.equal(Number(fmt17(v)), v);
    assert.equal(fmt17(Number(fmt17(v))), fmt17(v));
  }
});

test("header-only diagnostics is rejected with 'no data rows'", () => {
  assert.throws(() => parseDiagnostics(DIAG_HEADER + "\n"), /no data rows/);
});

test("missing column is reported by name", () => {
  const broken = DIAG_HEADER.replace(",lyapunov_V", ",lyapunov") + "\n1,0,0,0,0,0,0,0,0,0\n";
  assert.throws(() => parseDiagnostics(broken), /missing column 'lyapunov_V'/);
});

test("short data row is rejected with its line number", () => {
  const text = DIAG_HEADER + "\n1,0,0\n";
  assert.throws(() => parseDiagnostics(text), (err: Error) => /line 2/.test(err.message));
});

test("diagnostics parser reads the committed fixture", () => {
  const text = readFileSync(join(FIXTURES, "asymptotic_diagnostics.csv"), "utf-8");
  const rows = parseDiagnostics(text);
  assert.ok(rows.length > 10_000);
  assert.equal(rows[0].step, 0);
  assert.equal(rows[0].time, 0);
  assert.equal(rows[0].masses.length, 2);
  assert.ok(rows[0].lyapunovV > 0);
});

test("snapshot parser reads the committed fixture", () => {
  const text = readFileSync(join(FIXTURES, "asymptotic_final_snapshot.csv"), "utf-8");
  const rows = parseSnapshot(text);
  assert.equal(rows.length, 24);
  assert.equal(rows[0].cellId, 0);
  assert.equal(rows[0].u.length, 2);
});

test("snapshot without state columns is rejected", () => {
  const text = "cell_id,x,y,area,alpha\n0,0,0,1,0\n";
  assert.throws(() => parseSnapshot(text), /missing column 'u0'/);
});

test("numeric fields of the fixtures re-serialize to the identical text", () => {
  for (const name of ["asymptotic_diagnostics.csv", "asymptotic_final_snapshot.csv"]) {
    const text = readFileSync(join(FIXTURES, name), "utf-8");
    assert.equal(reserializeNumericFields(text), text);
  }
});

test("csv errors are CsvFormatError instances", () => {
  try {
    parseDiagnostics(DIAG_HEADER + "\n");
    assert.fail("expected an error");
  } catch (err) {
    assert.ok(err instanceof CsvFormatError);
  }
});
