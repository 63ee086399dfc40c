/**
 * Strict readers for the solver's CSV outputs.
 *
 * Diagnostics stream:
 *   step,time,dt,mass0[,mass1,...],total_entropy,lyapunov_V,
 *   worst_residual,total_dissipation,max_stationarity_residual
 *
 * Snapshot:
 *   cell_id,x,y,area,alpha,u0,u1[,u2]
 *
 * Every float is serialized by the solver with 17 significant digits as
 * d.dddddddddddddddde±XX; fmt17() reproduces that text exactly, so parsing
 * and re-serializing a file is the identity on its numeric fields.
 */

export interface DiagnosticsRow {
  step: number;
  time: number;
  dt: number;
  masses: number[];
  totalEntropy: number;
  lyapunovV: number;
  worstResidual: number;
  totalDissipation: number;
  maxStationarityResidual: number;
}

export interface SnapshotRow {
  cellId: number;
  x: number;
  y: number;
  area: number;
  alpha: number;
  u: number[];
}

export class CsvFormatError extends Error {}

/** Mirror of the solver's "%.16e" float format (17 significant digits). */
export function fmt17(x: number): string {
  if (Number.isNaN(x)) return "nan";
  if (!Number.isFinite(x)) return x > 0 ? "inf" : "-inf";
  let s = x.toExponential(16);
  if (Object.is(x, -0)) s = "-" + s;
  // pad the exponent to at least two digits: e+1 -> e+01
  return s.replace(/e([+-])(\d+)$/, (_m, sign: string, digits: string) =>
    `e${sign}${digits.length < 2 ? "0" + digits : digits}`,
  );
}

function parseFloatStrict(field: string, line: number, column: string): number {
  if (field === "nan") return Number.NaN;
  if (field === "inf") return Number.POSITIVE_INFINITY;
  if (field === "-inf") return Number.NEGATIVE_INFINITY;
  const v = Number(field);
  if (field.trim() === "" || Number.isNaN(v)) {
    throw new CsvFormatError(`line ${line}: bad number '${field}' in column ${column}`);
  }
  return v;
}

function splitNonEmptyLines(text: string): string[] {
  return text.split("\n").filter((l) => l.trim().length > 0);
}

function headerIndex(header: string[], name: string): number {
  const idx = header.indexOf(name);
  if (idx < 0) throw new CsvFormatError(`missing column '${name}'`);
  return idx;
}

export function parseDiagnostics(text: string): DiagnosticsRow[] {
  const lines = splitNonEmptyLines(text);
  if (lines.length === 0) throw new CsvFormatError("empty file");
  const header = lines[0].split(",");
  const massCols: number[] = [];
  for (let i = 0; i < header.length; i++) {
    if (/^mass\d+$/.test(header[i])) massCols.push(i);
  }
  if (massCols.length === 0) throw new CsvFormatError("missing column 'mass0'");
  const col = {
    step: headerIndex(header, "step"),
    time: headerIndex(header, "time"),
    dt: headerIndex(header, "dt"),
    totalEntropy: headerIndex(header, "total_entropy"),
    lyapunovV: headerIndex(header, "lyapunov_V"),
    worstResidual: headerIndex(header, "worst_residual"),
    totalDissipation: headerIndex(header, "total_dissipation"),
    maxStationarityResidual: headerIndex(header, "max_stationarity_residual"),
  };
  const rows: DiagnosticsRow[] = [];
  for (let li = 1; li < lines.length; li++) {
    const parts = lines[li].split(",");
    if (parts.length !== header.length) {
      throw new CsvFormatError(`line ${li + 1}: expected ${header.length} fields, got ${parts.length}`);
    }
    rows.push({
      step: parseInt(parts[col.step], 10),
      time: parseFloatStrict(parts[col.time], li + 1, "time"),
      dt: parseFloatStrict(parts[col.dt], li + 1, "dt"),
      masses: massCols.map((c) => parseFloatStrict(parts[c], li + 1, header[c])),
      totalEntropy: parseFloatStrict(parts[col.totalEntropy], li + 1, "total_entropy"),
      lyapunovV: parseFloatStrict(parts[col.lyapunovV], li + 1, "lyapunov_V"),
      worstResidual: parseFloatStrict(parts[col.worstResidual], li + 1, "worst_residual"),
      totalDissipation: parseFloatStrict(parts[col.totalDissipation], li + 1, "total_dissipation"),
      maxStationarityResidual: parseFloatStrict(
        parts[col.maxStationarityResidual],
        li + 1,
        "max_stationarity_residual",
      ),
    });
  }
  if (rows.length === 0) throw new CsvFormatError("no data rows");
  return rows;
}

export function parseSnapshot(text: string): SnapshotRow[] {
  const lines = splitNonEmptyLines(text);
  if (lines.length === 0) throw new CsvFormatError("empty file");
  const header = lines[0].split(",");
  const uCols: number[] = [];
  for (let i = 0; i < header.length; i++) {
    if (/^u\d+$/.test(header[i])) uCols.push(i);
  }
  if (uCols.length === 0) throw new CsvFormatError("missing column 'u0'");
  const col = {
    cellId: headerIndex(header, "cell_id"),
    x: headerIndex(header, "x"),
    y: headerIndex(header, "y"),
    area: headerIndex(header, "area"),
    alpha: headerIndex(header, "alpha"),
  };
  const rows: SnapshotRow[] = [];
  for (let li = 1; li < lines.length; li++) {
    const parts = lines[li].split(",");
    if (parts.length !== header.length) {
      throw new CsvFormatError(`line ${li + 1}: expected ${header.length} fields, got ${parts.length}`);
    }
    rows.push({
      cellId: parseInt(parts[col.cellId], 10),
      x: parseFloatStrict(parts[col.x], li + 1, "x"),
      y: parseFloatStrict(parts[col.y], li + 1, "y"),
      area: parseFloatStrict(parts[col.area], li + 1, "area"),
      alpha: parseFloatStrict(parts[col.alpha], li + 1, "alpha"),
      u: uCols.map((c) => parseFloatStrict(parts[c], li + 1, header[c])),
    });
  }
  if (rows.length === 0) throw new CsvFormatError("no data rows");
  return rows;
}

/** Re-serialize the numeric fields of a CSV body, for round-trip checks. */
export function reserializeNumericFields(text: string): string {
  const lines = splitNonEmptyLines(text);
  const out = [lines[0]];
  for (let i = 1; i < lines.length; i++) {
    out.push(
      lines[i]
        .split(",")
        .map((field, idx) => (idx === 0 ? field : fmt17(Number(field))))
        .join(","),
    );
  }
  return out.join("\n") + "\n";
}
