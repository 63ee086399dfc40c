#!/usr/bin/env node
/**
 * Render one figure from a diagnostics or snapshot CSV.
 *
 * Usage:
 *   node dist/src/cli.js --kind lyapunov --input diagnostics.csv --out fig.svg
 *   node dist/src/cli.js --kind entropy  --input diagnostics.csv --out fig.svg
 *   node dist/src/cli.js --kind surface  --input snapshot.csv --out fig.svg [--z0 1.0]
 *   node dist/src/cli.js --kind velocity --input snapshot.csv --out fig.svg
 */

import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { dirname } from "node:path";
import { parseDiagnostics, parseSnapshot, CsvFormatError } from "./csv.js";
import { makeEntropyFigure, makeLyapunovFigure, makeSurfaceFigure, makeVelocityFigure } from "./plots.js";

interface Args {
  kind: string;
  input: string;
  out: string;
  z0?: number;
}

function parseArgs(argv: string[]): Args {
  const args: Partial<Args> = {};
  for (let i = 0; i < argv.length; i++) {
    const key = argv[i];
    const val = argv[i + 1];
    switch (key) {
      case "--kind":
        args.kind = val;
        i++;
        break;
      case "--input":
        args.input = val;
        i++;
        break;
      case "--out":
        args.out = val;
        i++;
        break;
      case "--z0":
        args.z0 = Number(val);
        i++;
        break;
      default:
        throw new Error(`unknown argument ${key}`);
    }
  }
  if (!args.kind || !args.input || !args.out) {
    throw new Error("required: --kind <lyapunov|entropy|surface|velocity> --input <csv> --out <svg>");
  }
  return args as Args;
}

export function render(args: Args): string {
  const text = readFileSync(args.input, "utf-8");
  switch (args.kind) {
    case "lyapunov":
      return makeLyapunovFigure(parseDiagnostics(text));
    case "entropy":
      return makeEntropyFigure(parseDiagnostics(text));
    case "surface":
      return makeSurfaceFigure(parseSnapshot(text), args.z0);
    case "velocity":
      return makeVelocityFigure(parseSnapshot(text));
    default:
      throw new Error(`unknown figure kind ${args.kind}`);
  }
}

function main(): number {
  try {
    const args = parseArgs(process.argv.slice(2));
    const svg = render(args);
    mkdirSync(dirname(args.out), { recursive: true });
    writeFileSync(args.out, svg);
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof CsvFormatError) {
      console.error(`csv error: ${err.message}`);
    } else {
      console.error(`error: ${(err as Error).message}`);
    }
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main());
}
