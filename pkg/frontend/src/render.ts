#!/usr/bin/env node
/**
 * Batch figure renderer.
 *
 *   render --spec figures.json [--base DIR]
 *
 * The spec file holds {"figures": [FigureSpec, ...]}; CSV paths are resolved
 * relative to --base (default: the spec file's directory), output paths
 * likewise.  Any error aborts before the figure's file is written.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { parseCsv, Table } from "./csv.js";
import { FigureSpec, renderFigure } from "./figures.js";

export function loadSpec(specPath: string): { figures: FigureSpec[] } {
  const doc = JSON.parse(fs.readFileSync(specPath, "utf-8"));
  if (!doc || !Array.isArray(doc.figures)) {
    throw new Error("spec must be a JSON object with a 'figures' array");
  }
  for (const f of doc.figures) {
    if (!f.kind || !f.data || !f.out) {
      throw new Error("every figure needs 'kind', 'data' and 'out'");
    }
  }
  return doc;
}

export function renderAll(specPath: string, baseDir?: string): string[] {
  const base = baseDir ?? path.dirname(path.resolve(specPath));
  const { figures } = loadSpec(specPath);
  const loader = (p: string): Table =>
    parseCsv(fs.readFileSync(path.resolve(base, p), "utf-8"));
  const written: string[] = [];
  for (const fig of figures) {
    const svg = renderFigure(fig, loader);
    const outPath = path.resolve(base, fig.out);
    fs.mkdirSync(path.dirname(outPath), { recursive: true });
    fs.writeFileSync(outPath, svg);
    written.push(outPath);
  }
  return written;
}

function main(argv: string[]): number {
  let spec = "";
  let base: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--spec") spec = argv[++i];
    else if (argv[i] === "--base") base = argv[++i];
    else {
      console.error(`unknown argument ${argv[i]}`);
      return 2;
    }
  }
  if (!spec) {
    console.error("usage: render --spec figures.json [--base DIR]");
    return 2;
  }
  try {
    const written = renderAll(spec, base);
    for (const w of written) console.log(w);
    return 0;
  } catch (e) {
    console.error(`render failed: ${(e as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && path.basename(process.argv[1]).startsWith("render")) {
  process.exit(main(process.argv.slice(2)));
}
