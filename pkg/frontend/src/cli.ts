#!/usr/bin/env node
/** `plot --spec <path>`: render one figure from the solver's CSV outputs.
 * Exit codes: 0 rendered, 1 render/validation failure, 2 usage error. */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import { renderFigure } from "./figures.js";
import { loadPlotSpec } from "./spec.js";

function usage(): never {
  console.error("usage: subcellsbp-plot [plot] --spec <spec.json>");
  process.exit(2);
}

export function main(argv: string[]): void {
  const args = argv[0] === "plot" ? argv.slice(1) : argv;
  let specPath: string | undefined;
  for (let i = 0; i < args.length; i++) {
    if (args[i] === "--spec") {
      specPath = args[i + 1];
      i++;
    } else if (args[i] === "--help" || args[i] === "-h") {
      usage();
    } else {
      console.error(`unknown argument: ${args[i]}`);
      usage();
    }
  }
  if (!specPath) usage();

  try {
    const spec = loadPlotSpec(specPath);
    const svg = renderFigure(spec);
    mkdirSync(dirname(spec.output), { recursive: true });
    writeFileSync(spec.output, svg);
    console.log(`wrote ${spec.output}`);
  } catch (err) {
    console.error(`plot failed: ${(err as Error).message}`);
    process.exit(1);
  }
}

main(process.argv.slice(2));
