#!/usr/bin/env node
/**
 * plotkit: render planner exports into per-agent SVG workspace figures.
 *
 * Usage: plotkit --csv trajectory.csv --plan plan.json --out figs/
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { agentIds, renderAgentFigure } from "./figure.js";
import { loadPlan, loadTrajectory, SchemaError } from "./schema.js";

const argv = yargs(hideBin(process.argv))
  .option("csv", { type: "string", demandOption: true, describe: "trajectory.csv from the planner" })
  .option("plan", { type: "string", demandOption: true, describe: "plan.json from the planner" })
  .option("out", { type: "string", default: "figs", describe: "output directory for SVG figures" })
  .option("obstacle-label", { type: "string", default: "obs", describe: "region label drawn as an obstacle" })
  .option("no-suffix-highlight", { type: "boolean", default: false, describe: "disable the suffix-cycle highlight" })
  .strict()
  .parseSync();

try {
  const plan = loadPlan(argv.plan);
  const samples = loadTrajectory(argv.csv);
  mkdirSync(argv.out, { recursive: true });
  for (const agent of agentIds(samples)) {
    const svg = renderAgentFigure(plan, samples, agent, {
      obstacleLabel: argv.obstacleLabel,
      highlightSuffix: !argv.noSuffixHighlight,
    });
    const path = join(argv.out, `${plan.scenario}-${agent}.svg`);
    writeFileSync(path, svg);
    console.log(`wrote ${path}`);
  }
} catch (err) {
  if (err instanceof SchemaError) {
    console.error(`plotkit: ${err.message}`);
    process.exit(2);
  }
  throw err;
}
