/** Command line: render violin panels from a sweep's output directory.
 *
 * Usage: recosim-plots --input results-desk/ --out figures/ [--metric all]
 *
 * Reads rounds.csv (and eccentricity.csv when the metric needs it) plus
 * summary.json for significance annotations, and writes one SVG per
 * (metric, parameter cell). Read-only over its inputs.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { pathToFileURL } from "node:url";

import { SchemaError } from "./csv.js";
import {
  CellSamples,
  METRICS,
  Metric,
  STRATEGY_AXIS_ORDER,
  loadEccentricities,
  loadRoundsMaxima,
  significantStrategies,
} from "./data.js";
import { renderPanelSvg } from "./violin.js";

export interface RenderOptions {
  inputDir: string;
  outDir: string;
  metric: Metric | "all";
  warn?: (message: string) => void;
}

function fileName(metric: Metric, weightInit: string, h: number, a: number): string {
  return `${metric}__${weightInit}_h${h}_a${a}.svg`;
}

function renderMetric(
  metric: Metric,
  cells: CellSamples,
  summary: unknown,
  outDir: string,
  warn: (message: string) => void,
): string[] {
  const written: string[] = [];
  for (const { cell, byStrategy } of cells.values()) {
    for (const strategy of STRATEGY_AXIS_ORDER) {
      if (!byStrategy.get(strategy)?.length) {
        warn(
          `warning: no ${metric} data for strategy ${strategy} in cell ` +
            `${cell.weightInit} h=${cell.h} a=${cell.a}; leaving a gap`,
        );
      }
    }
    const svg = renderPanelSvg({
      metric,
      cell,
      samples: byStrategy,
      significant: summary
        ? significantStrategies(summary, metric, cell)
        : undefined,
    });
    const out = path.join(outDir, fileName(metric, cell.weightInit, cell.h, cell.a));
    fs.writeFileSync(out, svg);
    written.push(out);
  }
  return written;
}

/** Render every requested panel; returns the written file paths. */
export function renderAll(options: RenderOptions): string[] {
  const warn = options.warn ?? ((message) => console.error(message));
  const metrics: readonly Metric[] =
    options.metric === "all" ? METRICS : [options.metric];
  fs.mkdirSync(options.outDir, { recursive: true });

  let summary: unknown;
  const summaryPath = path.join(options.inputDir, "summary.json");
  if (fs.existsSync(summaryPath)) {
    summary = JSON.parse(fs.readFileSync(summaryPath, "utf-8"));
  } else {
    warn(`warning: ${summaryPath} not found; skipping significance marks`);
  }

  const written: string[] = [];
  const roundMetrics = metrics.filter((m) => m !== "eccentricity");
  if (roundMetrics.length > 0) {
    const roundsPath = path.join(options.inputDir, "rounds.csv");
    const maxima = loadRoundsMaxima(fs.readFileSync(roundsPath, "utf-8"));
    for (const metric of roundMetrics) {
      written.push(
        ...renderMetric(metric, maxima[metric as "max_modularity" | "max_community_std"], summary, options.outDir, warn),
      );
    }
  }
  if (metrics.includes("eccentricity")) {
    const eccPath = path.join(options.inputDir, "eccentricity.csv");
    const cells = loadEccentricities(fs.readFileSync(eccPath, "utf-8"));
    written.push(
      ...renderMetric("eccentricity", cells, summary, options.outDir, warn),
    );
  }
  return written;
}

function parseArgs(argv: string[]): RenderOptions {
  let inputDir: string | undefined;
  let outDir: string | undefined;
  let metric: string = "all";
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--input":
        inputDir = argv[++i];
        break;
      case "--out":
        outDir = argv[++i];
        break;
      case "--metric":
        metric = argv[++i];
        break;
      case "--help":
        console.log(
          "usage: recosim-plots --input <sweep dir> --out <figure dir> " +
            "[--metric all|max_modularity|max_community_std|eccentricity]",
        );
        process.exit(0);
        break;
      default:
        throw new Error(`unknown argument: ${argv[i]}`);
    }
  }
  if (!inputDir || !outDir) {
    throw new Error("--input and --out are required (see --help)");
  }
  if (metric !== "all" && !METRICS.includes(metric as Metric)) {
    throw new Error(
      `unknown metric '${metric}'; expected all, ${METRICS.join(", ")}`,
    );
  }
  return { inputDir, outDir, metric: metric as Metric | "all" };
}

export function main(argv: string[]): number {
  try {
    const written = renderAll(parseArgs(argv));
    for (const file of written) {
      console.log(file);
    }
    return 0;
  } catch (error) {
    if (error instanceof SchemaError) {
      console.error(`recosim-plots: schema mismatch: ${error.message}`);
    } else {
      console.error(`recosim-plots: ${(error as Error).message}`);
    }
    return 1;
  }
}

if (
  process.argv[1] &&
  import.meta.url === pathToFileURL(process.argv[1]).href
) {
  process.exit(main(process.argv.slice(2)));
}
