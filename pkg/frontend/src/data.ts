/** Load sweep CSV/JSON outputs into per-cell, per-strategy samples. */

import { parseCsv, toNumber } from "./csv.js";

/** Fixed category-axis order, kept identical across every figure. */
export const STRATEGY_AXIS_ORDER = [
  "SC",
  "NO",
  "NU",
  "FU",
  "NOU",
  "FO",
] as const;

export type Metric = "max_modularity" | "max_community_std" | "eccentricity";

export const METRICS: readonly Metric[] = [
  "max_modularity",
  "max_community_std",
  "eccentricity",
];

export interface CellKey {
  weightInit: string;
  h: number;
  a: number;
}

export function cellId(cell: CellKey): string {
  return `${cell.weightInit}|${cell.h}|${cell.a}`;
}

/** samples per cell id, then per strategy */
export type CellSamples = Map<string, { cell: CellKey; byStrategy: Map<string, number[]> }>;

const ROUNDS_COLUMNS = [
  "run_id",
  "strategy",
  "h",
  "a",
  "weight_init",
  "seed",
  "round",
  "modularity",
  "n_communities",
  "community_std",
] as const;

const ECC_COLUMNS = [
  "run_id",
  "strategy",
  "h",
  "a",
  "weight_init",
  "round",
  "opinion_id",
  "author",
  "eccentricity",
] as const;

function insert(
  cells: CellSamples,
  cell: CellKey,
  strategy: string,
  value: number,
): void {
  const id = cellId(cell);
  let entry = cells.get(id);
  if (!entry) {
    entry = { cell, byStrategy: new Map() };
    cells.set(id, entry);
  }
  let samples = entry.byStrategy.get(strategy);
  if (!samples) {
    samples = [];
    entry.byStrategy.set(strategy, samples);
  }
  samples.push(value);
}

/** Per-run maxima of the two round metrics, grouped by cell and strategy. */
export function loadRoundsMaxima(text: string): {
  max_modularity: CellSamples;
  max_community_std: CellSamples;
} {
  const rows = parseCsv(text, ROUNDS_COLUMNS);
  interface RunAgg {
    cell: CellKey;
    strategy: string;
    maxModularity: number;
    maxCommunityStd: number;
  }
  const runs = new Map<string, RunAgg>();
  rows.forEach((row, index) => {
    const line = index + 2;
    const runId = row.run_id;
    const modularity = toNumber(row, "modularity", line);
    const communityStd = toNumber(row, "community_std", line);
    const agg = runs.get(runId);
    if (agg) {
      agg.maxModularity = Math.max(agg.maxModularity, modularity);
      agg.maxCommunityStd = Math.max(agg.maxCommunityStd, communityStd);
    } else {
      runs.set(runId, {
        cell: {
          weightInit: row.weight_init,
          h: toNumber(row, "h", line),
          a: toNumber(row, "a", line),
        },
        strategy: row.strategy,
        maxModularity: modularity,
        maxCommunityStd: communityStd,
      });
    }
  });
  const modularity: CellSamples = new Map();
  const communityStd: CellSamples = new Map();
  for (const agg of runs.values()) {
    insert(modularity, agg.cell, agg.strategy, agg.maxModularity);
    insert(communityStd, agg.cell, agg.strategy, agg.maxCommunityStd);
  }
  return { max_modularity: modularity, max_community_std: communityStd };
}

/** Pooled opinion eccentricities per cell and strategy. */
export function loadEccentricities(text: string): CellSamples {
  const rows = parseCsv(text, ECC_COLUMNS);
  const cells: CellSamples = new Map();
  rows.forEach((row, index) => {
    const line = index + 2;
    insert(
      cells,
      {
        weightInit: row.weight_init,
        h: toNumber(row, "h", line),
        a: toNumber(row, "a", line),
      },
      row.strategy,
      toNumber(row, "eccentricity", line),
    );
  });
  return cells;
}

/**
 * Strategies whose opinion-vs-baseline tests all reach p < 0.05 for a
 * metric in a cell, read from the sweep's summary.json (never recomputed
 * here).
 */
export function significantStrategies(
  summary: unknown,
  metric: Metric,
  cell: CellKey,
): Set<string> {
  const out = new Set<string>();
  const doc = summary as {
    cells?: Array<{
      weight_init: string;
      h: number;
      a: number;
      tests?: Record<string, { p_values?: Record<string, number> } | null>;
    }>;
  };
  const block = doc.cells?.find(
    (c) => c.weight_init === cell.weightInit && c.h === cell.h && c.a === cell.a,
  );
  const pValues = block?.tests?.[metric]?.p_values;
  if (!pValues) return out;
  for (const target of ["NO", "FO"]) {
    const pairs = Object.entries(pValues).filter(([name]) =>
      name.startsWith(`${target}_vs_`),
    );
    if (pairs.length > 0 && pairs.every(([, p]) => p < 0.05)) {
      out.add(target);
    }
  }
  return out;
}
