/** Synthetic sweep outputs shaped like the simulator's CSV schemas. */

export const STRATEGIES = ["SC", "NO", "FO", "NU", "FU", "NOU"];
export const CELLS = [
  { weightInit: "uniform", h: 0.3, a: 0.01 },
  { weightInit: "uniform", h: 0.01, a: 0.3 },
  { weightInit: "power_law", h: 0.3, a: 0.01 },
  { weightInit: "power_law", h: 0.01, a: 0.3 },
];

/** Deterministic pseudo-values so reruns build identical CSVs. */
function wobble(seed: number): number {
  return ((Math.sin(seed * 12.9898) + 1) % 1) * 0.1;
}

export function syntheticRoundsCsv(runsPerCell = 3, rounds = 4): string {
  const lines = [
    "run_id,strategy,h,a,weight_init,seed,round,modularity,n_communities,community_std",
  ];
  let runId = 0;
  CELLS.forEach((cell, cellIndex) => {
    STRATEGIES.forEach((strategy, strategyIndex) => {
      for (let rep = 0; rep < runsPerCell; rep++) {
        for (let round = 0; round < rounds; round++) {
          const base = 0.1 + 0.05 * strategyIndex + 0.02 * cellIndex;
          const modularity = base + wobble(runId * 31 + round);
          const communityStd = 0.05 + 0.5 * modularity;
          lines.push(
            [
              runId,
              strategy,
              cell.h,
              cell.a,
              cell.weightInit,
              1000 + runId,
              round,
              modularity.toFixed(9),
              3,
              communityStd.toFixed(9),
            ].join(","),
          );
        }
        runId += 1;
      }
    });
  });
  return lines.join("\n") + "\n";
}

export function syntheticEccentricityCsv(
  runsPerCell = 3,
  rounds = 4,
  opinionsPerRound = 2,
): string {
  const lines = [
    "run_id,strategy,h,a,weight_init,round,opinion_id,author,eccentricity",
  ];
  let runId = 0;
  CELLS.forEach((cell, cellIndex) => {
    STRATEGIES.forEach((strategy, strategyIndex) => {
      for (let rep = 0; rep < runsPerCell; rep++) {
        let opinionId = 0;
        for (let round = 0; round < rounds; round++) {
          for (let o = 0; o < opinionsPerRound; o++) {
            const value =
              0.2 + 0.03 * strategyIndex + 0.01 * cellIndex +
              wobble(runId * 7 + opinionId);
            lines.push(
              [
                runId,
                strategy,
                cell.h,
                cell.a,
                cell.weightInit,
                round,
                opinionId,
                opinionId % 5,
                value.toFixed(9),
              ].join(","),
            );
            opinionId += 1;
          }
        }
        runId += 1;
      }
    });
  });
  return lines.join("\n") + "\n";
}

export function syntheticSummaryJson(): string {
  const pAll = { NO_vs_SC: 0.01, NO_vs_NU: 0.02, NO_vs_FU: 0.03, NO_vs_NOU: 0.04,
                 FO_vs_SC: 0.5, FO_vs_NU: 0.6, FO_vs_FU: 0.7, FO_vs_NOU: 0.8 };
    const cells = CELLS.map((cell, index) => ({
    weight_init: cell.weightInit,
    h: cell.h,
    a: cell.a,
    strategies: {},
    tests: {
      max_modularity: index === 0
        ? { alternative: "less", underpowered: false, p_values: pAll }
        : { alternative: "less", underpowered: false, p_values: {} },
      max_community_std: { alternative: "less", underpowered: false, p_values: {} },
      eccentricity: null,
    },
  }));
  return JSON.stringify({ eccentricity_burn_in_rounds: 5, cells });
}
