import assert from "node:assert/strict";
import { test } from "node:test";

import { STRATEGY_AXIS_ORDER } from "../src/data.js";
import { renderPanelSvg } from "../src/violin.js";

function fullSamples(): Map<string, number[]> {
  const samples = new Map<string, number[]>();
  STRATEGY_AXIS_ORDER.forEach((strategy, index) => {
    samples.set(
      strategy,
      [0.1, 0.12, 0.15, 0.2, 0.22].map((v) => v + index * 0.05),
    );
  });
  return samples;
}

const CELL = { weightInit: "uniform", h: 0.3, a: 0.01 };

function countViolins(svg: string): number {
  return (svg.match(/class="violin"/g) ?? []).length;
}

test("panel holds one violin per strategy", () => {
  const svg = renderPanelSvg({
    metric: "max_modularity",
    cell: CELL,
    samples: fullSamples(),
  });
  assert.equal(countViolins(svg), 6);
  assert.equal((svg.match(/class="median"/g) ?? []).length, 6);
});

test("title records the parameter cell", () => {
  const svg = renderPanelSvg({
    metric: "max_community_std",
    cell: { weightInit: "power_law", h: 0.01, a: 0.3 },
    samples: fullSamples(),
  });
  assert.ok(svg.includes("power_law, h=0.01, a=0.3"));
});

test("category axis keeps the fixed strategy order", () => {
  const svg = renderPanelSvg({
    metric: "max_modularity",
    cell: CELL,
    samples: fullSamples(),
  });
  const found = [...svg.matchAll(/data-strategy="(\w+)"/g)].map((m) => m[1]);
  assert.deepEqual(found, [...STRATEGY_AXIS_ORDER]);
  assert.deepEqual(found, ["SC", "NO", "NU", "FU", "NOU", "FO"]);
});

test("missing strategy leaves a gap but keeps the label", () => {
  const samples = fullSamples();
  samples.delete("FU");
  const svg = renderPanelSvg({ metric: "max_modularity", cell: CELL, samples });
  assert.equal(countViolins(svg), 5);
  assert.ok(svg.includes(">FU</text>"));
});

test("significance marker drawn only for flagged strategies", () => {
  const svg = renderPanelSvg({
    metric: "max_modularity",
    cell: CELL,
    samples: fullSamples(),
    significant: new Set(["NO"]),
  });
  assert.equal((svg.match(/class="significance"/g) ?? []).length, 1);
});

test("identical-valued sample still renders a violin", () => {
  const samples = fullSamples();
  samples.set("SC", [0.25, 0.25, 0.25]);
  const svg = renderPanelSvg({ metric: "max_modularity", cell: CELL, samples });
  assert.equal(countViolins(svg), 6);
});

test("all-empty panel is an error", () => {
  assert.throws(() =>
    renderPanelSvg({ metric: "eccentricity", cell: CELL, samples: new Map() }),
  );
});
