/** SVG violin panels: one panel per (metric, parameter cell). */

import { CellKey, Metric, STRATEGY_AXIS_ORDER } from "./data.js";
import { densityCurve, median } from "./stats.js";

export interface PanelSpec {
  metric: Metric;
  cell: CellKey;
  samples: Map<string, number[]>;
  /** strategies to mark as significant (read from summary.json) */
  significant?: Set<string>;
}

const WIDTH = 760;
const HEIGHT = 430;
const MARGIN = { top: 48, right: 24, bottom: 56, left: 72 };
const HALF_WIDTH = 0.42; // violin half-width in slot units

const METRIC_LABELS: Record<Metric, string> = {
  max_modularity: "max modularity",
  max_community_std: "max community-state dispersion",
  eccentricity: "opinion eccentricity",
};

function fmt(value: number): string {
  return Number(value.toFixed(2)).toString();
}

export function panelTitle(metric: Metric, cell: CellKey): string {
  return `${METRIC_LABELS[metric]} — ${cell.weightInit}, h=${cell.h}, a=${cell.a}`;
}

/** Render one panel; strategies with no data leave a labeled gap. */
export function renderPanelSvg(spec: PanelSpec): string {
  const plotWidth = WIDTH - MARGIN.left - MARGIN.right;
  const plotHeight = HEIGHT - MARGIN.top - MARGIN.bottom;
  const slot = plotWidth / STRATEGY_AXIS_ORDER.length;

  const all = STRATEGY_AXIS_ORDER.flatMap((s) => spec.samples.get(s) ?? []);
  if (all.length === 0) {
    throw new Error(
      `no data for any strategy in cell ${spec.cell.weightInit} ` +
        `h=${spec.cell.h} a=${spec.cell.a}`,
    );
  }
  let lo = Math.min(...all);
  let hi = Math.max(...all);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = (hi - lo) * 0.06;
  lo -= pad;
  hi += pad;
  const yPix = (v: number): number =>
    MARGIN.top + plotHeight - ((v - lo) / (hi - lo)) * plotHeight;
  const xCenter = (index: number): number => MARGIN.left + slot * (index + 0.5);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
      `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="26" text-anchor="middle" ` +
      `font-family="sans-serif" font-size="16">${panelTitle(spec.metric, spec.cell)}</text>`,
  );

  // y axis: line, ticks, labels
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" ` +
      `y2="${MARGIN.top + plotHeight}" stroke="black"/>`,
  );
  const tickCount = 6;
  for (let t = 0; t <= tickCount; t++) {
    const value = lo + ((hi - lo) * t) / tickCount;
    const y = yPix(value);
    parts.push(
      `<line x1="${MARGIN.left - 5}" y1="${y}" x2="${MARGIN.left}" y2="${y}" stroke="black"/>`,
      `<text x="${MARGIN.left - 9}" y="${y + 4}" text-anchor="end" ` +
        `font-family="sans-serif" font-size="11">${value.toFixed(3)}</text>`,
    );
  }
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top + plotHeight}" ` +
      `x2="${MARGIN.left + plotWidth}" y2="${MARGIN.top + plotHeight}" stroke="black"/>`,
  );

  STRATEGY_AXIS_ORDER.forEach((strategy, index) => {
    const cx = xCenter(index);
    const values = spec.samples.get(strategy);
    parts.push(
      `<text x="${cx}" y="${HEIGHT - 26}" text-anchor="middle" ` +
        `font-family="sans-serif" font-size="13" ` +
        `fill="${values?.length ? "black" : "#999"}">${strategy}</text>`,
    );
    if (!values || values.length === 0) {
      // gap: slot stays labeled but empty
      return;
    }
    const curve = densityCurve(values);
    const peak = Math.max(...curve.map((p) => p.density)) || 1;
    const right = curve.map(
      (p) =>
        `${(cx + (p.density / peak) * HALF_WIDTH * slot).toFixed(2)},` +
        `${yPix(p.y).toFixed(2)}`,
    );
    const left = [...curve]
      .reverse()
      .map(
        (p) =>
          `${(cx - (p.density / peak) * HALF_WIDTH * slot).toFixed(2)},` +
          `${yPix(p.y).toFixed(2)}`,
      );
    parts.push(
      `<path class="violin" data-strategy="${strategy}" ` +
        `d="M ${right.join(" L ")} L ${left.join(" L ")} Z" ` +
        `fill="#7aa6c2" fill-opacity="0.6" stroke="#2d5d7b"/>`,
    );
    const med = median(values);
    const my = yPix(med).toFixed(2);
    parts.push(
      `<line class="median" x1="${(cx - HALF_WIDTH * slot * 0.6).toFixed(2)}" ` +
        `y1="${my}" x2="${(cx + HALF_WIDTH * slot * 0.6).toFixed(2)}" ` +
        `y2="${my}" stroke="#16344a" stroke-width="2"/>`,
    );
    if (spec.significant?.has(strategy)) {
      // p < 0.05 against every baseline, read from summary.json
      parts.push(
        `<text class="significance" x="${cx}" y="${MARGIN.top - 6}" ` +
          `text-anchor="middle" font-family="sans-serif" font-size="14">*</text>`,
      );
    }
  });

  parts.push(
    `<text x="${MARGIN.left + plotWidth / 2}" y="${HEIGHT - 8}" ` +
      `text-anchor="middle" font-family="sans-serif" font-size="12">` +
      `recommendation strategy</text>`,
    `</svg>`,
  );
  return parts.join("\n");
}
