// Pure view helpers: every number shown comes straight from a service
// response; nothing here recomputes risk or levels.

import { RiskMapDoc, Thresholds } from "./types.js";

export const LEVEL_COLORS: Record<string, string> = {
  low: "#2e8b57",
  medium: "#e6a817",
  high: "#c0392b",
};

export interface TrajectoryPoint {
  t: number;
  value: number;
}

export function trajectoryPoints(summary: number[]): TrajectoryPoint[] {
  return summary.map((value, t) => ({ t, value }));
}

/** SVG polyline points for a mean-risk trajectory, risk axis fixed to [0, 1]. */
export function trajectoryPath(
  summary: number[],
  width: number,
  height: number,
  pad = 4,
): string {
  if (summary.length === 0) return "";
  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;
  const step = summary.length > 1 ? innerW / (summary.length - 1) : 0;
  return summary
    .map((value, i) => {
      const x = pad + i * step;
      const y = pad + (1 - value) * innerH;
      return `${x.toFixed(2)},${y.toFixed(2)}`;
    })
    .join(" ");
}

export interface CellView {
  risk: number;
  level: string;
  color: string;
}

/** Row-major cell views for one map, using the service-assigned levels. */
export function mapCells(map: RiskMapDoc): CellView[][] {
  const rows: CellView[][] = [];
  for (let r = 0; r < map.rows; r++) {
    const row: CellView[] = [];
    for (let c = 0; c < map.cols; c++) {
      const i = r * map.cols + c;
      const level = map.levels[i];
      row.push({ risk: map.risk[i], level, color: LEVEL_COLORS[level] ?? "#999" });
    }
    rows.push(row);
  }
  return rows;
}

export function mapGridHtml(map: RiskMapDoc, caption: string): string {
  const body = mapCells(map)
    .map(
      (row) =>
        `<tr>${row
          .map(
            (cell) =>
              `<td class="cell" data-level="${cell.level}" ` +
              `style="background:${cell.color}" ` +
              `title="risk ${cell.risk.toFixed(4)} (${cell.level})"></td>`,
          )
          .join("")}</tr>`,
    )
    .join("");
  return (
    `<figure class="risk-map"><table><tbody>${body}</tbody></table>` +
    `<figcaption>${caption} — ${map.timestamp}</figcaption></figure>`
  );
}

export function legendHtml(thresholds: Thresholds): string {
  const entries = [
    ["low", `&le; ${thresholds.low_upper}`],
    ["medium", `&le; ${thresholds.medium_upper}`],
    ["high", `&gt; ${thresholds.medium_upper}`],
  ];
  return entries
    .map(
      ([level, label]) =>
        `<span class="legend-entry"><span class="swatch" ` +
        `style="background:${LEVEL_COLORS[level]}"></span>${level} ${label}</span>`,
    )
    .join(" ");
}
