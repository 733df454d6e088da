/** Campaign grid model: mode x platform rows, level columns, cf/bf/bc cells.
 *
 * Cell counts come straight from /api/report for a snapshot; the pending
 * badge is the number of instances in the cell the report does not count
 * yet (not enough complete attempts). The grid holds no state of its own,
 * so whatever the API says for a snapshot token is what renders.
 */

import type { InstanceRow, ReportPayload } from "./types.js";

export const MODE_ORDER = ["none", "llm-generated", "human-expert"];
export const MODE_DISPLAY: Record<string, string> = {
  none: "No-Skills",
  "llm-generated": "LLM",
  "human-expert": "Human-Expert",
};
export const PLATFORM_ORDER = ["atmega2560+arduino", "esp32s3+espidf", "nrf52840+zephyr"];
export const PLATFORM_DISPLAY: Record<string, string> = {
  "atmega2560+arduino": "Arduino",
  "esp32s3+espidf": "ESP-IDF",
  "nrf52840+zephyr": "Zephyr",
};

export interface GridCellView {
  mode: string;
  platform: string;
  level: number | "total";
  cf: number;
  bf: number;
  bc: number;
  pending: number;
}

export interface GridRow {
  mode: string;
  platform: string;
  cells: GridCellView[];
}

export interface GridModel {
  k: number;
  seq: number;
  levels: number[];
  rows: GridRow[];
}

function rank(value: string, order: string[]): [number, string] {
  const index = order.indexOf(value);
  return index >= 0 ? [index, ""] : [order.length, value];
}

function compareRows(a: [string, string], b: [string, string]): number {
  const [am, ap] = a;
  const [bm, bp] = b;
  const modeCmp =
    rank(am, MODE_ORDER)[0] - rank(bm, MODE_ORDER)[0] || rank(am, MODE_ORDER)[1].localeCompare(rank(bm, MODE_ORDER)[1]);
  if (modeCmp !== 0) return modeCmp;
  return (
    rank(ap, PLATFORM_ORDER)[0] - rank(bp, PLATFORM_ORDER)[0] ||
    rank(ap, PLATFORM_ORDER)[1].localeCompare(rank(bp, PLATFORM_ORDER)[1])
  );
}

export function formatCell(cell: GridCellView): string {
  return `${cell.cf}/${cell.bf}/${cell.bc}`;
}

/** Count instances per (mode, platform, level) and in the totals column. */
function instanceCounts(instances: InstanceRow[]): Map<string, number> {
  const counts = new Map<string, number>();
  for (const row of instances) {
    for (const level of [String(row.level), "total"]) {
      const key = `${row.mode}|${row.platform}|${level}`;
      counts.set(key, (counts.get(key) ?? 0) + 1);
    }
  }
  return counts;
}

export function buildGrid(report: ReportPayload, instances: InstanceRow[]): GridModel {
  const totals = instanceCounts(instances);
  const levels = new Set<number>();
  const rowKeys = new Set<string>();
  for (const row of instances) {
    levels.add(row.level);
    rowKeys.add(`${row.mode}|${row.platform}`);
  }
  for (const [mode, platforms] of Object.entries(report.modes)) {
    for (const [platform, cells] of Object.entries(platforms)) {
      rowKeys.add(`${mode}|${platform}`);
      for (const level of Object.keys(cells)) {
        if (level !== "total") levels.add(Number(level));
      }
    }
  }

  const orderedLevels = [...levels].sort((a, b) => a - b);
  const rows: GridRow[] = [...rowKeys]
    .map((key) => key.split("|") as [string, string])
    .sort(compareRows)
    .map(([mode, platform]) => {
      const cells: GridCellView[] = [];
      for (const level of [...orderedLevels, "total" as const]) {
        const reported = report.modes[mode]?.[platform]?.[String(level)];
        const counted = (reported?.cf ?? 0) + (reported?.bf ?? 0) + (reported?.bc ?? 0);
        const known = totals.get(`${mode}|${platform}|${String(level)}`) ?? counted;
        cells.push({
          mode,
          platform,
          level,
          cf: reported?.cf ?? 0,
          bf: reported?.bf ?? 0,
          bc: reported?.bc ?? 0,
          pending: Math.max(0, known - counted),
        });
      }
      return { mode, platform, cells };
    });

  return { k: report.k, seq: report.seq ?? 0, levels: orderedLevels, rows };
}

function escapeHtml(raw: string): string {
  return raw.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function renderGridHtml(model: GridModel): string {
  const headers = ["Skills", "Platform", ...model.levels.map((l) => `L${l}`), "Total"];
  const head = `<tr>${headers.map((h) => `<th>${escapeHtml(h)}</th>`).join("")}</tr>`;
  const body = model.rows
    .map((row) => {
      const label =
        `<td>${escapeHtml(MODE_DISPLAY[row.mode] ?? row.mode)}</td>` +
        `<td>${escapeHtml(PLATFORM_DISPLAY[row.platform] ?? row.platform)}</td>`;
      const cells = row.cells
        .map((cell) => {
          const badge = cell.pending > 0 ? ` <span class="pending">${cell.pending} pending</span>` : "";
          return `<td data-cell="${cell.mode}|${cell.platform}|${cell.level}">${formatCell(cell)}${badge}</td>`;
        })
        .join("");
      return `<tr>${label}${cells}</tr>`;
    })
    .join("");
  return `<table class="grid" data-seq="${model.seq}" data-k="${model.k}">${head}${body}</table>`;
}
