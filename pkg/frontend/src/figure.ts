/**
 * Per-agent SVG workspace figures.
 *
 * One figure per agent: the workspace rectangle, region outlines shaded by
 * role (initial green, secret red, obstacle gray), region and observation
 * labels, the real trajectory solid, the companion ("copy") trajectory
 * dashed, and the suffix cycle of the real trajectory highlighted.
 */

import type { Plan, Sample } from "./schema.js";
import { SchemaError } from "./schema.js";

export interface FigureOptions {
  /** Label marking a region as an obstacle / no-go zone. */
  obstacleLabel: string;
  /** Pixels per workspace unit. */
  scale: number;
  /** Highlight the suffix cycle of the real trajectory. */
  highlightSuffix: boolean;
}

export const DEFAULT_OPTIONS: FigureOptions = {
  obstacleLabel: "obs",
  scale: 90,
  highlightSuffix: true,
};

const COLORS = {
  initial: "#bbf7d0",
  secret: "#fecaca",
  obstacle: "#d1d5db",
  plain: "#ffffff",
  outline: "#374151",
  real: "#1d4ed8",
  copy: "#ea580c",
  suffix: "#fbbf24",
};

const MARGIN = 40;
const POSITION_TOL = 1e-6;

const fmt = (v: number): string => {
  const s = v.toFixed(3);
  return s.replace(/\.?0+$/, "") || "0";
};

interface Box {
  lo: [number, number];
  hi: [number, number];
}

function workspaceBox(plan: Plan): Box {
  const [lo, hi] = plan.geometry.workspace;
  return { lo: [lo[0]!, lo[1]!], hi: [hi[0]!, hi[1]!] };
}

/** Every sample must sit inside the drawn workspace rectangle. */
export function checkSamplesInWorkspace(plan: Plan, samples: Sample[]): void {
  const { lo, hi } = workspaceBox(plan);
  for (const s of samples) {
    const [x, y] = s.x;
    if (x < lo[0] - POSITION_TOL || x > hi[0] + POSITION_TOL ||
        y < lo[1] - POSITION_TOL || y > hi[1] + POSITION_TOL) {
      throw new SchemaError(
        `sample for ${s.agentId} (${s.role}) at t=${s.time} lies outside the workspace: (${x}, ${y})`);
    }
  }
}

function regionFill(plan: Plan, regionId: string, agentId: string,
                    opts: FigureOptions): string {
  const info = plan.geometry.regions[regionId]?.agents[agentId];
  if (!info) return COLORS.plain;
  if (info.labels.includes(opts.obstacleLabel)) return COLORS.obstacle;
  if (info.secret) return COLORS.secret;
  if (info.initial) return COLORS.initial;
  return COLORS.plain;
}

function centroid(vertices: number[][]): [number, number] {
  let cx = 0, cy = 0;
  for (const v of vertices) { cx += v[0]!; cy += v[1]!; }
  return [cx / vertices.length, cy / vertices.length];
}

function polylinePoints(samples: Sample[], toPx: (p: [number, number]) => [number, number]): string {
  return samples
    .map((s) => toPx(s.x))
    .map(([px, py]) => `${fmt(px)},${fmt(py)}`)
    .join(" ");
}

/** Render one agent's figure; returns the SVG document text. */
export function renderAgentFigure(plan: Plan, samples: Sample[],
                                  agentId: string,
                                  options: Partial<FigureOptions> = {}): string {
  const opts = { ...DEFAULT_OPTIONS, ...options };
  const mine = samples.filter((s) => s.agentId === agentId);
  if (mine.length === 0) {
    throw new SchemaError(`trajectory has no samples for agent ${JSON.stringify(agentId)}`);
  }
  checkSamplesInWorkspace(plan, mine);

  const { lo, hi } = workspaceBox(plan);
  const width = (hi[0] - lo[0]) * opts.scale + 2 * MARGIN;
  const height = (hi[1] - lo[1]) * opts.scale + 2 * MARGIN;
  // y flips: workspace coordinates go up, SVG coordinates go down
  const toPx = ([x, y]: [number, number]): [number, number] => [
    MARGIN + (x - lo[0]) * opts.scale,
    height - MARGIN - (y - lo[1]) * opts.scale,
  ];

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${fmt(width)}" height="${fmt(height)}" viewBox="0 0 ${fmt(width)} ${fmt(height)}">`);
  parts.push(`<rect width="${fmt(width)}" height="${fmt(height)}" fill="#ffffff"/>`);

  // regions, shaded per this agent's roles
  for (const [rid, region] of Object.entries(plan.geometry.regions)) {
    const pts = region.vertices
      .map((v) => toPx([v[0]!, v[1]!]))
      .map(([px, py]) => `${fmt(px)},${fmt(py)}`)
      .join(" ");
    const fill = regionFill(plan, rid, agentId, opts);
    parts.push(`<polygon points="${pts}" fill="${fill}" stroke="${COLORS.outline}" stroke-width="1"/>`);
    const [cx, cy] = toPx(centroid(region.vertices));
    const info = region.agents[agentId];
    parts.push(`<text x="${fmt(cx)}" y="${fmt(cy)}" font-size="14" text-anchor="middle" fill="#111827">${rid}</text>`);
    if (info) {
      parts.push(`<text x="${fmt(cx)}" y="${fmt(cy + 15)}" font-size="10" text-anchor="middle" fill="#6b7280">${info.observation}</text>`);
    }
  }

  // workspace rectangle on top of the region fills
  const [wx, wy] = toPx([lo[0], hi[1]]);
  parts.push(`<rect x="${fmt(wx)}" y="${fmt(wy)}" width="${fmt((hi[0] - lo[0]) * opts.scale)}" height="${fmt((hi[1] - lo[1]) * opts.scale)}" fill="none" stroke="#111827" stroke-width="2"/>`);

  // suffix-cycle highlight under the trajectory proper
  const real = mine.filter((s) => s.role === "real");
  if (opts.highlightSuffix && real.length > 0) {
    const t0 = plan.suffix_start_time;
    const t1 = t0 + plan.suffix_period;
    const cycle = real.filter((s) => s.time >= t0 - POSITION_TOL && s.time <= t1 + POSITION_TOL);
    if (cycle.length > 1) {
      parts.push(`<polyline points="${polylinePoints(cycle, toPx)}" fill="none" stroke="${COLORS.suffix}" stroke-width="7" stroke-opacity="0.6"/>`);
    }
  }

  const copy = mine.filter((s) => s.role === "copy");
  if (copy.length > 1) {
    parts.push(`<polyline points="${polylinePoints(copy, toPx)}" fill="none" stroke="${COLORS.copy}" stroke-width="1.5" stroke-dasharray="6 4"/>`);
  }
  if (real.length > 1) {
    parts.push(`<polyline points="${polylinePoints(real, toPx)}" fill="none" stroke="${COLORS.real}" stroke-width="2"/>`);
  }
  const start = real[0] ?? mine[0]!;
  const [sx, sy] = toPx(start.x);
  parts.push(`<circle cx="${fmt(sx)}" cy="${fmt(sy)}" r="4" fill="${COLORS.real}"/>`);

  parts.push(`<text x="${fmt(MARGIN)}" y="${fmt(MARGIN - 14)}" font-size="16" fill="#111827">${plan.scenario}: ${agentId} (real${copy.length > 0 ? " + copy" : ""})</text>`);
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export function agentIds(samples: Sample[]): string[] {
  return [...new Set(samples.map((s) => s.agentId))].sort();
}
