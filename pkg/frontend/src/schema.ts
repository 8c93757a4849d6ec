/**
 * Input contracts for plotkit: the planner's plan.json and trajectory.csv.
 *
 * Both loaders fail loudly. The CSV check names every missing column so a
 * schema drift on the producer side is diagnosable from the error alone.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";
import { z } from "zod";

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

const point = z.tuple([z.number(), z.number()]);

const regionAgentInfo = z.object({
  initial: z.boolean(),
  secret: z.boolean(),
  observation: z.string(),
  labels: z.array(z.string()),
});

const regionGeometry = z.object({
  vertices: z.array(z.array(z.number()).min(2)).min(3),
  agents: z.record(z.string(), regionAgentInfo),
});

const geometry = z.object({
  workspace: z.tuple([z.array(z.number()).min(2), z.array(z.number()).min(2)]),
  regions: z.record(z.string(), regionGeometry),
});

export const planSchema = z.object({
  scenario: z.string(),
  security: z.string(),
  suffix_repeats: z.number().int().positive(),
  suffix_start_time: z.number().nonnegative(),
  suffix_period: z.number().positive(),
  geometry,
});

export type Plan = z.infer<typeof planSchema>;
export type RegionGeometry = z.infer<typeof regionGeometry>;

export function loadPlan(path: string): Plan {
  let doc: unknown;
  try {
    doc = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new SchemaError(`cannot read plan file ${path}: ${err}`);
  }
  const parsed = planSchema.safeParse(doc);
  if (!parsed.success) {
    const fields = parsed.error.issues
      .map((i) => (i.path.length ? i.path.join(".") : "(root)"))
      .join(", ");
    throw new SchemaError(`plan file ${path} does not match the expected schema; bad fields: ${fields}`);
  }
  return parsed.data;
}

export interface Sample {
  time: number;
  agentId: string;
  role: "real" | "copy";
  x: [number, number];
  regionId: string;
  observation: string;
  isSecret: boolean;
}

export const REQUIRED_COLUMNS = [
  "time", "agent_id", "role", "x1", "x2",
  "region_id", "observation", "is_secret",
] as const;

export function parseTrajectory(csvText: string): Sample[] {
  const parsed = Papa.parse<Record<string, string>>(csvText.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0]!;
    throw new SchemaError(`trajectory CSV is malformed: ${first.message} (row ${first.row})`);
  }
  const columns = parsed.meta.fields ?? [];
  const missing = REQUIRED_COLUMNS.filter((c) => !columns.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(`trajectory CSV is missing required columns: ${missing.join(", ")}`);
  }

  return parsed.data.map((row, i) => {
    const num = (col: string): number => {
      const v = Number(row[col]);
      if (!Number.isFinite(v)) {
        throw new SchemaError(`trajectory CSV row ${i + 1}: column "${col}" is not numeric (got ${JSON.stringify(row[col])})`);
      }
      return v;
    };
    const role = row["role"];
    if (role !== "real" && role !== "copy") {
      throw new SchemaError(`trajectory CSV row ${i + 1}: column "role" must be "real" or "copy" (got ${JSON.stringify(role)})`);
    }
    return {
      time: num("time"),
      agentId: row["agent_id"] ?? "",
      role,
      x: [num("x1"), num("x2")],
      regionId: row["region_id"] ?? "",
      observation: row["observation"] ?? "",
      isSecret: num("is_secret") !== 0,
    };
  });
}

export function loadTrajectory(path: string): Sample[] {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new SchemaError(`cannot read trajectory file ${path}: ${err}`);
  }
  return parseTrajectory(text);
}
