import { readFileSync } from "node:fs";
import { z } from "zod";

export const plotSpecSchema = z
  .object({
    kind: z.enum(["snapshot", "error_series", "spectrum", "rate_series"]),
    inputs: z.array(z.string()).min(1),
    output: z.string(),
    title: z.string().optional(),
    labels: z.array(z.string()).optional(),
    width: z.number().int().positive().default(720),
    height: z.number().int().positive().default(460),
    log_y: z.boolean().optional(),
  })
  .strict();

export type PlotSpec = z.infer<typeof plotSpecSchema>;

export function loadPlotSpec(path: string): PlotSpec {
  let parsed: unknown;
  try {
    parsed = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new Error(`${path}: unreadable plot spec (${(err as Error).message})`);
  }
  const result = plotSpecSchema.safeParse(parsed);
  if (!result.success) {
    const issue = result.error.issues[0];
    throw new Error(`${path}: invalid plot spec: ${issue.path.join(".")}: ${issue.message}`);
  }
  return result.data;
}
