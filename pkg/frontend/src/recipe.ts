import fs from "fs";
import path from "path";

/** Recipe document is malformed or points at missing files. */
export class RecipeError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "RecipeError";
  }
}

export const FIGURE_KINDS = [
  "phase_heatmaps",
  "quench_panels",
  "temperature_panels",
  "wigner",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface RecipeInput {
  path: string;
  label: string;
  /** Numeric coordinate of this file (quench g0, temperature), if any. */
  value: number | null;
}

export interface FigureRecipe {
  kind: FigureKind;
  inputs: RecipeInput[];
  output: string;
  title: string | null;
  xRange: [number, number] | null;
}

function asRange(raw: unknown, field: string): [number, number] | null {
  if (raw === undefined) return null;
  if (
    !Array.isArray(raw) ||
    raw.length !== 2 ||
    typeof raw[0] !== "number" ||
    typeof raw[1] !== "number" ||
    !(raw[0] < raw[1])
  ) {
    throw new RecipeError(`${field}: expected [lo, hi] with lo < hi`);
  }
  return [raw[0], raw[1]];
}

function asInput(raw: unknown, field: string, baseDir: string): RecipeInput {
  let p: string;
  let label: string | undefined;
  let value: number | null = null;
  if (typeof raw === "string") {
    p = raw;
  } else if (raw !== null && typeof raw === "object" && !Array.isArray(raw)) {
    const obj = raw as Record<string, unknown>;
    for (const key of Object.keys(obj)) {
      if (key !== "path" && key !== "label" && key !== "value") {
        throw new RecipeError(`${field}.${key}: unknown key`);
      }
    }
    if (typeof obj.path !== "string" || obj.path.length === 0) {
      throw new RecipeError(`${field}.path: expected a file path`);
    }
    p = obj.path;
    if (obj.label !== undefined) {
      if (typeof obj.label !== "string") {
        throw new RecipeError(`${field}.label: expected a string`);
      }
      label = obj.label;
    }
    if (obj.value !== undefined) {
      if (typeof obj.value !== "number" || !Number.isFinite(obj.value)) {
        throw new RecipeError(`${field}.value: expected a finite number`);
      }
      value = obj.value;
    }
  } else {
    throw new RecipeError(`${field}: expected a path or {path, label, value}`);
  }
  const resolved = path.resolve(baseDir, p);
  return { path: resolved, label: label ?? path.basename(p), value };
}

/**
 * Validates a parsed recipe document. Relative paths are resolved against
 * `baseDir`, normally the directory holding the recipe file, so recipes can
 * travel with their data.
 */
export function parseRecipe(doc: unknown, baseDir: string): FigureRecipe {
  if (doc === null || typeof doc !== "object" || Array.isArray(doc)) {
    throw new RecipeError("recipe: expected a JSON object");
  }
  const obj = doc as Record<string, unknown>;
  const known = ["figure_kind", "inputs", "output", "title", "x_range"];
  for (const key of Object.keys(obj)) {
    if (!known.includes(key)) {
      throw new RecipeError(`${key}: unknown key`);
    }
  }

  const kind = obj.figure_kind;
  if (typeof kind !== "string" || !(FIGURE_KINDS as readonly string[]).includes(kind)) {
    throw new RecipeError(
      `figure_kind: expected one of ${FIGURE_KINDS.join(", ")}, got ${JSON.stringify(kind)}`
    );
  }

  if (!Array.isArray(obj.inputs) || obj.inputs.length === 0) {
    throw new RecipeError("inputs: expected a nonempty array");
  }
  const inputs = obj.inputs.map((raw, i) => asInput(raw, `inputs[${i}]`, baseDir));
  if ((kind === "wigner" || kind === "phase_heatmaps") && inputs.length !== 1) {
    throw new RecipeError(`inputs: ${kind} takes exactly one file, got ${inputs.length}`);
  }
  for (const inp of inputs) {
    if (!fs.existsSync(inp.path)) {
      throw new RecipeError(`inputs: no such file ${inp.path}`);
    }
  }

  if (typeof obj.output !== "string" || obj.output.length === 0) {
    throw new RecipeError("output: expected a file path");
  }
  const output = path.resolve(baseDir, obj.output);

  let title: string | null = null;
  if (obj.title !== undefined) {
    if (typeof obj.title !== "string") {
      throw new RecipeError("title: expected a string");
    }
    title = obj.title;
  }

  return {
    kind: kind as FigureKind,
    inputs,
    output,
    title,
    xRange: asRange(obj.x_range, "x_range"),
  };
}

/** Reads and validates a recipe file. */
export function loadRecipe(recipePath: string): FigureRecipe {
  let text: string;
  try {
    text = fs.readFileSync(recipePath, "utf-8");
  } catch (err) {
    throw new RecipeError(`cannot read ${recipePath}: ${(err as Error).message}`);
  }
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new RecipeError(`${recipePath}: ${(err as Error).message}`);
  }
  return parseRecipe(doc, path.dirname(path.resolve(recipePath)));
}
