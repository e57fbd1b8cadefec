import fs from "fs";
import path from "path";

import {
  divergingColor,
  LINE_COLORS,
  sequentialColor,
  toHex,
} from "./colormap.js";
import {
  numericColumn,
  readTable,
  requireHeader,
  SchemaError,
  stringColumn,
  Table,
} from "./csv.js";
import { FigureRecipe, RecipeInput } from "./recipe.js";
import {
  colorbar,
  document as svgDocument,
  esc,
  Frame,
  frameBox,
  heatmapCells,
  legend,
  panelTitle,
  polyline,
  Scale,
  xAxis,
  yAxis,
} from "./svg.js";

const QUENCH_HEADER = [
  "t",
  "f",
  "occupation",
  "qfi",
  "negativity",
  "mutual_info",
  "min_variance",
];
const QUANTITIES = [
  "gap",
  "occupation",
  "qfi",
  "negativity",
  "mutual_info",
  "min_variance",
];
const WIGNER_HEADER = ["x", "p", "w"];

const QUANTITY_TITLES: Record<string, string> = {
  gap: "energy gap",
  occupation: "dressed occupation",
  qfi: "Fisher information",
  negativity: "negativity witness",
  mutual_info: "mutual information",
  min_variance: "min quadrature variance",
};

interface GridIndex {
  /** Ascending coordinate values. */
  xs: number[];
  ys: number[];
  /** Row number for cell (i, j), i indexing xs and j indexing ys. */
  row: (i: number, j: number) => number;
}

/**
 * Interprets two columns as the axes of a dense rectangular grid, in any row
 * order. Cells are matched on the exact serialized text, which the writer
 * keeps canonical, so no float-key fuzziness is needed.
 */
function gridIndex(table: Table, xName: string, yName: string): GridIndex {
  const xRaw = stringColumn(table, xName);
  const yRaw = stringColumn(table, yName);
  const byValue = (raws: string[]) =>
    [...new Set(raws)]
      .map((raw) => ({ raw, num: Number(raw) }))
      .sort((a, b) => a.num - b.num);
  const xu = byValue(xRaw);
  const yu = byValue(yRaw);
  if (xu.length * yu.length !== table.rows.length) {
    throw new SchemaError(
      `${table.path}: ${table.rows.length} rows do not fill a ${xu.length} x ${yu.length} ${xName}/${yName} grid`
    );
  }
  const lookup = new Map<string, number>();
  for (let r = 0; r < table.rows.length; ++r) {
    lookup.set(`${xRaw[r]},${yRaw[r]}`, r);
  }
  if (lookup.size !== table.rows.length) {
    throw new SchemaError(`${table.path}: duplicate ${xName}/${yName} grid points`);
  }
  return {
    xs: xu.map((e) => e.num),
    ys: yu.map((e) => e.num),
    row: (i, j) => lookup.get(`${xu[i].raw},${yu[j].raw}`)!,
  };
}

function finiteRange(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo > hi) return [0, 1];
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  return [lo, hi];
}

// ---------------------------------------------------------------------------
// phase_heatmaps: one panel per ground-state quantity on the (g, omega_c) grid
// ---------------------------------------------------------------------------

/** Phase CSV carries a canonical-order subset of quantity columns. */
function phaseQuantities(table: Table): string[] {
  const got = table.header;
  const fixed = (i: number, want: string) => {
    if (got[i] !== want) {
      throw new SchemaError(
        `${table.path}: column ${i + 1} is "${got[i] ?? "(missing)"}", expected "${want}"`
      );
    }
  };
  fixed(0, "g");
  fixed(1, "omega_c");
  if (got.length < 5) {
    throw new SchemaError(`${table.path}: too few columns for a sweep file`);
  }
  fixed(got.length - 2, "converged");
  fixed(got.length - 1, "flag_reason");
  const middle = got.slice(2, -2);
  let cursor = 0;
  for (const name of middle) {
    const k = QUANTITIES.indexOf(name);
    if (k < 0 || k < cursor) {
      throw new SchemaError(`${table.path}: unexpected column "${name}"`);
    }
    cursor = k + 1;
  }
  return middle;
}

function renderPhaseHeatmaps(recipe: FigureRecipe): string {
  const table = readTable(recipe.inputs[0].path);
  const quantities = phaseQuantities(table);
  const grid = gridIndex(table, "g", "omega_c");
  const gs = grid.xs;
  const wcs = grid.ys;
  const converged = stringColumn(table, "converged").map((v) => v === "true");

  const cols = Math.min(3, quantities.length);
  const rows = Math.ceil(quantities.length / cols);
  const pw = 200;
  const ph = 170;
  const gapX = 92;
  const gapY = 58;
  const ml = 58;
  const mt = 40;
  const W = ml + cols * (pw + gapX);
  const H = mt + rows * (ph + gapY);

  let body = "";
  if (recipe.title) {
    body += `<text x="${W / 2}" y="16" text-anchor="middle" font-size="11" font-weight="600" fill="#222">${esc(recipe.title)}</text>\n`;
  }
  quantities.forEach((q, k) => {
    const col = k % cols;
    const row = Math.floor(k / cols);
    const f: Frame = {
      x: ml + col * (pw + gapX),
      y: mt + row * (ph + gapY),
      w: pw,
      h: ph,
    };
    const values = numericColumn(table, q);
    const [lo, hi] = finiteRange(values.filter((_, i) => converged[i]));
    body += heatmapCells(f, gs.length, wcs.length, (i, j) => {
      const idx = grid.row(i, j);
      if (!converged[idx] || !Number.isFinite(values[idx])) return null;
      return sequentialColor(values[idx], lo, hi);
    });
    body += frameBox(f);
    body += panelTitle(f, QUANTITY_TITLES[q] ?? q);
    const scale = new Scale(
      f,
      [gs[0], gs[gs.length - 1]],
      [wcs[0], wcs[wcs.length - 1]]
    );
    body += xAxis(scale, "coupling g", 4);
    body += yAxis(scale, "cavity frequency", 4);
    body += colorbar(
      { x: f.x + f.w + 8, y: f.y, w: 10, h: f.h },
      (t) => sequentialColor(t, lo, hi),
      lo,
      hi,
      q
    );
  });
  return svgDocument(W, H, body);
}

// ---------------------------------------------------------------------------
// quench_panels: waterfall of f(t) over the quench grid plus series panels
// ---------------------------------------------------------------------------

interface QuenchData {
  input: RecipeInput;
  t: number[];
  series: Record<string, number[]>;
}

function readQuench(input: RecipeInput): QuenchData {
  const table = readTable(input.path);
  requireHeader(table, QUENCH_HEADER);
  const series: Record<string, number[]> = {};
  for (const name of QUENCH_HEADER.slice(1)) {
    series[name] = numericColumn(table, name);
  }
  return { input, t: numericColumn(table, "t"), series };
}

function seriesPanels(
  runs: QuenchData[],
  xlim: [number, number],
  top: number,
  withLegend: boolean
): { body: string; height: number } {
  const pw = 200;
  const ph = 120;
  const gapX = 64;
  const gapY = 52;
  const ml = 58;
  const names = QUENCH_HEADER.slice(1);
  let body = "";
  names.forEach((name, k) => {
    const col = k % 3;
    const row = Math.floor(k / 3);
    const f: Frame = {
      x: ml + col * (pw + gapX),
      y: top + row * (ph + gapY),
      w: pw,
      h: ph,
    };
    let lo = Infinity;
    let hi = -Infinity;
    for (const run of runs) {
      const [a, b] = finiteRange(run.series[name]);
      lo = Math.min(lo, a);
      hi = Math.max(hi, b);
    }
    if (lo === hi) {
      lo -= 0.5;
      hi += 0.5;
    }
    const pad = 0.06 * (hi - lo);
    const scale = new Scale(f, xlim, [lo - pad, hi + pad]);
    body += frameBox(f);
    body += panelTitle(f, QUANTITY_TITLES[name] ?? name);
    runs.forEach((run, r) => {
      body += polyline(scale, run.t, run.series[name], LINE_COLORS[r % LINE_COLORS.length]);
    });
    body += xAxis(scale, "t", 4);
    body += yAxis(scale, name === "f" ? "return rate" : "", 4);
    if (withLegend && k === 2) {
      body += legend(
        f,
        runs.map((run, r) => ({
          label: run.input.label,
          color: LINE_COLORS[r % LINE_COLORS.length],
        }))
      );
    }
  });
  return { body, height: top + 2 * (ph + gapY) };
}

const PANEL_PAGE_W = 58 + 3 * (200 + 64);

function renderQuenchPanels(recipe: FigureRecipe): string {
  const runs = recipe.inputs.map(readQuench);
  runs.sort((a, b) => (a.input.value ?? 0) - (b.input.value ?? 0));
  const xlim: [number, number] =
    recipe.xRange ?? finiteRange(runs.flatMap((r) => r.t));

  let body = "";
  let top = 40;
  if (recipe.title) {
    body += `<text x="${PANEL_PAGE_W / 2}" y="16" text-anchor="middle" font-size="11" font-weight="600" fill="#222">${esc(recipe.title)}</text>\n`;
  }

  if (runs.length >= 2) {
    // waterfall: one horizontal band of f(t) per run, stacked by value
    const f: Frame = { x: 58, y: top, w: 560, h: runs.length * 26 };
    let lo = Infinity;
    let hi = -Infinity;
    for (const run of runs) {
      const [a, b] = finiteRange(run.series.f);
      lo = Math.min(lo, a);
      hi = Math.max(hi, b);
    }
    const bandH = f.h / runs.length;
    runs.forEach((run, r) => {
      const y = f.y + f.h - (r + 1) * bandH;
      const n = run.t.length;
      for (let i = 0; i < n; ++i) {
        const v = run.series.f[i];
        if (!Number.isFinite(v)) continue;
        const x0 = f.x + ((run.t[Math.max(0, i - 1)] + run.t[i]) / 2 - xlim[0]) / (xlim[1] - xlim[0]) * f.w;
        const x1 = f.x + ((run.t[Math.min(n - 1, i + 1)] + run.t[i]) / 2 - xlim[0]) / (xlim[1] - xlim[0]) * f.w;
        if (x1 < f.x || x0 > f.x + f.w) continue;
        body += `<rect x="${x0.toFixed(2)}" y="${y.toFixed(2)}" width="${(x1 - x0 + 0.05).toFixed(2)}" height="${(bandH + 0.05).toFixed(2)}" fill="${toHex(sequentialColor(v, lo, hi))}"/>\n`;
      }
      body += `<text x="${f.x - 5}" y="${(y + bandH / 2 + 2.5).toFixed(1)}" text-anchor="end" font-size="7" fill="#555">${esc(run.input.label)}</text>\n`;
    });
    body += frameBox(f);
    body += panelTitle(f, "return rate waterfall");
    const scale = new Scale(f, xlim, [0, 1]);
    body += xAxis(scale, "t", 6);
    body += colorbar(
      { x: f.x + f.w + 8, y: f.y, w: 10, h: f.h },
      (t) => sequentialColor(t, lo, hi),
      lo,
      hi,
      "f"
    );
    top += f.h + 50;
  }

  const panels = seriesPanels(runs, xlim, top, runs.length > 1);
  body += panels.body;
  return svgDocument(PANEL_PAGE_W, panels.height, body);
}

function renderTemperaturePanels(recipe: FigureRecipe): string {
  const runs = recipe.inputs.map(readQuench);
  runs.sort((a, b) => (a.input.value ?? 0) - (b.input.value ?? 0));
  const xlim: [number, number] =
    recipe.xRange ?? finiteRange(runs.flatMap((r) => r.t));
  let body = "";
  if (recipe.title) {
    body += `<text x="${PANEL_PAGE_W / 2}" y="16" text-anchor="middle" font-size="11" font-weight="600" fill="#222">${esc(recipe.title)}</text>\n`;
  }
  const panels = seriesPanels(runs, xlim, 40, true);
  body += panels.body;
  return svgDocument(PANEL_PAGE_W, panels.height, body);
}

// ---------------------------------------------------------------------------
// wigner: phase-space heatmap on a diverging scale with a zero contour
// ---------------------------------------------------------------------------

function renderWigner(recipe: FigureRecipe): string {
  const table = readTable(recipe.inputs[0].path);
  requireHeader(table, WIGNER_HEADER);
  const w = numericColumn(table, "w");
  const grid = gridIndex(table, "x", "p");
  const xs = grid.xs;
  const ps = grid.ys;
  const nx = xs.length;
  const np = ps.length;
  const at = (i: number, j: number) => w[grid.row(i, j)];

  const [lo, hi] = finiteRange(w);
  const f: Frame = { x: 66, y: 40, w: 360, h: 360 };
  let body = "";
  body += heatmapCells(f, nx, np, (i, j) =>
    Number.isFinite(at(i, j)) ? divergingColor(at(i, j), lo, hi) : null
  );

  // zero contour: mark edges between cells of opposite sign
  const cw = f.w / nx;
  const ch = f.h / np;
  const floor = 1e-12;
  let contour = "";
  for (let i = 0; i < nx; ++i) {
    for (let j = 0; j < np; ++j) {
      const a = at(i, j);
      if (!(Math.abs(a) > floor)) continue;
      if (i + 1 < nx) {
        const b = at(i + 1, j);
        if (Math.abs(b) > floor && Math.sign(a) !== Math.sign(b)) {
          const x = f.x + (i + 1) * cw;
          const y = f.y + f.h - (j + 1) * ch;
          contour += `M${x.toFixed(2)} ${y.toFixed(2)}v${ch.toFixed(2)}`;
        }
      }
      if (j + 1 < np) {
        const b = at(i, j + 1);
        if (Math.abs(b) > floor && Math.sign(a) !== Math.sign(b)) {
          const x = f.x + i * cw;
          const y = f.y + f.h - (j + 1) * ch;
          contour += `M${x.toFixed(2)} ${y.toFixed(2)}h${cw.toFixed(2)}`;
        }
      }
    }
  }
  if (contour.length > 0) {
    body += `<path d="${contour}" stroke="#333" stroke-width="0.4" fill="none" opacity="0.6"/>\n`;
  }

  body += frameBox(f);
  body += panelTitle(f, recipe.title ?? "Wigner function");
  const scale = new Scale(f, [xs[0], xs[nx - 1]], [ps[0], ps[np - 1]]);
  body += xAxis(scale, "x quadrature", 5);
  body += yAxis(scale, "p quadrature", 5);
  body += colorbar(
    { x: f.x + f.w + 10, y: f.y, w: 12, h: f.h },
    (t) => divergingColor(t, lo, hi),
    lo,
    hi,
    "W(x, p)"
  );
  return svgDocument(520, 450, body);
}

// ---------------------------------------------------------------------------

/**
 * Renders a recipe to its output SVG and returns the output path. Pure with
 * respect to the inputs: the CSV files are only ever read, and the produced
 * bytes depend on nothing but the recipe and file contents.
 */
export function render(recipe: FigureRecipe): string {
  let svg: string;
  switch (recipe.kind) {
    case "phase_heatmaps":
      svg = renderPhaseHeatmaps(recipe);
      break;
    case "quench_panels":
      svg = renderQuenchPanels(recipe);
      break;
    case "temperature_panels":
      svg = renderTemperaturePanels(recipe);
      break;
    case "wigner":
      svg = renderWigner(recipe);
      break;
  }
  fs.mkdirSync(path.dirname(recipe.output), { recursive: true });
  fs.writeFileSync(recipe.output, svg);
  return recipe.output;
}
