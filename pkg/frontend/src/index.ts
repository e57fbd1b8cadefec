export { SchemaError, readTable, requireHeader, numericColumn, stringColumn } from "./csv.js";
export type { Table } from "./csv.js";
export { divergingColor, sequentialColor, toHex, LINE_COLORS } from "./colormap.js";
export type { Rgb } from "./colormap.js";
export { RecipeError, FIGURE_KINDS, parseRecipe, loadRecipe } from "./recipe.js";
export type { FigureKind, FigureRecipe, RecipeInput } from "./recipe.js";
export { render } from "./figures.js";
