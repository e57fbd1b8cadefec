#!/usr/bin/env node
import { pathToFileURL } from "url";

import { SchemaError } from "./csv.js";
import { render } from "./figures.js";
import { loadRecipe, RecipeError } from "./recipe.js";

const USAGE = "usage: render --recipe <path.json>";

export function main(argv: string[]): number {
  if (argv[0] !== "render") {
    console.error(USAGE);
    return 2;
  }
  let recipePath: string | null = null;
  for (let i = 1; i < argv.length; ++i) {
    if (argv[i] === "--recipe") {
      recipePath = argv[i + 1] ?? null;
      ++i;
    } else {
      console.error(`unknown argument: ${argv[i]}\n${USAGE}`);
      return 2;
    }
  }
  if (recipePath === null) {
    console.error(USAGE);
    return 2;
  }
  try {
    const out = render(loadRecipe(recipePath));
    console.log(out);
    return 0;
  } catch (err) {
    if (err instanceof RecipeError || err instanceof SchemaError) {
      console.error(`${err.name}: ${err.message}`);
      return 2;
    }
    console.error(String(err));
    return 1;
  }
}

const entry = process.argv[1];
if (entry !== undefined && import.meta.url === pathToFileURL(entry).href) {
  process.exit(main(process.argv.slice(2)));
}
