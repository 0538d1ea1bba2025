#!/usr/bin/env node
/**
 * CSV-to-figure command line tool:
 *
 *   hbsim-render render --csv results.csv --preset fig_rate_vs_snr --out fig.svg
 */
import { readFileSync, writeFileSync } from "fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { renderFigure } from "./figure.js";
import { FIGURE_PRESETS, presetSpec } from "./presets.js";
import { parseResultsCsv } from "./schema.js";

export function renderFile(csvPath: string, preset: string, outPath: string): void {
  const rows = parseResultsCsv(readFileSync(csvPath, "utf8"));
  const svg = renderFigure(rows, presetSpec(preset));
  writeFileSync(outPath, svg, "utf8");
}

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .command(
      "render",
      "render a result CSV as an SVG line chart",
      (cmd) =>
        cmd
          .option("csv", { type: "string", demandOption: true, describe: "input result CSV" })
          .option("preset", {
            type: "string",
            demandOption: true,
            choices: Object.keys(FIGURE_PRESETS),
            describe: "figure preset controlling axes",
          })
          .option("out", { type: "string", demandOption: true, describe: "output SVG path" }),
      (argv) => {
        try {
          renderFile(argv.csv, argv.preset, argv.out);
          console.log(`wrote ${argv.out}`);
        } catch (err) {
          console.error(`error: ${err instanceof Error ? err.message : err}`);
          process.exit(1);
        }
      },
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      console.error(`error: ${err ? err.message : msg}`);
      process.exit(1);
    })
    .parseAsync();
}

main();
