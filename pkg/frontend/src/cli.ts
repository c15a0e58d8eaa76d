#!/usr/bin/env node
/**
 * covertqkd-figures <rate|covertness|plot> --input report.csv --output figure.svg
 *
 * rate        render the rate-sweep schema (sweep_var -> rate_per_symbol)
 * covertness  render the covertness schema (ell -> lambda1, log_h_bits; log-log)
 * plot        generic: --x COL --y COL[,COL...] [--log-x] [--log-y]
 *
 * Exit codes: 0 ok, 2 schema/data error.
 */

import { renderCovertnessFigure, renderPlot, renderRateFigure } from "./plot";

interface Flags {
  [key: string]: string | boolean;
}

function parseArgs(argv: string[]): { command: string; flags: Flags } {
  if (argv.length === 0) {
    throw new Error("missing command: rate | covertness | plot");
  }
  const [command, ...rest] = argv;
  const flags: Flags = {};
  for (let i = 0; i < rest.length; i++) {
    const arg = rest[i];
    if (!arg.startsWith("--")) {
      throw new Error(`unexpected argument ${arg}`);
    }
    const name = arg.slice(2);
    if (name === "log-x" || name === "log-y") {
      flags[name] = true;
    } else {
      const value = rest[++i];
      if (value === undefined) {
        throw new Error(`flag --${name} needs a value`);
      }
      flags[name] = value;
    }
  }
  return { command, flags };
}

function requireFlag(flags: Flags, name: string): string {
  const v = flags[name];
  if (typeof v !== "string" || v === "") {
    throw new Error(`--${name} is required`);
  }
  return v;
}

export function main(argv: string[]): number {
  try {
    const { command, flags } = parseArgs(argv);
    const input = requireFlag(flags, "input");
    const output = requireFlag(flags, "output");
    let report;
    if (command === "rate") {
      report = renderRateFigure(input, output);
    } else if (command === "covertness") {
      report = renderCovertnessFigure(input, output);
    } else if (command === "plot") {
      report = renderPlot({
        inputCsv: input,
        outputImage: output,
        xColumn: requireFlag(flags, "x"),
        yColumns: requireFlag(flags, "y").split(","),
        logX: flags["log-x"] === true,
        logY: flags["log-y"] === true,
      });
    } else {
      throw new Error(`unknown command ${command}`);
    }
    process.stdout.write(
      `wrote ${output} (${report.pointCount} points, ` +
        `${report.skippedErrorRows} error rows skipped, ` +
        `${report.droppedPoints} non-finite points dropped)\n`,
    );
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${err instanceof Error ? err.message : err}\n`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
