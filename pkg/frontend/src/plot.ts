/**
 * PlotSpec: a declarative CSV-to-SVG transform.
 *
 * These renderers never recompute physics; they only reshape the delimited
 * report data into figures. Referenced columns must exist in the header and
 * at least one usable data row must survive error-row filtering, otherwise
 * rendering throws.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { extractSeries, parseCsv } from "./csv";
import { renderLineChart } from "./svg";

export interface PlotSpec {
  inputCsv: string;
  xColumn: string;
  yColumns: string[];
  outputImage: string;
  xLabel?: string;
  yLabel?: string;
  title?: string;
  logX?: boolean;
  logY?: boolean;
}

export interface RenderReport {
  skippedErrorRows: number;
  droppedPoints: number;
  pointCount: number;
}

export function renderPlot(spec: PlotSpec): RenderReport {
  if (spec.yColumns.length === 0) {
    throw new Error("at least one y column is required");
  }
  const table = parseCsv(readFileSync(spec.inputCsv, "utf8"));
  const { series, skippedErrorRows, droppedPoints } = extractSeries(
    table,
    spec.xColumn,
    spec.yColumns,
  );
  const svg = renderLineChart(series, {
    xLabel: spec.xLabel ?? spec.xColumn,
    yLabel: spec.yLabel ?? spec.yColumns.join(", "),
    title: spec.title,
    logX: spec.logX,
    logY: spec.logY,
  });
  writeFileSync(spec.outputImage, svg);
  return {
    skippedErrorRows,
    droppedPoints,
    pointCount: series.reduce((acc, s) => acc + s.x.length, 0),
  };
}

/** Per-symbol key rate against the sweep variable (rate-sweep CSV schema). */
export function renderRateFigure(
  inputCsv: string,
  outputImage: string,
  yColumn = "rate_per_symbol",
): RenderReport {
  return renderPlot({
    inputCsv,
    xColumn: "sweep_var",
    yColumns: [yColumn],
    outputImage,
    xLabel: "sweep variable",
    yLabel: "key bits per PPM symbol",
    title: "Achievable key bits per PPM symbol",
  });
}

/** Covertness budget components against the sub-block count (covertness CSV schema). */
export function renderCovertnessFigure(
  inputCsv: string,
  outputImage: string,
): RenderReport {
  return renderPlot({
    inputCsv,
    xColumn: "ell",
    yColumns: ["lambda1", "log_h_bits"],
    outputImage,
    xLabel: "sub-blocks",
    yLabel: "lambda1 / coordination bits",
    title: "Covertness budget vs block count",
    logX: true,
    logY: true,
  });
}
