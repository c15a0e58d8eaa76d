import assert from "node:assert/strict";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { test } from "node:test";

import { main } from "../src/cli";
import { renderCovertnessFigure, renderPlot, renderRateFigure } from "../src/plot";

const FIXTURES = join(__dirname, "..", "..", "test", "fixtures");
const workdir = mkdtempSync(join(tmpdir(), "covertqkd-figures-"));

test("rate figure renders from the producer CSV", () => {
  const out = join(workdir, "rate.svg");
  const report = renderRateFigure(join(FIXTURES, "rate_sweep.csv"), out);
  assert.equal(report.skippedErrorRows, 0);
  assert.equal(report.pointCount, 6);
  const svg = readFileSync(out, "utf8");
  assert.ok(svg.startsWith("<svg"));
  assert.equal((svg.match(/<polyline/g) ?? []).length, 1);
  assert.equal((svg.match(/<circle/g) ?? []).length, 6);
  assert.ok(svg.includes("key bits per PPM symbol"));
});

test("rate figure skips error rows and reports them", () => {
  const out = join(workdir, "rate-errors.svg");
  const report = renderRateFigure(join(FIXTURES, "rate_sweep_with_errors.csv"), out);
  assert.equal(report.skippedErrorRows, 1);
  assert.equal(report.pointCount, 2);
});

test("covertness figure renders two series on log axes", () => {
  const out = join(workdir, "covertness.svg");
  const report = renderCovertnessFigure(join(FIXTURES, "covertness.csv"), out);
  assert.equal(report.pointCount, 8); // 4 rows x 2 series
  const svg = readFileSync(out, "utf8");
  assert.equal((svg.match(/<polyline/g) ?? []).length, 2);
  assert.ok(svg.includes(">lambda1<"));
  assert.ok(svg.includes(">log_h_bits<"));
  assert.ok(svg.includes("1e")); // log-scale tick labels
});

test("schema mismatch fails loudly end to end", () => {
  const bad = join(workdir, "bad.csv");
  writeFileSync(bad, "a,b\n1,2\n");
  assert.throws(
    () => renderRateFigure(bad, join(workdir, "never.svg")),
    /missing required columns/,
  );
  const code = main(["rate", "--input", bad, "--output", join(workdir, "never.svg")]);
  assert.equal(code, 2);
});

test("rendering is deterministic", () => {
  const a = join(workdir, "det-a.svg");
  const b = join(workdir, "det-b.svg");
  renderRateFigure(join(FIXTURES, "rate_sweep.csv"), a);
  renderRateFigure(join(FIXTURES, "rate_sweep.csv"), b);
  assert.deepEqual(readFileSync(a), readFileSync(b));
});

test("generic plot command with multiple columns", () => {
  const out = join(workdir, "generic.svg");
  const code = main([
    "plot",
    "--input", join(FIXTURES, "rate_sweep.csv"),
    "--output", out,
    "--x", "sweep_var",
    "--y", "leak_ir_bits,f_meas",
  ]);
  assert.equal(code, 0);
  const svg = readFileSync(out, "utf8");
  assert.equal((svg.match(/<polyline/g) ?? []).length, 2);
});

test("log scale rejects nonpositive values", () => {
  const csv = join(workdir, "negative.csv");
  writeFileSync(csv, "ell,lambda1,log_h_bits\n1,-2,3\n10,4,5\n");
  assert.throws(
    () =>
      renderPlot({
        inputCsv: csv,
        outputImage: join(workdir, "never2.svg"),
        xColumn: "ell",
        yColumns: ["lambda1"],
        logY: true,
      }),
    /strictly positive/,
  );
});
