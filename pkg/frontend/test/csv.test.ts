import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { test } from "node:test";

import { extractSeries, parseCsv, parseNumber, requireColumns } from "../src/csv";

const FIXTURES = join(__dirname, "..", "..", "test", "fixtures");

const SWEEP_COLUMNS = [
  "sweep_var",
  "lambda1",
  "log_h_bits",
  "hmin_bits",
  "leak_ir_bits",
  "pa_penalty_bits",
  "net_key_bits",
  "rate_per_symbol",
  "eta",
  "f_meas",
  "error",
];

test("fixture carries the exact producer schema", () => {
  const table = parseCsv(readFileSync(join(FIXTURES, "rate_sweep.csv"), "utf8"));
  assert.deepEqual(table.header, SWEEP_COLUMNS);
  assert.equal(table.rows.length, 6);
});

test("fixture data series match frozen producer values", () => {
  // spot values copied verbatim from the producer CSV; any drift in either
  // side breaks this test (the producer repo asserts byte equality too)
  const table = parseCsv(readFileSync(join(FIXTURES, "rate_sweep.csv"), "utf8"));
  const first = table.rows[0];
  assert.equal(first["sweep_var"], "0.95");
  assert.equal(first["f_meas"], "0.7137455711397092");
  assert.equal(first["eta"], "0.0");
  assert.equal(first["error"], "");
  const { series } = extractSeries(table, "sweep_var", ["f_meas"]);
  assert.equal(series[0].x.length, 6);
  assert.ok(Math.abs(series[0].y[0] - 0.7137455711397092) < 1e-15);
});

test("error rows are skipped with a count", () => {
  const table = parseCsv(
    readFileSync(join(FIXTURES, "rate_sweep_with_errors.csv"), "utf8"),
  );
  assert.equal(table.rows.length, 3);
  const { series, skippedErrorRows } = extractSeries(table, "sweep_var", [
    "rate_per_symbol",
  ]);
  assert.equal(skippedErrorRows, 1);
  assert.equal(series[0].x.length, 2);
});

test("missing columns fail loudly", () => {
  const table = parseCsv("a,b\n1,2\n");
  assert.throws(() => requireColumns(table, ["sweep_var"]), /missing required columns/);
  assert.throws(
    () => extractSeries(table, "a", ["rate_per_symbol"]),
    /missing required columns: rate_per_symbol/,
  );
});

test("ragged rows are rejected", () => {
  assert.throws(() => parseCsv("a,b\n1,2,3\n"), /row 1 has 3 cells/);
});

test("all-error tables are rejected", () => {
  const text = SWEEP_COLUMNS.join(",") + "\n" + ["1.0", ...Array(9).fill("0"), "boom"].join(",") + "\n";
  assert.throws(() => extractSeries(parseCsv(text), "sweep_var", ["eta"]), /no usable data rows/);
});

test("producer float spellings parse", () => {
  assert.equal(parseNumber("inf"), Infinity);
  assert.equal(parseNumber("-inf"), -Infinity);
  assert.ok(Number.isNaN(parseNumber("nan")));
  assert.equal(parseNumber("6.757784657825480e+23"), 6.75778465782548e23);
  assert.throws(() => parseNumber("garbage"), /not numeric/);
});
