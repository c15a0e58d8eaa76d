/**
 * Strict CSV handling for the covertqkd report schemas.
 *
 * The producer never quotes fields or embeds commas (error messages have
 * commas replaced), so splitting on commas is exact. Schema mismatches throw.
 */

export interface Table {
  header: string[];
  rows: Record<string, string>[];
}

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV: no header row");
  }
  const header = lines[0].split(",");
  const rows: Record<string, string>[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new Error(
        `row ${i} has ${cells.length} cells, header has ${header.length}`,
      );
    }
    const row: Record<string, string> = {};
    header.forEach((name, col) => {
      row[name] = cells[col];
    });
    rows.push(row);
  }
  return { header, rows };
}

export function requireColumns(table: Table, columns: string[]): void {
  const missing = columns.filter((c) => !table.header.includes(c));
  if (missing.length > 0) {
    throw new Error(`missing required columns: ${missing.join(", ")}`);
  }
}

/** Parse the producer's float repr, including inf/-inf/nan spellings. */
export function parseNumber(cell: string): number {
  const t = cell.trim();
  if (t === "inf") return Infinity;
  if (t === "-inf") return -Infinity;
  if (t === "nan") return NaN;
  if (t === "") return NaN;
  const v = Number(t);
  if (Number.isNaN(v)) {
    throw new Error(`cell ${JSON.stringify(cell)} is not numeric`);
  }
  return v;
}

export interface ExtractResult {
  series: Series[];
  /** rows skipped because their error column was nonempty */
  skippedErrorRows: number;
  /** points dropped because x or y was not finite */
  droppedPoints: number;
}

/**
 * Pull (x, y) series out of a table, skipping rows flagged in the error
 * column and dropping non-finite points. Throws when nothing usable remains.
 */
export function extractSeries(
  table: Table,
  xColumn: string,
  yColumns: string[],
): ExtractResult {
  requireColumns(table, [xColumn, ...yColumns]);
  const hasError = table.header.includes("error");
  let skipped = 0;
  let dropped = 0;
  const series: Series[] = yColumns.map((name) => ({ label: name, x: [], y: [] }));
  for (const row of table.rows) {
    if (hasError && row["error"] !== "") {
      skipped += 1;
      continue;
    }
    const x = parseNumber(row[xColumn]);
    for (let s = 0; s < yColumns.length; s++) {
      const y = parseNumber(row[yColumns[s]]);
      if (!Number.isFinite(x) || !Number.isFinite(y)) {
        dropped += 1;
        continue;
      }
      series[s].x.push(x);
      series[s].y.push(y);
    }
  }
  if (series.every((s) => s.x.length === 0)) {
    throw new Error(
      `no usable data rows (skipped ${skipped} error rows, dropped ${dropped} points)`,
    );
  }
  return { series, skippedErrorRows: skipped, droppedPoints: dropped };
}
