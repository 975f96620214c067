/**
 * Strict parser for the beqt2d diagnostics CSV.  The header must match the
 * DiagnosticsRow schema exactly, in order; schema drift fails loudly with
 * the offending column named.
 */

export const CSV_FIELDS = [
  't', 'E_total', 'E_kinetic', 'E_elastic', 'E_bulk',
  'grad_u_L2sq', 'H_L2sq', 'A', 'B',
  'div_u_max', 'Q_Linf', 'u_H1', 'Q_minus_Qinf_H2', 'energy_residual',
] as const;

export type DiagnosticsColumn = (typeof CSV_FIELDS)[number];
export type Diagnostics = Record<DiagnosticsColumn, Float64Array>;

export class CsvSchemaError extends Error {}

export function parseDiagnosticsCsv(text: string): Diagnostics {
  const lines = text.split('\n').filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new CsvSchemaError('empty diagnostics CSV');
  }
  const header = lines[0].split(',');
  if (header.length !== CSV_FIELDS.length) {
    throw new CsvSchemaError(
      `expected ${CSV_FIELDS.length} columns, got ${header.length}`);
  }
  for (let i = 0; i < CSV_FIELDS.length; ++i) {
    if (header[i] !== CSV_FIELDS[i]) {
      throw new CsvSchemaError(
        `column ${i} is ${JSON.stringify(header[i])}, expected ${JSON.stringify(CSV_FIELDS[i])}`);
    }
  }
  const nrows = lines.length - 1;
  const out = {} as Diagnostics;
  for (const name of CSV_FIELDS) {
    out[name] = new Float64Array(nrows);
  }
  for (let r = 0; r < nrows; ++r) {
    const cells = lines[r + 1].split(',');
    if (cells.length !== CSV_FIELDS.length) {
      throw new CsvSchemaError(`row ${r + 1} has ${cells.length} cells`);
    }
    for (let c = 0; c < CSV_FIELDS.length; ++c) {
      // the writer emits round-trip decimal floats, with NaN spelled "nan"
      out[CSV_FIELDS[c]][r] = cells[c] === 'nan' ? NaN : Number(cells[c]);
    }
  }
  return out;
}
