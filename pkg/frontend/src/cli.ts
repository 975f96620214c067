/**
 * Batch plotting CLI over beqt2d run outputs.
 *
 *   viz energy   --csv diagnostics.csv --out energy.svg [--log]
 *   viz decay    --csv diagnostics.csv --out decay.svg
 *   viz director --snapshot snap.bin --out director.svg
 *   viz rate     --csv diagnostics.csv --report rate_report.json --out rate.svg
 */

import * as fs from 'fs';

import { parseDiagnosticsCsv } from './csv';
import { plotADecay, plotDirector, plotEnergy, plotRate, PlotSpec, RateReport } from './plots';
import { parseSnapshot } from './snapshot';

interface Flags {
  [key: string]: string | boolean;
}

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; ++i) {
    const a = argv[i];
    if (!a.startsWith('--')) throw new Error(`unexpected argument: ${a}`);
    const name = a.slice(2);
    if (i + 1 < argv.length && !argv[i + 1].startsWith('--')) {
      flags[name] = argv[++i];
    } else {
      flags[name] = true;
    }
  }
  return flags;
}

function need(flags: Flags, name: string): string {
  const v = flags[name];
  if (typeof v !== 'string') throw new Error(`missing required flag --${name}`);
  return v;
}

function requireInput(spec: PlotSpec, field: 'csv' | 'snapshot' | 'rateReport'): string {
  const v = spec[field];
  if (!v) throw new Error(`plot kind ${spec.kind} needs ${field}`);
  if (!fs.existsSync(v)) throw new Error(`input does not exist: ${v}`);
  return v;
}

/** Render one PlotSpec to its output path; inputs are never modified. */
export function renderPlot(spec: PlotSpec): void {
  let svg: string;
  switch (spec.kind) {
    case 'energy_curves':
      svg = plotEnergy(parseDiagnosticsCsv(fs.readFileSync(requireInput(spec, 'csv'), 'utf-8')),
        Boolean(spec.logScale));
      break;
    case 'A_decay':
      svg = plotADecay(parseDiagnosticsCsv(fs.readFileSync(requireInput(spec, 'csv'), 'utf-8')));
      break;
    case 'director_field':
      svg = plotDirector(parseSnapshot(fs.readFileSync(requireInput(spec, 'snapshot'))));
      break;
    case 'rate_fit': {
      const data = parseDiagnosticsCsv(fs.readFileSync(requireInput(spec, 'csv'), 'utf-8'));
      const report = JSON.parse(fs.readFileSync(requireInput(spec, 'rateReport'), 'utf-8')) as RateReport;
      svg = plotRate(data, report);
      break;
    }
  }
  fs.writeFileSync(spec.out, svg);
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    const flags = parseFlags(rest);
    const out = need(flags, 'out');
    switch (command) {
      case 'energy':
        renderPlot({ kind: 'energy_curves', csv: need(flags, 'csv'), out, logScale: Boolean(flags.log) });
        break;
      case 'decay':
        renderPlot({ kind: 'A_decay', csv: need(flags, 'csv'), out });
        break;
      case 'director':
        renderPlot({ kind: 'director_field', snapshot: need(flags, 'snapshot'), out });
        break;
      case 'rate':
        renderPlot({ kind: 'rate_fit', csv: need(flags, 'csv'), rateReport: need(flags, 'report'), out });
        break;
      default:
        console.error('usage: viz <energy|decay|director|rate> [flags]');
        return 1;
    }
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
