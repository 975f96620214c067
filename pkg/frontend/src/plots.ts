/**
 * The four plot kinds: energy_curves, A_decay, director_field, rate_fit.
 * Everything reads the solver's on-disk formats only (diagnostics CSV,
 * field snapshots, rate report JSON) and never modifies inputs.
 */

import { Diagnostics } from './csv';
import { directorDecompose } from './director';
import { Snapshot } from './snapshot';
import { Panel, SvgDocument } from './svg';

function finiteExtent(arrays: ArrayLike<number>[], positiveOnly = false): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const arr of arrays) {
    for (let i = 0; i < arr.length; ++i) {
      const v = arr[i];
      if (!Number.isFinite(v)) continue;
      if (positiveOnly && v <= 0) continue;
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!(lo <= hi)) throw new Error('no finite data to plot');
  return [lo, hi];
}

export function plotEnergy(data: Diagnostics, logScale = false): string {
  const doc = new SvgDocument(860, 420);
  const t = data.t;
  const tExt = finiteExtent([t]);

  const energies = [data.E_total, data.E_kinetic, data.E_elastic, data.E_bulk];
  const left = new Panel(
    { x: 0, y: 10, width: 430, height: 360, title: 'energy budget', xLabel: 't' },
    tExt, finiteExtent(energies));
  ['total', 'kinetic', 'elastic', 'bulk'].forEach((label, i) => {
    left.polyline(t, energies[i], left.color(i), label);
  });
  doc.add(left.render());

  const parts = [data.grad_u_L2sq, data.H_L2sq];
  const right = new Panel(
    {
      x: 430, y: 10, width: 430, height: 360,
      title: 'dissipation ingredients', xLabel: 't',
      yKind: logScale ? 'log' : 'linear',
    },
    tExt, finiteExtent(parts, logScale));
  right.polyline(t, data.grad_u_L2sq, right.color(0), '||grad u||^2');
  right.polyline(t, data.H_L2sq, right.color(1), '||H||^2');
  doc.add(right.render());
  return doc.toString();
}

export function plotADecay(data: Diagnostics): string {
  const doc = new SvgDocument(860, 420);
  const t = data.t;
  const A = data.A;
  const [alo, ahi] = finiteExtent([A], true);

  const loglin = new Panel(
    { x: 0, y: 10, width: 430, height: 360, title: 'A(t), log-linear', xLabel: 't', yKind: 'log' },
    finiteExtent([t]), [alo, ahi]);
  loglin.polyline(t, A, loglin.color(0), 'A = ||grad u||^2 + lam ||H||^2');
  doc.add(loglin.render());

  const shifted = Array.from(t, (v) => 1 + v);
  const loglog = new Panel(
    { x: 430, y: 10, width: 430, height: 360, title: 'A vs 1+t, log-log', xLabel: '1+t', xKind: 'log', yKind: 'log' },
    finiteExtent([shifted], true), [alo, ahi]);
  loglog.polyline(shifted, A, loglog.color(0));
  doc.add(loglog.render());
  return doc.toString();
}

/** Grayscale-to-color map for the scalar order parameter. */
function heatColor(v: number): string {
  const x = Math.max(0, Math.min(1, v));
  const r = Math.round(255 * Math.min(1, 0.2 + 1.2 * x));
  const g = Math.round(255 * (0.15 + 0.55 * x));
  const b = Math.round(255 * (0.45 - 0.25 * x));
  return `rgb(${r},${g},${b})`;
}

export function plotDirector(snap: Snapshot, sFloor = 1e-8): string {
  const n = snap.n;
  const { s, theta } = directorDecompose(snap.p, snap.q, sFloor);
  let smax = 0;
  for (let i = 0; i < s.length; ++i) smax = Math.max(smax, s[i]);

  const doc = new SvgDocument(560, 600);
  const panel = new Panel(
    {
      x: 0, y: 10, width: 540, height: 540,
      title: `order parameter s and director at t = ${snap.t}`,
      xLabel: 'x1', yLabel: 'x2',
    },
    [0, 1], [0, 1]);
  const h = 1 / n;
  for (let i = 0; i < n; ++i) {
    for (let j = 0; j < n; ++j) {
      const v = smax > 0 ? s[i * n + j] / smax : 0;
      panel.cell(i * h, j * h, (i + 1) * h, (j + 1) * h, heatColor(v));
    }
  }
  // headless segments (n == -n); skip cells with no meaningful alignment
  const stride = Math.max(1, Math.floor(n / 24));
  for (let i = 0; i < n; i += stride) {
    for (let j = 0; j < n; j += stride) {
      const idx = i * n + j;
      if (s[idx] <= sFloor) continue;
      panel.segment((i + 0.5) * h, (j + 0.5) * h, theta[idx], 0.8 * stride * h, '#ffffff');
    }
  }
  doc.add(panel.render());
  doc.add(
    `<text x="20" y="585" font-size="11">s in [0, ${smax.toPrecision(4)}], ` +
    `director drawn as unoriented segments</text>`);
  return doc.toString();
}

export interface RateSeriesFit {
  refused: boolean;
  reason?: string;
  theta_hat?: number | null;
  poly_slope?: number | null;
  exp_rate?: number | null;
  model_preference?: string;
}

export interface RateReport {
  series: Record<string, RateSeriesFit>;
}

export function plotRate(data: Diagnostics, report: RateReport): string {
  const doc = new SvgDocument(860, 440);
  const fit = report.series?.A;
  const t = data.t;
  const A = data.A;
  const [alo, ahi] = finiteExtent([A], true);

  const shifted = Array.from(t, (v) => 1 + v);
  const loglog = new Panel(
    { x: 0, y: 24, width: 430, height: 360, title: 'polynomial model, log-log', xLabel: '1+t', xKind: 'log', yKind: 'log' },
    finiteExtent([shifted], true), [alo, ahi]);
  loglog.polyline(shifted, A, loglog.color(0), 'A');

  const loglin = new Panel(
    { x: 430, y: 24, width: 430, height: 360, title: 'exponential model, log-linear', xLabel: 't', yKind: 'log' },
    finiteExtent([t]), [alo, ahi]);
  loglin.polyline(t, A, loglin.color(0), 'A');

  if (!fit || fit.refused) {
    doc.banner(`rate fit refused: ${fit?.reason ?? 'no fit for series A in report'} (raw series shown)`);
  } else {
    // overlay both fitted models, anchored at the last sample
    const tEnd = t[t.length - 1];
    const aEnd = A[A.length - 1];
    if (fit.poly_slope != null && Number.isFinite(fit.poly_slope)) {
      const model = Array.from(t, (v) => aEnd * ((1 + v) / (1 + tEnd)) ** fit.poly_slope!);
      loglog.polyline(shifted, model, loglog.color(1),
        `(1+t)^s, s=${fit.poly_slope.toFixed(3)}`, '5,3');
    }
    if (fit.exp_rate != null && Number.isFinite(fit.exp_rate)) {
      const model = Array.from(t, (v) => aEnd * Math.exp(-fit.exp_rate! * (v - tEnd)));
      loglin.polyline(t, model, loglin.color(1),
        `exp(-r t), r=${fit.exp_rate.toFixed(3)}`, '5,3');
    }
    const theta = fit.theta_hat != null && Number.isFinite(fit.theta_hat) ? fit.theta_hat.toFixed(4) : '?';
    doc.add(
      `<text x="430" y="16" font-size="12" text-anchor="middle">theta_hat = ${theta}, ` +
      `preferred model: ${fit.model_preference ?? '?'}</text>`);
  }
  doc.add(loglog.render());
  doc.add(loglin.render());
  return doc.toString();
}


export type PlotKind = 'energy_curves' | 'A_decay' | 'director_field' | 'rate_fit';

/** Declarative form of a plot request, mirroring the CLI flags. */
export interface PlotSpec {
  kind: PlotKind;
  csv?: string;
  snapshot?: string;
  rateReport?: string;
  out: string;
  logScale?: boolean;
}
