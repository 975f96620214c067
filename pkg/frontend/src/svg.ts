/**
 * Minimal self-contained SVG chart builder: linear/log axes, polylines,
 * heat cells and unoriented line segments.  No DOM, no external renderer;
 * output is a standalone .svg document.
 */

export type ScaleKind = 'linear' | 'log';

export class Scale {
  constructor(
    public kind: ScaleKind,
    public lo: number,
    public hi: number,
    public rlo: number,
    public rhi: number,
  ) {
    if (kind === 'log' && (lo <= 0 || hi <= 0)) {
      throw new Error(`log scale needs positive domain, got [${lo}, ${hi}]`);
    }
    if (lo === hi) {
      // degenerate (e.g. single-sample series): widen symmetrically
      this.lo = kind === 'log' ? lo / 2 : lo - 1;
      this.hi = kind === 'log' ? hi * 2 : hi + 1;
    }
  }

  map(v: number): number {
    const [a, b] =
      this.kind === 'log'
        ? [Math.log(this.lo), Math.log(this.hi)]
        : [this.lo, this.hi];
    const x = this.kind === 'log' ? Math.log(v) : v;
    return this.rlo + ((x - a) / (b - a)) * (this.rhi - this.rlo);
  }

  ticks(count = 5): number[] {
    if (this.kind === 'log') {
      const lo = Math.ceil(Math.log10(this.lo));
      const hi = Math.floor(Math.log10(this.hi));
      const out: number[] = [];
      const stride = Math.max(1, Math.ceil((hi - lo + 1) / count));
      for (let e = lo; e <= hi; e += stride) out.push(10 ** e);
      return out.length ? out : [this.lo, this.hi];
    }
    const span = this.hi - this.lo;
    const step = 10 ** Math.floor(Math.log10(span / count));
    const mult = [1, 2, 5, 10].find((m) => span / (step * m) <= count) ?? 10;
    const s = step * mult;
    const out: number[] = [];
    for (let v = Math.ceil(this.lo / s) * s; v <= this.hi + 1e-12 * span; v += s) out.push(v);
    return out;
  }
}

function fmt(v: number): string {
  if (v === 0) return '0';
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Number(v.toPrecision(4)));
}

const esc = (s: string) => s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');

export interface PanelOptions {
  x: number;
  y: number;
  width: number;
  height: number;
  title?: string;
  xLabel?: string;
  yLabel?: string;
  xKind?: ScaleKind;
  yKind?: ScaleKind;
}

const COLORS = ['#1965b0', '#dc050c', '#4eb265', '#f7a600', '#882e72', '#777777'];

export class Panel {
  readonly xScale: Scale;
  readonly yScale: Scale;
  private body: string[] = [];
  private legend: Array<[string, string]> = [];

  constructor(
    private opts: PanelOptions,
    xDomain: [number, number],
    yDomain: [number, number],
  ) {
    const m = { l: 58, r: 12, t: opts.title ? 26 : 10, b: 40 };
    this.xScale = new Scale(opts.xKind ?? 'linear', xDomain[0], xDomain[1],
      opts.x + m.l, opts.x + opts.width - m.r);
    this.yScale = new Scale(opts.yKind ?? 'linear', yDomain[0], yDomain[1],
      opts.y + opts.height - m.b, opts.y + m.t);
  }

  color(i: number): string {
    return COLORS[i % COLORS.length];
  }

  polyline(xs: ArrayLike<number>, ys: ArrayLike<number>, color: string, label?: string, dash?: string) {
    const pts: string[] = [];
    for (let i = 0; i < xs.length; ++i) {
      const x = xs[i];
      const y = ys[i];
      if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
      if (this.yScale.kind === 'log' && y <= 0) continue;
      if (this.xScale.kind === 'log' && x <= 0) continue;
      pts.push(`${this.xScale.map(x).toFixed(2)},${this.yScale.map(y).toFixed(2)}`);
    }
    if (pts.length === 1) {
      const [px, py] = pts[0].split(',');
      this.body.push(`<circle cx="${px}" cy="${py}" r="3" fill="${color}"/>`);
    } else if (pts.length > 1) {
      const dashAttr = dash ? ` stroke-dasharray="${dash}"` : '';
      this.body.push(
        `<polyline points="${pts.join(' ')}" fill="none" stroke="${color}" stroke-width="1.3"${dashAttr}/>`);
    }
    if (label) this.legend.push([label, color]);
  }

  cell(x0: number, y0: number, x1: number, y1: number, color: string) {
    const px = this.xScale.map(x0);
    const py = this.yScale.map(y1);
    const w = this.xScale.map(x1) - px;
    const h = this.yScale.map(y0) - py;
    this.body.push(
      `<rect x="${px.toFixed(2)}" y="${py.toFixed(2)}" width="${(w + 0.5).toFixed(2)}" ` +
      `height="${(h + 0.5).toFixed(2)}" fill="${color}" stroke="none"/>`);
  }

  segment(cx: number, cy: number, angle: number, len: number, color: string) {
    // unoriented: drawn headless, centered at (cx, cy) in data coordinates
    const dx = 0.5 * len * Math.cos(angle);
    const dy = 0.5 * len * Math.sin(angle);
    const x1 = this.xScale.map(cx - dx);
    const y1 = this.yScale.map(cy - dy);
    const x2 = this.xScale.map(cx + dx);
    const y2 = this.yScale.map(cy + dy);
    this.body.push(
      `<line x1="${x1.toFixed(2)}" y1="${y1.toFixed(2)}" x2="${x2.toFixed(2)}" ` +
      `y2="${y2.toFixed(2)}" stroke="${color}" stroke-width="1.1"/>`);
  }

  render(): string {
    const o = this.opts;
    const out: string[] = [];
    const x0 = this.xScale.rlo;
    const x1 = this.xScale.rhi;
    const y0 = this.yScale.rlo;
    const y1 = this.yScale.rhi;
    out.push(`<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#333"/>`);
    for (const v of this.xScale.ticks()) {
      const px = this.xScale.map(v);
      out.push(`<line x1="${px.toFixed(2)}" y1="${y0}" x2="${px.toFixed(2)}" y2="${y0 + 4}" stroke="#333"/>`);
      out.push(`<text x="${px.toFixed(2)}" y="${y0 + 16}" font-size="10" text-anchor="middle">${fmt(v)}</text>`);
    }
    for (const v of this.yScale.ticks()) {
      const py = this.yScale.map(v);
      out.push(`<line x1="${x0 - 4}" y1="${py.toFixed(2)}" x2="${x0}" y2="${py.toFixed(2)}" stroke="#333"/>`);
      out.push(`<text x="${x0 - 6}" y="${(py + 3).toFixed(2)}" font-size="10" text-anchor="end">${fmt(v)}</text>`);
    }
    if (o.title) {
      out.push(`<text x="${(x0 + x1) / 2}" y="${o.y + 16}" font-size="12" font-weight="bold" text-anchor="middle">${esc(o.title)}</text>`);
    }
    if (o.xLabel) {
      out.push(`<text x="${(x0 + x1) / 2}" y="${y0 + 32}" font-size="11" text-anchor="middle">${esc(o.xLabel)}</text>`);
    }
    if (o.yLabel) {
      const ly = (y0 + y1) / 2;
      out.push(`<text x="${o.x + 14}" y="${ly}" font-size="11" text-anchor="middle" transform="rotate(-90 ${o.x + 14} ${ly})">${esc(o.yLabel)}</text>`);
    }
    out.push(...this.body);
    this.legend.forEach(([label, color], i) => {
      const lx = x0 + 10;
      const ly = y1 + 14 + 14 * i;
      out.push(`<line x1="${lx}" y1="${ly - 3}" x2="${lx + 18}" y2="${ly - 3}" stroke="${color}" stroke-width="2"/>`);
      out.push(`<text x="${lx + 24}" y="${ly}" font-size="10">${esc(label)}</text>`);
    });
    return out.join('\n');
  }
}

export class SvgDocument {
  private parts: string[] = [];

  constructor(public width: number, public height: number) {}

  add(fragment: string) {
    this.parts.push(fragment);
  }

  banner(message: string) {
    this.parts.push(
      `<rect x="0" y="0" width="${this.width}" height="22" fill="#ffd2d2"/>` +
      `<text x="8" y="15" font-size="12" fill="#8b0000">${esc(message)}</text>`);
  }

  toString(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" ` +
      `viewBox="0 0 ${this.width} ${this.height}" font-family="sans-serif">\n` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join('\n') +
      '\n</svg>\n'
    );
  }
}
