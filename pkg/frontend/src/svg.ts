/** Minimal deterministic SVG construction: fixed-precision coordinates,
 * no randomness, no environment dependence. */

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const MARGIN: Margin = { top: 34, right: 16, bottom: 42, left: 64 };

export interface Scale {
  (value: number): number;
  ticks: number[];
  domain: [number, number];
  log: boolean;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    d0 -= 1;
    d1 += 1;
  }
  const factor = (range[1] - range[0]) / (d1 - d0);
  const fn = ((value: number) => range[0] + (value - d0) * factor) as Scale;
  fn.ticks = linearTicks(d0, d1);
  fn.domain = [d0, d1];
  fn.log = false;
  return fn;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const lo = Math.max(domain[0], 1e-300);
  const hi = Math.max(domain[1], lo * 10);
  const [l0, l1] = [Math.log10(lo), Math.log10(hi)];
  const factor = (range[1] - range[0]) / (l1 - l0 || 1);
  const fn = ((value: number) => range[0] + (Math.log10(Math.max(value, 1e-300)) - l0) * factor) as Scale;
  const ticks: number[] = [];
  for (let p = Math.ceil(l0); p <= Math.floor(l1); p++) {
    ticks.push(10 ** p);
  }
  fn.ticks = ticks.length >= 2 ? ticks : [lo, hi];
  fn.domain = [lo, hi];
  fn.log = true;
  return fn;
}

function linearTicks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo;
  const step = 10 ** Math.floor(Math.log10(span / count));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + 1e-12 * span; v += chosen) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

const fmt = (value: number): string => value.toFixed(2);

export function fmtTick(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 1e4 || magnitude < 1e-3) return value.toExponential(0);
  return String(Math.round(value * 1e6) / 1e6);
}

export class SvgBuilder {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  line(x1: number, y1: number, x2: number, y2: number, style: string): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ${style}/>`,
    );
  }

  polyline(points: Array<[number, number]>, style: string): void {
    const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(`<polyline fill="none" points="${path}" ${style}/>`);
  }

  circle(cx: number, cy: number, r: number, style: string): void {
    this.parts.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${r}" ${style}/>`);
  }

  text(x: number, y: number, content: string, style = ""): void {
    this.parts.push(`<text x="${fmt(x)}" y="${fmt(y)}" ${style}>${escapeXml(content)}</text>`);
  }

  metadata(id: string, payload: unknown): void {
    this.parts.push(`<metadata id="${id}">${escapeXml(JSON.stringify(payload))}</metadata>`);
  }

  axes(xScale: Scale, yScale: Scale, xLabel: string, yLabel: string): void {
    const x0 = MARGIN.left;
    const x1 = this.width - MARGIN.right;
    const y0 = this.height - MARGIN.bottom;
    const y1 = MARGIN.top;
    const axisStyle = 'stroke="#222" stroke-width="1"';
    this.line(x0, y0, x1, y0, axisStyle);
    this.line(x0, y0, x0, y1, axisStyle);
    for (const tick of xScale.ticks) {
      const x = xScale(tick);
      this.line(x, y0, x, y0 + 4, axisStyle);
      this.text(x, y0 + 18, fmtTick(tick), 'text-anchor="middle" font-size="11"');
    }
    for (const tick of yScale.ticks) {
      const y = yScale(tick);
      this.line(x0 - 4, y, x0, y, axisStyle);
      this.text(x0 - 7, y + 4, fmtTick(tick), 'text-anchor="end" font-size="11"');
    }
    this.text((x0 + x1) / 2, this.height - 8, xLabel, 'text-anchor="middle" font-size="12"');
    this.text(14, (y0 + y1) / 2, yLabel,
      `text-anchor="middle" font-size="12" transform="rotate(-90 14 ${fmt((y0 + y1) / 2)})"`);
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      '<rect width="100%" height="100%" fill="white"/>',
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
