import { Rgb, toHex } from "./colormap.js";

/** Pixel rectangle a panel draws into. */
export interface Frame {
  x: number;
  y: number;
  w: number;
  h: number;
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function fmtNum(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 10000 || a < 0.001) return v.toExponential(1);
  if (Number.isInteger(v)) return String(v);
  return String(parseFloat(v.toPrecision(3)));
}

export function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 0.01; v += step) ticks.push(v);
  return ticks;
}

/** Maps data coordinates to pixels inside a frame, y growing upward. */
export class Scale {
  constructor(
    readonly frame: Frame,
    readonly xlim: [number, number],
    readonly ylim: [number, number]
  ) {}

  x(v: number): number {
    const [a, b] = this.xlim;
    return this.frame.x + ((v - a) / (b - a || 1)) * this.frame.w;
  }

  y(v: number): number {
    const [a, b] = this.ylim;
    return this.frame.y + this.frame.h - ((v - a) / (b - a || 1)) * this.frame.h;
  }
}

export function frameBox(f: Frame): string {
  return `<rect x="${f.x}" y="${f.y}" width="${f.w}" height="${f.h}" fill="none" stroke="#333" stroke-width="0.7"/>\n`;
}

export function panelTitle(f: Frame, title: string): string {
  return `<text x="${f.x + f.w / 2}" y="${f.y - 5}" text-anchor="middle" font-size="9" font-weight="600" fill="#222">${esc(title)}</text>\n`;
}

export function xAxis(scale: Scale, label: string, count = 5): string {
  const f = scale.frame;
  let s = "";
  for (const v of niceTicks(scale.xlim[0], scale.xlim[1], count)) {
    const x = scale.x(v);
    s += `<line x1="${x.toFixed(1)}" y1="${f.y + f.h}" x2="${x.toFixed(1)}" y2="${f.y + f.h + 3}" stroke="#333" stroke-width="0.5"/>\n`;
    s += `<text x="${x.toFixed(1)}" y="${f.y + f.h + 12}" text-anchor="middle" font-size="7" fill="#555">${esc(fmtNum(v))}</text>\n`;
  }
  s += `<text x="${f.x + f.w / 2}" y="${f.y + f.h + 24}" text-anchor="middle" font-size="8" fill="#333">${esc(label)}</text>\n`;
  return s;
}

export function yAxis(scale: Scale, label: string, count = 5): string {
  const f = scale.frame;
  let s = "";
  for (const v of niceTicks(scale.ylim[0], scale.ylim[1], count)) {
    const y = scale.y(v);
    s += `<line x1="${f.x - 3}" y1="${y.toFixed(1)}" x2="${f.x}" y2="${y.toFixed(1)}" stroke="#333" stroke-width="0.5"/>\n`;
    s += `<text x="${f.x - 5}" y="${(y + 2.5).toFixed(1)}" text-anchor="end" font-size="7" fill="#555">${esc(fmtNum(v))}</text>\n`;
  }
  const cx = f.x - 34;
  const cy = f.y + f.h / 2;
  s += `<text x="${cx}" y="${cy}" text-anchor="middle" font-size="8" fill="#333" transform="rotate(-90,${cx},${cy})">${esc(label)}</text>\n`;
  return s;
}

export function polyline(
  scale: Scale,
  xs: number[],
  ys: number[],
  color: string,
  width = 1
): string {
  const pts: string[] = [];
  for (let i = 0; i < xs.length; ++i) {
    if (!Number.isFinite(ys[i])) continue;
    pts.push(`${scale.x(xs[i]).toFixed(1)},${scale.y(ys[i]).toFixed(1)}`);
  }
  return `<polyline fill="none" stroke="${color}" stroke-width="${width}" points="${pts.join(" ")}"/>\n`;
}

/**
 * Grid of filled cells. `color(i, j)` is asked for column i (left to right)
 * and row j (bottom to top); null paints the miss color for bad cells.
 */
export function heatmapCells(
  f: Frame,
  nx: number,
  ny: number,
  color: (i: number, j: number) => Rgb | null
): string {
  const cw = f.w / nx;
  const ch = f.h / ny;
  let s = "";
  for (let j = 0; j < ny; ++j) {
    const y = f.y + f.h - (j + 1) * ch;
    for (let i = 0; i < nx; ++i) {
      const c = color(i, j);
      const fill = c === null ? "#bbbbbb" : toHex(c);
      // tiny overdraw hides antialiasing seams between cells
      s += `<rect x="${(f.x + i * cw).toFixed(2)}" y="${y.toFixed(2)}" width="${(cw + 0.05).toFixed(2)}" height="${(ch + 0.05).toFixed(2)}" fill="${fill}"/>\n`;
    }
  }
  return s;
}

/** Vertical colorbar to the right of a panel. */
export function colorbar(
  f: Frame,
  sample: (t: number) => Rgb,
  lo: number,
  hi: number,
  label: string
): string {
  const n = 64;
  const step = f.h / n;
  let s = "";
  for (let k = 0; k < n; ++k) {
    const t = lo + ((k + 0.5) / n) * (hi - lo);
    const y = f.y + f.h - (k + 1) * step;
    s += `<rect x="${f.x}" y="${y.toFixed(2)}" width="${f.w}" height="${(step + 0.05).toFixed(2)}" fill="${toHex(sample(t))}"/>\n`;
  }
  s += frameBox(f);
  for (const v of niceTicks(lo, hi, 4)) {
    const y = f.y + f.h - ((v - lo) / (hi - lo || 1)) * f.h;
    s += `<line x1="${f.x + f.w}" y1="${y.toFixed(1)}" x2="${f.x + f.w + 3}" y2="${y.toFixed(1)}" stroke="#333" stroke-width="0.5"/>\n`;
    s += `<text x="${f.x + f.w + 5}" y="${(y + 2.5).toFixed(1)}" font-size="7" fill="#555">${esc(fmtNum(v))}</text>\n`;
  }
  const cx = f.x + f.w + 30;
  const cy = f.y + f.h / 2;
  s += `<text x="${cx}" y="${cy}" text-anchor="middle" font-size="8" fill="#333" transform="rotate(90,${cx},${cy})">${esc(label)}</text>\n`;
  return s;
}

export function legend(
  f: Frame,
  entries: Array<{ label: string; color: string }>
): string {
  const lw = Math.max(...entries.map((e) => e.label.length)) * 4.5 + 26;
  const lh = entries.length * 10 + 4;
  const x = f.x + f.w - lw - 4;
  let s = `<rect x="${x}" y="${f.y + 3}" width="${lw}" height="${lh}" rx="2" fill="white" fill-opacity="0.85" stroke="#ddd" stroke-width="0.4"/>\n`;
  entries.forEach((e, k) => {
    const y = f.y + 10 + k * 10;
    s += `<line x1="${x + 4}" y1="${y}" x2="${x + 16}" y2="${y}" stroke="${e.color}" stroke-width="1.4"/>\n`;
    s += `<text x="${x + 20}" y="${y + 2.5}" font-size="6.5" fill="#444">${esc(e.label)}</text>\n`;
  });
  return s;
}

export function document(width: number, height: number, body: string): string {
  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${width}" height="${height}" fill="#ffffff"/>\n`;
  s += body;
  s += `</svg>\n`;
  return s;
}
