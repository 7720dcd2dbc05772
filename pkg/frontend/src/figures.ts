import { basename } from "node:path";

import {
  column,
  columnsMatching,
  CsvTable,
  readCsv,
  requireColumns,
  summarize,
} from "./csv.js";
import { PlotSpec } from "./spec.js";
import { linearScale, logScale, MARGIN, PALETTE, Scale, SvgBuilder } from "./svg.js";

/** Render a figure to SVG text; pure function of the spec and CSV bytes. */
export function renderFigure(spec: PlotSpec): string {
  const tables = spec.inputs.map(readCsv);
  for (const table of tables) {
    if (table.kind !== spec.kind) {
      throw new Error(`${table.path}: csv kind '${table.kind}' does not match figure kind '${spec.kind}'`);
    }
  }
  const svg = new SvgBuilder(spec.width, spec.height);
  switch (spec.kind) {
    case "snapshot":
      renderSnapshot(svg, tables[0], spec);
      break;
    case "error_series":
      renderSeries(svg, tables, spec, /^(l2|linf)_/, true);
      break;
    case "rate_series":
      renderSeries(svg, tables, spec, /^(denergy_dt|dentropy_dt)$/, false);
      break;
    case "spectrum":
      renderSpectrum(svg, tables, spec);
      break;
  }
  if (spec.title) {
    svg.text(spec.width / 2, 20, spec.title, 'text-anchor="middle" font-size="14" font-weight="bold"');
  }
  svg.metadata("summary", tables.map((t) => ({ file: basename(t.path), columns: summarize(t) })));
  return svg.render();
}

function plotRange(width: number, height: number): { x: [number, number]; y: [number, number] } {
  return {
    x: [MARGIN.left, width - MARGIN.right],
    y: [height - MARGIN.bottom, MARGIN.top], // svg y grows downward
  };
}

function finiteExtent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo > hi) throw new Error("no finite values to plot");
  return [lo, hi];
}

function renderSnapshot(svg: SvgBuilder, table: CsvTable, spec: PlotSpec): void {
  requireColumns(table, ["x", "mesh", "element"]);
  const varNames = table.columns.slice(3);
  const range = plotRange(spec.width, spec.height);
  const xs = column(table, "x");
  const xScale = linearScale(finiteExtent(xs), range.x);
  const values = varNames.flatMap((name) => column(table, name));
  const yScale = linearScale(padded(finiteExtent(values)), range.y);
  svg.axes(xScale, yScale, "x", varNames.join(", "));

  const meshIdx = table.columns.indexOf("mesh");
  const elemIdx = table.columns.indexOf("element");
  drawElementBoundaries(svg, table, xs, meshIdx, elemIdx, xScale, range.y);

  varNames.forEach((name, v) => {
    const ys = column(table, name);
    for (const mesh of ["u", "v"]) {
      const pts: Array<[number, number]> = [];
      table.raw.forEach((row, i) => {
        if (row[meshIdx] === mesh) pts.push([xScale(xs[i]), yScale(ys[i])]);
      });
      const color = PALETTE[(2 * v + (mesh === "u" ? 0 : 1)) % PALETTE.length];
      const dash = mesh === "u" ? "" : ' stroke-dasharray="5,3"';
      if (pts.length) {
        svg.polyline(pts, `stroke="${color}" stroke-width="1.5"${dash}`);
      }
    }
  });
  legend(svg, varNames.flatMap((n) => [`${n} (u mesh)`, `${n} (v mesh)`]));
}

function drawElementBoundaries(
  svg: SvgBuilder,
  table: CsvTable,
  xs: number[],
  meshIdx: number,
  elemIdx: number,
  xScale: Scale,
  yRange: [number, number],
): void {
  // element edges: first node of each element plus the last node per mesh
  const seen = new Map<string, number[]>([["u", []], ["v", []]]);
  let lastKey = "";
  table.raw.forEach((row, i) => {
    const key = `${row[meshIdx]}:${row[elemIdx]}`;
    if (key !== lastKey) {
      seen.get(row[meshIdx])?.push(xs[i]);
      lastKey = key;
    }
  });
  for (const mesh of ["u", "v"]) {
    const indices = table.raw
      .map((row, i) => (row[meshIdx] === mesh ? i : -1))
      .filter((i) => i >= 0);
    if (indices.length) seen.get(mesh)?.push(xs[indices[indices.length - 1]]);
  }
  for (const edge of seen.get("u") ?? []) {
    svg.line(xScale(edge), yRange[0], xScale(edge), yRange[1],
      'stroke="#2ca02c" stroke-width="0.8" stroke-dasharray="4,4"');
  }
  for (const edge of seen.get("v") ?? []) {
    svg.line(xScale(edge), yRange[0], xScale(edge), yRange[1], 'stroke="#999" stroke-width="0.8"');
  }
}

function renderSeries(
  svg: SvgBuilder,
  tables: CsvTable[],
  spec: PlotSpec,
  pattern: RegExp,
  defaultLog: boolean,
): void {
  for (const table of tables) requireColumns(table, ["time"]);
  const range = plotRange(spec.width, spec.height);
  const times = tables.flatMap((t) => column(t, "time"));
  const xScale = linearScale(finiteExtent(times), range.x);

  const curves: Array<{ label: string; time: number[]; values: number[] }> = [];
  tables.forEach((table, i) => {
    const names = columnsMatching(table, pattern);
    if (names.length === 0) {
      throw new Error(`${table.path}: no columns matching ${pattern} to plot`);
    }
    const prefix = spec.labels?.[i] ?? (tables.length > 1 ? `${basename(table.path)}: ` : "");
    for (const name of names) {
      curves.push({ label: `${prefix}${name}`, time: column(table, "time"), values: column(table, name) });
    }
  });

  const all = curves.flatMap((c) => c.values);
  const useLog = spec.log_y ?? defaultLog;
  const finite = all.filter((v) => Number.isFinite(v) && (!useLog || v > 0));
  const yScale = useLog
    ? logScale(finiteExtent(finite), range.y)
    : linearScale(padded(finiteExtent(all)), range.y);
  svg.axes(xScale, yScale, "time", useLog ? "value (log)" : "value");
  if (!useLog && yScale.domain[0] < 0 && yScale.domain[1] > 0) {
    svg.line(range.x[0], yScale(0), range.x[1], yScale(0), 'stroke="#bbb" stroke-width="0.8"');
  }

  curves.forEach((curve, i) => {
    const pts: Array<[number, number]> = [];
    curve.time.forEach((t, j) => {
      const v = curve.values[j];
      if (Number.isFinite(v) && (!useLog || v > 0)) pts.push([xScale(t), yScale(v)]);
    });
    if (pts.length) {
      svg.polyline(pts, `stroke="${PALETTE[i % PALETTE.length]}" stroke-width="1.5"`);
    }
  });
  legend(svg, curves.map((c) => c.label));
}

function renderSpectrum(svg: SvgBuilder, tables: CsvTable[], spec: PlotSpec): void {
  const range = plotRange(spec.width, spec.height);
  for (const table of tables) requireColumns(table, ["re", "im"]);
  const res = tables.flatMap((t) => column(t, "re"));
  const ims = tables.flatMap((t) => column(t, "im"));
  const xScale = linearScale(padded(finiteExtent(res.concat(0))), range.x);
  const yScale = linearScale(padded(finiteExtent(ims)), range.y);
  svg.axes(xScale, yScale, "real part", "imaginary part");
  // the imaginary axis separates stable from unstable modes
  svg.line(xScale(0), range.y[0], xScale(0), range.y[1], 'stroke="#444" stroke-width="1" stroke-dasharray="6,3"');
  tables.forEach((table, i) => {
    const re = column(table, "re");
    const im = column(table, "im");
    re.forEach((r, j) => {
      svg.circle(xScale(r), yScale(im[j]), 2.4,
        `fill="${PALETTE[i % PALETTE.length]}" fill-opacity="0.75"`);
    });
  });
  legend(svg, tables.map((t, i) => spec.labels?.[i] ?? basename(t.path)));
}

function legend(svg: SvgBuilder, labels: string[]): void {
  labels.slice(0, 6).forEach((label, i) => {
    const y = MARGIN.top + 6 + 16 * i;
    svg.line(MARGIN.left + 8, y - 4, MARGIN.left + 26, y - 4,
      `stroke="${PALETTE[i % PALETTE.length]}" stroke-width="2"`);
    svg.text(MARGIN.left + 32, y, label, 'font-size="11"');
  });
}

function padded([lo, hi]: [number, number]): [number, number] {
  const pad = (hi - lo || Math.abs(lo) || 1) * 0.06;
  return [lo - pad, hi + pad];
}
