/** Minimal deterministic SVG line charts: no DOM, no randomness. */

export interface Series {
  label: string;
  color: string;
  points: { x: number; y: number }[];
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  width?: number;
  height?: number;
}

const MARGIN = { top: 34, right: 150, bottom: 44, left: 64 };

function fmt(value: number): string {
  return Number(value.toPrecision(6)).toString();
}

function niceTicks(min: number, max: number, count: number): number[] {
  if (min === max) {
    return [min];
  }
  const span = max - min;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / (count * step);
  const factor = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const size = factor * step;
  const start = Math.ceil(min / size) * size;
  const ticks: number[] = [];
  for (let v = start; v <= max + 1e-12; v += size) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

export function lineChart(series: Series[], options: ChartOptions): string {
  const width = options.width ?? 640;
  const height = options.height ?? 420;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ys = series.flatMap((s) => s.points.map((p) => p.y));
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  let yMin = Math.min(...ys);
  let yMax = Math.max(...ys);
  if (yMin === yMax) {
    yMin -= 0.5;
    yMax += 0.5;
  } else {
    const pad = 0.05 * (yMax - yMin);
    yMin -= pad;
    yMax += pad;
  }

  const sx = (x: number) =>
    xMin === xMax
      ? MARGIN.left + plotW / 2
      : MARGIN.left + ((x - xMin) / (xMax - xMin)) * plotW;
  const sy = (y: number) => MARGIN.top + plotH - ((y - yMin) / (yMax - yMin)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="20" text-anchor="middle" ` +
      `font-size="15">${options.title}</text>`,
  );

  for (const t of niceTicks(xMin, xMax, 6)) {
    const px = fmt(sx(t));
    parts.push(
      `<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${MARGIN.top + plotH}" ` +
        `stroke="#dddddd"/>`,
      `<text x="${px}" y="${MARGIN.top + plotH + 18}" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  for (const t of niceTicks(yMin, yMax, 6)) {
    const py = fmt(sy(t));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + plotW}" y2="${py}" ` +
        `stroke="#dddddd"/>`,
      `<text x="${MARGIN.left - 8}" y="${py}" text-anchor="end" ` +
        `dominant-baseline="middle">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333333"/>`,
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 8}" ` +
      `text-anchor="middle">${options.xLabel}</text>`,
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${options.yLabel}</text>`,
  );

  series.forEach((s, i) => {
    const coords = s.points
      .map((p) => `${fmt(sx(p.x))},${fmt(sy(p.y))}`)
      .join(" ");
    parts.push(
      `<polyline fill="none" stroke="${s.color}" stroke-width="2" points="${coords}"/>`,
    );
    for (const p of s.points) {
      parts.push(
        `<circle cx="${fmt(sx(p.x))}" cy="${fmt(sy(p.y))}" r="3" fill="${s.color}"/>`,
      );
    }
    const ly = MARGIN.top + 14 + i * 20;
    const lx = MARGIN.left + plotW + 16;
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" ` +
        `stroke="${s.color}" stroke-width="2"/>`,
      `<text x="${lx + 28}" y="${ly}">${s.label}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
