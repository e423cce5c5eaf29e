#!/usr/bin/env node
/**
 * plot_sweep --in sweep.csv --out-dir figs/
 *
 * Renders privacy_vs_eps.svg (expected inference error vs epsilon) and
 * qloss_vs_eps.svg (service quality loss vs epsilon), one curve per scheme.
 * Exits 1 with a schema message when the CSV is missing a required column.
 */

import { mkdirSync, readFileSync, writeFileSync } from "fs";
import { join } from "path";

import { lineChart, Series } from "./chart";
import { parseSweep, SchemaError, SweepFrame } from "./sweep";

const SCHEME_STYLE: Record<string, { label: string; color: string }> = {
  pive: { label: "PIVE", color: "#1f77b4" },
  uniform: { label: "Uniform", color: "#ff7f0e" },
  personalized: { label: "Personalized", color: "#2ca02c" },
};

function styleFor(scheme: string, index: number): { label: string; color: string } {
  const fallback = ["#d62728", "#9467bd", "#8c564b"];
  return (
    SCHEME_STYLE[scheme] ?? {
      label: scheme,
      color: fallback[index % fallback.length],
    }
  );
}

function toSeries(frame: SweepFrame, metric: "expErr" | "qLoss"): Series[] {
  return frame.schemes.map((scheme, i) => ({
    ...styleFor(scheme, i),
    points: (frame.rows.get(scheme) ?? []).map((row) => ({
      x: row.epsilon,
      y: row[metric],
    })),
  }));
}

export function renderPrivacyFigure(frame: SweepFrame): string {
  return lineChart(toSeries(frame, "expErr"), {
    title: "Privacy vs epsilon",
    xLabel: "epsilon",
    yLabel: "expected inference error (km)",
  });
}

export function renderQualityLossFigure(frame: SweepFrame): string {
  return lineChart(toSeries(frame, "qLoss"), {
    title: "Quality loss vs epsilon",
    xLabel: "epsilon",
    yLabel: "quality loss (km)",
  });
}

interface Args {
  in: string;
  outDir: string;
}

function parseArgs(argv: string[]): Args {
  let input: string | undefined;
  let outDir: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--in") {
      input = argv[++i];
    } else if (argv[i] === "--out-dir") {
      outDir = argv[++i];
    } else {
      throw new Error(`unknown argument: ${argv[i]}`);
    }
  }
  if (!input || !outDir) {
    throw new Error("usage: plot_sweep --in sweep.csv --out-dir figs/");
  }
  return { in: input, outDir };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    const frame = parseSweep(readFileSync(args.in, "utf8"));
    mkdirSync(args.outDir, { recursive: true });
    const privacyPath = join(args.outDir, "privacy_vs_eps.svg");
    const qlossPath = join(args.outDir, "qloss_vs_eps.svg");
    writeFileSync(privacyPath, renderPrivacyFigure(frame));
    writeFileSync(qlossPath, renderQualityLossFigure(frame));
    console.log(`wrote ${privacyPath}`);
    console.log(`wrote ${qlossPath}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
    } else {
      console.error(String(err instanceof Error ? err.message : err));
    }
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
