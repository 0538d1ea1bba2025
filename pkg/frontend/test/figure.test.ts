import { readFileSync } from "fs";
import { join } from "path";
import { describe, expect, it } from "vitest";
import { groupSeries, renderFigure } from "../src/figure.js";
import { presetSpec } from "../src/presets.js";
import { parseResultsCsv, REQUIRED_COLUMNS } from "../src/schema.js";

const FIXTURE = join(__dirname, "fixtures", "method_ordering.csv");

function fixtureRows() {
  return parseResultsCsv(readFileSync(FIXTURE, "utf8"));
}

function makeCsv(rows: string[]): string {
  return [REQUIRED_COLUMNS.join(","), ...rows].join("\n");
}

describe("groupSeries", () => {
  it("builds exactly one series per method, in CSV order", () => {
    const series = groupSeries(fixtureRows(), "snr_db");
    expect(series.map((s) => s.method)).toEqual([
      "ARV_TSAC",
      "ARV_ONLY",
      "SVD_DFT",
      "SVD",
      "GREEDY_MI",
    ]);
    for (const s of series) {
      expect(s.points.length).toBe(3);
      expect(s.overlay).toBe(false);
    }
  });

  it("marks closed-form rows as overlays", () => {
    const rows = parseResultsCsv(
      makeCsv([
        "snr_db,0,ARV_TSAC,SUM_RATE,10.5,0.2,50,64,22,4,2,0,virtual,1",
        "snr_db,0,EQ29,SUM_RATE,10.8,0.0,0,64,22,4,2,0,virtual,1",
      ]),
    );
    const series = groupSeries(rows, "snr_db");
    expect(series[1].method).toBe("EQ29");
    expect(series[1].overlay).toBe(true);
  });
});

describe("renderFigure", () => {
  it("draws one polyline per method with error bars", () => {
    const svg = renderFigure(fixtureRows(), presetSpec("fig_mi_vs_snr"));
    expect((svg.match(/<polyline /g) ?? []).length).toBe(5);
    for (const method of ["ARV_TSAC", "ARV_ONLY", "SVD_DFT", "SVD", "GREEDY_MI"]) {
      expect(svg).toContain(`data-method="${method}"`);
      expect(svg).toContain(`>${method}</text>`); // legend label verbatim
    }
    // 5 methods x 3 points, stderr > 0 everywhere
    expect((svg.match(/class="errorbar"/g) ?? []).length).toBe(15);
    expect(svg).toContain("SNR (dB)");
  });

  it("renders byte-identical output on re-render", () => {
    const rows = fixtureRows();
    const a = renderFigure(rows, presetSpec("fig_mi_vs_snr"));
    const b = renderFigure(parseResultsCsv(readFileSync(FIXTURE, "utf8")),
                           presetSpec("fig_mi_vs_snr"));
    expect(a).toBe(b);
    expect(a).not.toMatch(/\d{4}-\d{2}-\d{2}/); // no dates baked in
  });

  it("draws overlays dashed without markers", () => {
    const rows = parseResultsCsv(
      makeCsv([
        "snr_db,0,ARV_TSAC,SUM_RATE,10.5,0.2,50,64,22,4,2,0,virtual,1",
        "snr_db,5,ARV_TSAC,SUM_RATE,11.5,0.2,50,64,22,4,2,5,virtual,1",
        "snr_db,0,EQ29,SUM_RATE,10.8,0.0,0,64,22,4,2,0,virtual,1",
        "snr_db,5,EQ29,SUM_RATE,11.8,0.0,0,64,22,4,2,5,virtual,1",
      ]),
    );
    const svg = renderFigure(rows, presetSpec("fig_theory_vs_sim"));
    const overlayGroup = svg.split(`data-method="EQ29"`)[1].split("</g>")[0];
    expect(overlayGroup).toContain("stroke-dasharray");
    expect(overlayGroup).not.toContain("<circle");
    const simGroup = svg.split(`data-method="ARV_TSAC"`)[1].split("</g>")[0];
    expect(simGroup).not.toContain("stroke-dasharray");
    expect(simGroup).toContain("<circle");
  });

  it("renders a single point as a marker with an error bar", () => {
    const rows = parseResultsCsv(
      makeCsv(["snr_db,0,SVD,MI,12.25,0.5,20,32,12,4,2,0,rayleigh,3"]),
    );
    const svg = renderFigure(rows, presetSpec("fig_mi_vs_snr"));
    expect((svg.match(/<circle /g) ?? []).length).toBe(1);
    expect((svg.match(/class="errorbar"/g) ?? []).length).toBe(1);
  });

  it("uses a log x axis for RF-chain sweeps", () => {
    const rows = parseResultsCsv(
      makeCsv([
        "n_antennas,96,SVD_DFT,MI,30.0,0.1,10,96,32,8,2,0,rayleigh,1",
        "n_antennas,192,SVD_DFT,MI,38.0,0.1,10,192,64,8,2,0,rayleigh,1",
        "n_antennas,384,SVD_DFT,MI,46.0,0.1,10,384,128,8,2,0,rayleigh,1",
      ]),
    );
    const spec = presetSpec("fig_mi_vs_nrf_fixed_ratio");
    expect(spec.logX).toBe(true);
    const svg = renderFigure(rows, spec);
    // equal MI steps per doubling land equally far apart on a log axis
    const xs = [...svg.matchAll(/<circle cx="([\d.]+)"/g)].map((m) => Number(m[1]));
    xs.sort((a, b) => a - b);
    expect(xs[1] - xs[0]).toBeCloseTo(xs[2] - xs[1], 6);
  });

  it("rejects unknown presets with the known list", () => {
    expect(() => presetSpec("fig_bogus")).toThrowError(/fig_mi_vs_snr/);
  });
});
