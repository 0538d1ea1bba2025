import { readFileSync } from "fs";
import { join } from "path";
import { describe, expect, it } from "vitest";
import { parseResultsCsv, REQUIRED_COLUMNS, SchemaError } from "../src/schema.js";

const FIXTURE = join(__dirname, "fixtures", "method_ordering.csv");

describe("parseResultsCsv", () => {
  it("parses the simulator CSV fixture", () => {
    const rows = parseResultsCsv(readFileSync(FIXTURE, "utf8"));
    expect(rows.length).toBe(15); // 3 sweep points x 5 methods
    expect(rows[0].method).toBe("ARV_TSAC");
    expect(rows[0].sweep_variable).toBe("snr_db");
    expect(rows[0].trials).toBe(10);
    expect(rows[0].n_r).toBe(128);
    expect(rows[0].mean).toBeGreaterThan(0);
  });

  it("parses infinite bits", () => {
    const header = REQUIRED_COLUMNS.join(",");
    const row = "snr_db,0,SVD,MI,1.5,0.1,4,16,8,3,inf,0,rayleigh,7";
    const rows = parseResultsCsv(`${header}\n${row}`);
    expect(rows[0].bits).toBe(Infinity);
  });

  it("names the missing column", () => {
    const header = REQUIRED_COLUMNS.filter((c) => c !== "stderr").join(",");
    const row = "snr_db,0,SVD,MI,1.5,4,16,8,3,2,0,rayleigh,7";
    expect(() => parseResultsCsv(`${header}\n${row}`)).toThrowError(
      /missing required column 'stderr'/,
    );
  });

  it("rejects unexpected columns", () => {
    const header = REQUIRED_COLUMNS.join(",") + ",surprise";
    const row = "snr_db,0,SVD,MI,1.5,0.1,4,16,8,3,2,0,rayleigh,7,x";
    expect(() => parseResultsCsv(`${header}\n${row}`)).toThrowError(
      /unexpected column 'surprise'/,
    );
  });

  it("rejects an empty CSV", () => {
    expect(() => parseResultsCsv("")).toThrowError(SchemaError);
  });

  it("rejects a header without data rows", () => {
    expect(() => parseResultsCsv(REQUIRED_COLUMNS.join(","))).toThrowError(
      /no data rows/,
    );
  });

  it("names the column with a non-numeric value", () => {
    const header = REQUIRED_COLUMNS.join(",");
    const row = "snr_db,0,SVD,MI,not_a_number,0.1,4,16,8,3,2,0,rayleigh,7";
    expect(() => parseResultsCsv(`${header}\n${row}`)).toThrowError(
      /column 'mean'/,
    );
  });
});
