import { describe, expect, it } from "vitest";

import { distinctTuples, filterRows, numericColumn, parseCsv, parseNumeric, stringColumn } from "../src/csv.js";

const SAMPLE = "d,p,q,value\n100,1,2,0.5\n100,inf,inf,1.25\n400,1,2,0.75\n";

describe("parseCsv", () => {
  it("splits header and rows", () => {
    const t = parseCsv(SAMPLE);
    expect(t.columns).toEqual(["d", "p", "q", "value"]);
    expect(t.rows).toHaveLength(3);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow(/empty/);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1,2,3\n")).toThrow(/ragged/);
  });
});

describe("columns", () => {
  it("reads numeric columns with inf cells", () => {
    const t = parseCsv(SAMPLE);
    expect(numericColumn(t, "value")).toEqual([0.5, 1.25, 0.75]);
    expect(stringColumn(t, "p")).toEqual(["1", "inf", "1"]);
    expect(parseNumeric("inf")).toBe(Infinity);
  });

  it("round-trips 17-digit floats", () => {
    expect(parseNumeric("3.1415926535897931")).toBeCloseTo(Math.PI, 15);
  });

  it("errors on a missing column", () => {
    const t = parseCsv(SAMPLE);
    expect(() => numericColumn(t, "nope")).toThrow(/missing column 'nope'/);
  });

  it("errors on non-numeric cells", () => {
    const t = parseCsv("a\nxyz\n");
    expect(() => numericColumn(t, "a")).toThrow(/non-numeric/);
  });
});

describe("filters", () => {
  it("filters rows by string match", () => {
    const t = parseCsv(SAMPLE);
    const sub = filterRows(t, { d: "100", p: "1" });
    expect(sub.rows).toEqual([["100", "1", "2", "0.5"]]);
  });

  it("lists distinct tuples in order", () => {
    const t = parseCsv(SAMPLE);
    expect(distinctTuples(t, ["p", "q"])).toEqual([["1", "2"], ["inf", "inf"]]);
  });
});
