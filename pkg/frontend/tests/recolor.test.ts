import { describe, expect, it } from "vitest";

import { detectionOutcome, outcomeCounts, rebucket } from "../src/recolor.js";

describe("detectionOutcome", () => {
  it("matches the failure-detection confusion cells", () => {
    expect(detectionOutcome(true, 0.9, 0.5)).toBe("TN");
    expect(detectionOutcome(false, 0.9, 0.5)).toBe("FN"); // silent failure
    expect(detectionOutcome(false, 0.1, 0.5)).toBe("TP");
    expect(detectionOutcome(true, 0.1, 0.5)).toBe("FP");
  });

  it("flags strictly below tau only", () => {
    expect(detectionOutcome(true, 0.5, 0.5)).toBe("TN"); // conf == tau is kept
    expect(detectionOutcome(false, 0.5, 0.5)).toBe("FN");
    expect(detectionOutcome(true, 0.4999999, 0.5)).toBe("FP");
  });

  it("rejects non-finite tau", () => {
    expect(() => detectionOutcome(true, 0.5, NaN)).toThrow(RangeError);
    expect(() => detectionOutcome(true, 0.5, Infinity)).toThrow(RangeError);
  });
});

describe("rebucket", () => {
  it("partitions every record", () => {
    const preds = [0, 1, 1, 0, 2];
    const labels = [0, 1, 0, 1, 2];
    const conf = [0.9, 0.2, 0.8, 0.1, 0.5];
    const counts = outcomeCounts(rebucket(preds, labels, conf, 0.5));
    expect(counts.TP + counts.FP + counts.TN + counts.FN).toBe(5);
    expect(counts).toEqual({ TN: 2, FP: 1, FN: 1, TP: 1 });
  });

  it("checks lengths", () => {
    expect(() => rebucket([0], [0, 1], [0.5], 0.5)).toThrow(RangeError);
  });

  it("everything flagged at tau above the max confidence", () => {
    const out = rebucket([0, 1], [1, 1], [0.3, 0.6], 2.0);
    expect(out).toEqual(["TP", "FP"]);
  });
});
