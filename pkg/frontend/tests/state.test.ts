import { describe, expect, it } from "vitest";

import { DEFAULT_VIEW_STATE, decodeViewState, encodeViewState, ViewState } from "../src/state.js";

describe("view state URL round-trip", () => {
  it("reproduces a full view exactly", () => {
    const state: ViewState = {
      dataset: "demo",
      scope: "mskcc-acq-target",
      scheme: "csf-confusion",
      channel: "mcd-pe",
      tau: 0.8125,
      selectedIds: ["r00012", "r00999"],
      camera: { position: [1.5, 0.25, -2], target: [0, 0.5, 0] },
    };
    expect(decodeViewState(encodeViewState(state))).toEqual(state);
  });

  it("round-trips the defaults", () => {
    const decoded = decodeViewState(encodeViewState(DEFAULT_VIEW_STATE));
    expect(decoded).toEqual({ ...DEFAULT_VIEW_STATE });
  });

  it("drops malformed fields instead of failing", () => {
    const decoded = decodeViewState("scheme=rainbow&tau=banana&cam=1,2&dataset=x");
    expect(decoded.scheme).toBe("class");
    expect(decoded.tau).toBeNull();
    expect(decoded.camera).toBeNull();
    expect(decoded.dataset).toBe("x");
  });

  it("empty hash gives defaults", () => {
    expect(decodeViewState("")).toEqual({ ...DEFAULT_VIEW_STATE, dataset: "" });
  });
});
