import { describe, expect, it } from "vitest";

import {
  controlErrors,
  decodeUrlState,
  draftErrors,
  draftToScenario,
  encodeUrlState,
  neutralDraft,
} from "../src/state";

const SOURCES = ["no2_mean", "mobility", "lockdown"];

describe("scenario draft", () => {
  it("neutral draft emits no overrides", () => {
    const draft = neutralDraft(SOURCES, 8);
    expect(draftToScenario(draft)).toEqual({ description: "", overrides: [] });
  });

  it("enabled controls map one-to-one onto the override schema", () => {
    const draft = neutralDraft(SOURCES, 8);
    draft.controls[1].enabled = true;
    draft.controls[1].value = 0.5;
    draft.controls[2].enabled = true;
    draft.controls[2].mode = "set";
    draft.controls[2].value = 3;
    draft.controls[2].stepFrom = 2;
    draft.controls[2].stepTo = 6;
    expect(draftToScenario(draft).overrides).toEqual([
      { source: "mobility", steps: [0, 8], mode: "mul", value: 0.5 },
      { source: "lockdown", steps: [2, 6], mode: "set", value: 3 },
    ]);
  });

  it("disabled controls are never emitted", () => {
    const draft = neutralDraft(SOURCES, 8);
    draft.controls[0].value = 1.7; // adjusted but not enabled
    expect(draftToScenario(draft).overrides).toHaveLength(0);
  });
});

describe("draft validation", () => {
  it("accepts in-range controls", () => {
    const draft = neutralDraft(SOURCES, 8);
    draft.controls[0].enabled = true;
    expect(draftErrors(draft, 8).size).toBe(0);
  });

  it("rejects inverted or out-of-bounds step ranges", () => {
    const control = { ...neutralDraft(SOURCES, 8).controls[0], enabled: true };
    expect(controlErrors({ ...control, stepFrom: 5, stepTo: 5 }, 8)).not.toHaveLength(0);
    expect(controlErrors({ ...control, stepFrom: 0, stepTo: 9 }, 8)).not.toHaveLength(0);
    expect(controlErrors({ ...control, stepFrom: -1, stepTo: 4 }, 8)).not.toHaveLength(0);
  });

  it("rejects multipliers outside the slider range", () => {
    const control = { ...neutralDraft(SOURCES, 8).controls[0], enabled: true };
    expect(controlErrors({ ...control, value: 2.5 }, 8)).not.toHaveLength(0);
    expect(controlErrors({ ...control, value: -0.1 }, 8)).not.toHaveLength(0);
  });

  it("allows any finite value in set mode", () => {
    const control = {
      ...neutralDraft(SOURCES, 8).controls[0],
      enabled: true,
      mode: "set" as const,
      value: 123.4,
    };
    expect(controlErrors(control, 8)).toHaveLength(0);
  });

  it("only enabled controls are validated", () => {
    const draft = neutralDraft(SOURCES, 8);
    draft.controls[0].stepTo = 99; // invalid but disabled
    expect(draftErrors(draft, 8).size).toBe(0);
  });
});

describe("url state", () => {
  it("round-trips model, timestep, and draft", () => {
    const draft = neutralDraft(SOURCES, 8);
    draft.description = "halve mobility after week one";
    draft.controls[1].enabled = true;
    draft.controls[1].value = 0.5;
    draft.controls[1].stepFrom = 2;
    draft.controls[1].stepTo = 8;

    const query = encodeUrlState("mono", 3, draft);
    const decoded = decodeUrlState(query, SOURCES, 8);
    expect(decoded.model).toBe("mono");
    expect(decoded.t).toBe(3);
    expect(decoded.draft).toEqual(draft);
  });

  it("neutral state encodes to an empty query", () => {
    expect(encodeUrlState(null, 0, neutralDraft(SOURCES, 8))).toBe("");
  });

  it("ignores unknown sources and junk params", () => {
    const decoded = decodeUrlState("?model=m&c=ghost~mul~0.5~0~8&t=abc", SOURCES, 8);
    expect(decoded.t).toBe(0);
    expect(decoded.draft!.controls.every((c) => !c.enabled)).toBe(true);
  });

  it("handles sources with url-unsafe names", () => {
    const sources = ["pm 2.5, fine"];
    const draft = neutralDraft(sources, 4);
    draft.controls[0].enabled = true;
    const decoded = decodeUrlState(encodeUrlState("m", 0, draft), sources, 4);
    expect(decoded.draft!.controls[0].enabled).toBe(true);
    expect(decoded.draft!.controls[0].source).toBe("pm 2.5, fine");
  });
});
