// Every scenario JSON the UI can emit must validate against the service's
// published schema; swept here over a coarse grid of reachable control states.

import { describe, expect, it } from "vitest";

import { validateAgainstSchema } from "../src/schema";
import { draftToScenario, neutralDraft } from "../src/state";
import schema from "./fixtures/scenario.schema.json";

const SOURCES = ["no2_mean", "mobility", "lockdown"];
const N_STEPS = 8;

describe("published schema sanity", () => {
  it("accepts a plain valid scenario", () => {
    const doc = {
      description: "x",
      overrides: [{ source: "mobility", steps: [0, 8], mode: "mul", value: 0.5 }],
    };
    expect(validateAgainstSchema(schema, doc)).toEqual([]);
  });

  it("rejects structurally broken scenarios", () => {
    const bad = [
      { overrides: [{ source: "a", steps: [0], mode: "mul", value: 1 }] }, // steps too short
      { overrides: [{ source: "a", steps: [0, 2], mode: "double", value: 1 }] }, // bad mode
      { overrides: [{ source: "", steps: [0, 2], mode: "set", value: 1 }] }, // empty source
      { overrides: [{ source: "a", steps: [0, 2], mode: "set" }] }, // missing value
      { overrides: [{ source: "a", steps: [-1, 2], mode: "set", value: 1 }] }, // negative step
      { description: "no overrides key" },
      { overrides: [], extra: true }, // additional property
    ];
    for (const doc of bad) {
      expect(validateAgainstSchema(schema, doc)).not.toEqual([]);
    }
  });
});

describe("ui-reachable control states conform to the schema", () => {
  it("validates across the coarse control grid", () => {
    const modes = ["mul", "set"] as const;
    const mulValues = [0, 0.25, 0.5, 1, 1.5, 2];
    const setValues = [0, 0.1, 1, 10];
    const ranges: Array<[number, number]> = [
      [0, N_STEPS],
      [0, 1],
      [2, 5],
      [N_STEPS - 1, N_STEPS],
    ];

    let checked = 0;
    for (const source of SOURCES) {
      for (const mode of modes) {
        const values = mode === "mul" ? mulValues : setValues;
        for (const value of values) {
          for (const [from, to] of ranges) {
            const draft = neutralDraft(SOURCES, N_STEPS);
            const control = draft.controls.find((c) => c.source === source)!;
            control.enabled = true;
            control.mode = mode;
            control.value = value;
            control.stepFrom = from;
            control.stepTo = to;
            const errors = validateAgainstSchema(schema, draftToScenario(draft));
            expect(errors, JSON.stringify(draftToScenario(draft))).toEqual([]);
            checked++;
          }
        }
      }
    }
    expect(checked).toBe(SOURCES.length * (mulValues.length + setValues.length) * ranges.length);
  });

  it("validates multi-control combinations and the neutral draft", () => {
    const neutral = neutralDraft(SOURCES, N_STEPS);
    expect(validateAgainstSchema(schema, draftToScenario(neutral))).toEqual([]);

    const combo = neutralDraft(SOURCES, N_STEPS);
    combo.description = "combined adjustments";
    combo.controls[0].enabled = true;
    combo.controls[0].mode = "set";
    combo.controls[0].value = 0.05;
    combo.controls[1].enabled = true;
    combo.controls[1].value = 0.5;
    combo.controls[2].enabled = true;
    combo.controls[2].value = 2;
    combo.controls[2].stepFrom = 3;
    combo.controls[2].stepTo = 6;
    expect(validateAgainstSchema(schema, draftToScenario(combo))).toEqual([]);
  });
});
