// Scenario draft model: per-source controls that map one-to-one onto the
// service's override schema, plus URL (de)serialization so any view is a
// shareable link.

import { OverrideDoc, ScenarioDoc } from "./types.js";

export interface SourceControl {
  source: string;
  enabled: boolean;
  mode: "set" | "mul";
  value: number; // multiplier in [0, 2] for "mul", absolute value for "set"
  stepFrom: number; // half-open range [stepFrom, stepTo)
  stepTo: number;
}

export interface ScenarioDraft {
  description: string;
  controls: SourceControl[];
}

export const MULTIPLIER_MIN = 0;
export const MULTIPLIER_MAX = 2;

export function neutralDraft(sources: string[], nSteps: number): ScenarioDraft {
  return {
    description: "",
    controls: sources.map((source) => ({
      source,
      enabled: false,
      mode: "mul",
      value: 1,
      stepFrom: 0,
      stepTo: nSteps,
    })),
  };
}

export function controlErrors(control: SourceControl, nSteps: number): string[] {
  const errors: string[] = [];
  if (!Number.isFinite(control.value)) errors.push("value must be a number");
  if (control.mode === "mul" && (control.value < MULTIPLIER_MIN || control.value > MULTIPLIER_MAX)) {
    errors.push(`multiplier must stay in [${MULTIPLIER_MIN}, ${MULTIPLIER_MAX}]`);
  }
  if (!Number.isInteger(control.stepFrom) || !Number.isInteger(control.stepTo)) {
    errors.push("step range must be whole numbers");
  }
  if (control.stepFrom < 0 || control.stepTo > nSteps || control.stepFrom >= control.stepTo) {
    errors.push(`step range must satisfy 0 <= from < to <= ${nSteps}`);
  }
  return errors;
}

export function draftErrors(draft: ScenarioDraft, nSteps: number): Map<string, string[]> {
  const out = new Map<string, string[]>();
  for (const control of draft.controls) {
    if (!control.enabled) continue;
    const errors = controlErrors(control, nSteps);
    if (errors.length) out.set(control.source, errors);
  }
  return out;
}

export function draftToScenario(draft: ScenarioDraft): ScenarioDoc {
  const overrides: OverrideDoc[] = draft.controls
    .filter((c) => c.enabled)
    .map((c) => ({
      source: c.source,
      steps: [c.stepFrom, c.stepTo] as [number, number],
      mode: c.mode,
      value: c.value,
    }));
  return { description: draft.description, overrides };
}

// --- URL state ------------------------------------------------------------
// ?model=M&t=3&desc=...&c=<source>~<mode>~<value>~<from>~<to>(,...)

export interface UrlState {
  model: string | null;
  t: number;
  draft: ScenarioDraft | null;
}

export function encodeUrlState(model: string | null, t: number, draft: ScenarioDraft): string {
  const params = new URLSearchParams();
  if (model) params.set("model", model);
  if (t > 0) params.set("t", String(t));
  if (draft.description) params.set("desc", draft.description);
  const enabled = draft.controls.filter((c) => c.enabled);
  if (enabled.length) {
    params.set(
      "c",
      enabled
        .map((c) =>
          [encodeURIComponent(c.source), c.mode, c.value, c.stepFrom, c.stepTo].join("~"),
        )
        .join(","),
    );
  }
  const text = params.toString();
  return text ? `?${text}` : "";
}

export function decodeUrlState(query: string, sources: string[], nSteps: number): UrlState {
  const params = new URLSearchParams(query.startsWith("?") ? query.slice(1) : query);
  const model = params.get("model");
  const t = Math.max(0, Number.parseInt(params.get("t") ?? "0", 10) || 0);
  const draft = neutralDraft(sources, nSteps);
  draft.description = params.get("desc") ?? "";

  const packed = params.get("c");
  if (packed) {
    for (const item of packed.split(",")) {
      const [rawSource, mode, value, from, to] = item.split("~");
      const source = decodeURIComponent(rawSource ?? "");
      const control = draft.controls.find((c) => c.source === source);
      if (!control) continue;
      if (mode !== "set" && mode !== "mul") continue;
      control.enabled = true;
      control.mode = mode;
      control.value = Number(value);
      control.stepFrom = Number.parseInt(from ?? "0", 10) || 0;
      control.stepTo = Number.parseInt(to ?? String(nSteps), 10) || nSteps;
    }
  }
  return { model, t, draft };
}
