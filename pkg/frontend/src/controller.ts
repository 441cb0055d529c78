// Dashboard state machine, kept DOM-free so it is testable: baseline
// responses are cached per model, at most one scenario request is in flight
// (newer submissions abort and supersede older ones), and timestep scrubbing
// only touches cached responses.

import { ApiClient, ServiceError } from "./api.js";
import { ScenarioDraft, draftErrors, draftToScenario } from "./state.js";
import { ScenarioResponse, Thresholds } from "./types.js";

export interface ComparisonView {
  t: number;
  maxT: number;
  baseline: ScenarioResponse;
  scenario: ScenarioResponse | null;
  thresholds: Thresholds;
}

export interface ControllerEvents {
  onView?: (view: ComparisonView) => void;
  onBanner?: (message: string | null) => void;
  onControlErrors?: (errors: Map<string, string[]>) => void;
}

const NEUTRAL = { description: "", overrides: [] };

export class DashboardController {
  private baselineCache = new Map<string, Promise<ScenarioResponse>>();
  private inflight: AbortController | null = null;
  private requestSeq = 0;

  model: string | null = null;
  baseline: ScenarioResponse | null = null;
  scenario: ScenarioResponse | null = null;
  t = 0;

  constructor(private api: ApiClient, private events: ControllerEvents = {}) {}

  private emitView(): void {
    if (!this.baseline || this.model === null) return;
    this.events.onView?.({
      t: this.t,
      maxT: this.baseline.summary.length - 1,
      baseline: this.baseline,
      scenario: this.scenario,
      thresholds: this.baseline.thresholds,
    });
  }

  /** Baseline trajectory and maps for a model (cached per handle). */
  async loadBaseline(model: string): Promise<ScenarioResponse> {
    if (!this.baselineCache.has(model)) {
      this.baselineCache.set(model, this.api.evaluateScenario(model, NEUTRAL));
    }
    try {
      const response = await this.baselineCache.get(model)!;
      this.model = model;
      this.baseline = response;
      this.scenario = null;
      this.t = Math.min(this.t, response.summary.length - 1);
      this.events.onBanner?.(null);
      this.emitView();
      return response;
    } catch (err) {
      this.baselineCache.delete(model);
      this.events.onBanner?.(describeError(err));
      throw err;
    }
  }

  /**
   * Evaluate the draft; resolves to null when superseded by a newer
   * submission. Validation problems surface per control and nothing is sent.
   */
  async submit(draft: ScenarioDraft): Promise<ScenarioResponse | null> {
    if (!this.model || !this.baseline) throw new Error("no model loaded");
    const problems = draftErrors(draft, this.baseline.summary.length);
    this.events.onControlErrors?.(problems);
    if (problems.size > 0) return null;

    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const seq = ++this.requestSeq;
    try {
      const response = await this.api.evaluateScenario(
        this.model,
        draftToScenario(draft),
        controller.signal,
      );
      if (seq !== this.requestSeq) return null; // superseded while awaiting
      this.scenario = response;
      this.events.onBanner?.(null);
      this.emitView();
      return response;
    } catch (err) {
      if (controller.signal.aborted || isAbortError(err)) return null;
      if (err instanceof ServiceError && err.status === 422) {
        const source = draft.controls.find((c) => err.message.includes(`'${c.source}'`));
        if (source) {
          this.events.onControlErrors?.(new Map([[source.source, [err.message]]]));
          return null;
        }
      }
      this.events.onBanner?.(describeError(err));
      throw err;
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  /** Move the synchronized map pair to timestep t using cached responses. */
  scrub(t: number): void {
    if (!this.baseline) return;
    const max = this.baseline.summary.length - 1;
    this.t = Math.min(Math.max(0, Math.floor(t)), max);
    this.emitView();
  }
}

function isAbortError(err: unknown): boolean {
  return err instanceof Error && err.name === "AbortError";
}

export function describeError(err: unknown): string {
  if (err instanceof ServiceError) return `${err.code}: ${err.message}`;
  if (err instanceof Error) return err.message;
  return String(err);
}
