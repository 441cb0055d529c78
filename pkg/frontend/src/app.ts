// DOM wiring: builds controls from the selected model's baseline sources,
// keeps the URL in sync, and renders the comparison view.

import { ApiClient } from "./api.js";
import { ComparisonView, DashboardController, describeError } from "./controller.js";
import { legendHtml, mapGridHtml, trajectoryPath } from "./render.js";
import {
  MULTIPLIER_MAX,
  MULTIPLIER_MIN,
  ScenarioDraft,
  decodeUrlState,
  encodeUrlState,
  neutralDraft,
} from "./state.js";
import { ModelInfo } from "./types.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8000";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class App {
  private api = new ApiClient(SERVICE_URL);
  private controller = new DashboardController(this.api, {
    onView: (view) => this.renderView(view),
    onBanner: (message) => this.renderBanner(message),
    onControlErrors: (errors) => this.renderControlErrors(errors),
  });
  private draft: ScenarioDraft = { description: "", controls: [] };
  private models: ModelInfo[] = [];
  private nSteps = 0;

  async start(): Promise<void> {
    el<HTMLButtonElement>("banner-dismiss").onclick = () => this.renderBanner(null);
    el<HTMLButtonElement>("submit").onclick = () => void this.submit();
    el<HTMLInputElement>("scrub").oninput = (ev) => {
      this.controller.scrub(Number((ev.target as HTMLInputElement).value));
      this.syncUrl();
    };

    try {
      this.models = await this.api.models();
    } catch (err) {
      this.renderBanner(describeError(err));
      return;
    }
    if (this.models.length === 0) {
      el("onboarding").hidden = false;
      return;
    }

    const select = el<HTMLSelectElement>("model");
    select.innerHTML = this.models
      .map((m) => `<option value="${m.name}">${m.name} (${m.grid.rows}x${m.grid.cols})</option>`)
      .join("");
    select.onchange = () => void this.selectModel(select.value);

    const fromUrl = new URLSearchParams(window.location.search).get("model");
    const initial = this.models.find((m) => m.name === fromUrl)?.name ?? this.models[0].name;
    select.value = initial;
    await this.selectModel(initial);
  }

  private async selectModel(name: string): Promise<void> {
    let baseline;
    try {
      baseline = await this.controller.loadBaseline(name);
    } catch {
      return; // banner already shown
    }
    this.nSteps = baseline.summary.length;
    const sources = this.models.find((m) => m.name === name)?.sources ?? [];
    const urlState = decodeUrlState(window.location.search, sources, this.nSteps);
    this.draft =
      urlState.model === name && urlState.draft ? urlState.draft : neutralDraft(sources, this.nSteps);
    this.controller.scrub(urlState.model === name ? urlState.t : 0);
    this.buildControls();
    if (this.draft.controls.some((c) => c.enabled)) void this.submit();
  }

  private buildControls(): void {
    const host = el("controls");
    host.innerHTML = "";
    for (const control of this.draft.controls) {
      const row = document.createElement("div");
      row.className = "control-row";
      row.dataset.source = control.source;
      row.innerHTML =
        `<label><input type="checkbox" class="enable" ${control.enabled ? "checked" : ""}/> ` +
        `${control.source}</label>` +
        `<select class="mode">` +
        `<option value="mul" ${control.mode === "mul" ? "selected" : ""}>scale</option>` +
        `<option value="set" ${control.mode === "set" ? "selected" : ""}>set</option>` +
        `</select>` +
        `<input type="range" class="value" min="${MULTIPLIER_MIN}" max="${MULTIPLIER_MAX}" ` +
        `step="0.05" value="${control.value}"/>` +
        `<input type="number" class="value-num" step="0.05" value="${control.value}"/>` +
        `<input type="number" class="from" min="0" max="${this.nSteps - 1}" value="${control.stepFrom}"/>` +
        `<input type="number" class="to" min="1" max="${this.nSteps}" value="${control.stepTo}"/>` +
        `<span class="control-error" hidden></span>`;

      const enable = row.querySelector<HTMLInputElement>(".enable")!;
      const mode = row.querySelector<HTMLSelectElement>(".mode")!;
      const slider = row.querySelector<HTMLInputElement>(".value")!;
      const num = row.querySelector<HTMLInputElement>(".value-num")!;
      const from = row.querySelector<HTMLInputElement>(".from")!;
      const to = row.querySelector<HTMLInputElement>(".to")!;

      enable.onchange = () => {
        control.enabled = enable.checked;
        this.syncUrl();
      };
      mode.onchange = () => {
        control.mode = mode.value as "set" | "mul";
        slider.hidden = control.mode === "set";
        this.syncUrl();
      };
      slider.oninput = () => {
        control.value = Number(slider.value);
        num.value = slider.value;
        this.syncUrl();
      };
      num.oninput = () => {
        control.value = Number(num.value);
        if (control.mode === "mul") slider.value = num.value;
        this.syncUrl();
      };
      from.oninput = () => {
        control.stepFrom = Number(from.value);
        this.syncUrl();
      };
      to.oninput = () => {
        control.stepTo = Number(to.value);
        this.syncUrl();
      };
      host.appendChild(row);
    }
    const desc = el<HTMLInputElement>("description");
    desc.value = this.draft.description;
    desc.oninput = () => {
      this.draft.description = desc.value;
      this.syncUrl();
    };
  }

  private async submit(): Promise<void> {
    try {
      await this.controller.submit(this.draft);
    } catch {
      // banner already shown by the controller
    }
  }

  private renderView(view: ComparisonView): void {
    const scrub = el<HTMLInputElement>("scrub");
    scrub.max = String(view.maxT);
    scrub.value = String(view.t);
    el("legend").innerHTML = legendHtml(view.thresholds);
    el("baseline-map").innerHTML = mapGridHtml(view.baseline.maps[view.t], "baseline");
    el("scenario-map").innerHTML = view.scenario
      ? mapGridHtml(view.scenario.maps[view.t], "scenario")
      : "<p class='placeholder'>submit a scenario to compare</p>";

    const w = 420;
    const h = 140;
    const baselinePath = trajectoryPath(view.baseline.summary, w, h);
    const scenarioPath = view.scenario ? trajectoryPath(view.scenario.summary, w, h) : "";
    el("trajectory").innerHTML =
      `<svg viewBox="0 0 ${w} ${h}" width="${w}" height="${h}">` +
      `<polyline fill="none" stroke="#888" stroke-width="2" points="${baselinePath}"/>` +
      (scenarioPath
        ? `<polyline fill="none" stroke="#1f6feb" stroke-width="2" points="${scenarioPath}"/>`
        : "") +
      `</svg>`;
  }

  private renderBanner(message: string | null): void {
    const banner = el("banner");
    banner.hidden = message === null;
    el("banner-text").textContent = message ?? "";
  }

  private renderControlErrors(errors: Map<string, string[]>): void {
    for (const row of document.querySelectorAll<HTMLElement>(".control-row")) {
      const slot = row.querySelector<HTMLElement>(".control-error")!;
      const messages = errors.get(row.dataset.source ?? "");
      slot.hidden = !messages;
      slot.textContent = messages ? messages.join("; ") : "";
    }
  }

  private syncUrl(): void {
    const query = encodeUrlState(this.controller.model, this.controller.t, this.draft);
    window.history.replaceState(null, "", `${window.location.pathname}${query}`);
  }
}

new App().start();
