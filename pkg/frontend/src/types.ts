// Response shapes of the risk service; the dashboard renders these verbatim
// and never recomputes risk on the client.

export interface Thresholds {
  low_upper: number;
  medium_upper: number;
}

export interface ConfigDoc {
  thresholds: Thresholds;
  defaults: { window_days: number; max_delay: number; min_overlap: number };
}

export interface ModelInfo {
  name: string;
  n_in: number;
  n_hidden: number;
  n_out: number;
  baseline: string | null;
  sources: string[] | null;
  n_steps: number | null;
  grid: { rows: number; cols: number; resolution: string };
}

export interface RiskMapDoc {
  format_version: number;
  timestamp: string;
  rows: number;
  cols: number;
  bbox: { lat_min: number; lat_max: number; lon_min: number; lon_max: number };
  resolution: string;
  risk: number[];
  levels: string[];
  thresholds: Thresholds;
}

export interface ScenarioResponse {
  model: string;
  description: string;
  summary: number[];
  thresholds: Thresholds;
  maps: RiskMapDoc[];
}

export interface OverrideDoc {
  source: string;
  steps: [number, number];
  mode: "set" | "mul";
  value: number;
}

export interface ScenarioDoc {
  description?: string;
  overrides: OverrideDoc[];
}

export interface ApiError {
  code: string;
  message: string;
}
