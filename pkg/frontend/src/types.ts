/** Wire types for the flowsteps HTTP API (snake_case mirrors the server). */

export interface PlaceInfo {
  id: string;
  label: string;
}

export interface TransitionInfo {
  id: string;
  label: string;
}

export interface ArcInfo {
  id: string;
  source: string;
  target: string;
  weight: number;
}

export interface ConstructEntry {
  node: string;
  kind: string;
}

export interface NetInfo {
  id: string;
  places: PlaceInfo[];
  transitions: TransitionInfo[];
  arcs: ArcInfo[];
  initial_marking: Record<string, number>;
  constructs: ConstructEntry[];
}

export interface EnabledEntry {
  id: string;
  label: string;
  construct: string[];
  or_alternative: boolean;
}

export interface SessionState {
  marking: Record<string, number>;
  enabled: EnabledEntry[];
  log_length: number;
}

export type StepStatus = "Passed" | "Failed" | "Pending" | "Ambiguous";

export interface StepResult {
  step_text: string;
  status: StepStatus;
  message: string;
  duration_ms: number;
}

export interface GwtTriple {
  given: string[];
  when: string;
  then: string[];
  parallel: boolean;
}

export interface FiringReport {
  transition: string;
  gwt: GwtTriple;
  step_results: StepResult[];
  status: StepStatus;
  advanced: boolean;
  marking_after: Record<string, number>;
  parallel_branch_reports: unknown;
}

export interface SessionHandle {
  session_id: string;
  created_at: number;
  state: SessionState;
}

export interface ModelsListing {
  models: string[];
  bindings: string[];
  suts: string[];
}
