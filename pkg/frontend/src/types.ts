// Payload shapes of the saf-toolkit service API. The UI performs no domain
// computation: every classification, suggestion, status and trace shown comes
// from these endpoints.

export type Severity = "error" | "warning" | "info";

export interface Diagnostic {
  code: string;
  severity: Severity;
  message: string;
  file: string | null;
  line: number | null;
  column: number | null;
  related: string[];
}

export interface WorkspaceIndex {
  revision: number;
  documents: Array<{ kind: string; id: string; file: string }>;
}

export interface PutResult {
  revision: number;
  diagnostics: Diagnostic[];
}

export interface ChecklistItem {
  item: string;
  status: "satisfied" | "unsatisfied" | "not_applicable";
  evidence: string;
}

export interface GraphStep {
  level?: string;
  next_question?: string;
  node?: string;
}

export interface Suggestion {
  source_qa: string;
  target_qa: string;
  suggested_type: "positive" | "negative" | "undecided";
  matrix_id: string;
  rationale: string;
}

export type KpiStateName = "met" | "missed" | "unknown";

export interface KpiStatus {
  kpi_id: string;
  value: number | null;
  state: KpiStateName;
  as_of: string;
  inputs_used: number;
}

export interface KpiSpecView {
  id: string;
  name: string;
  csf: string;
  expr: string;
  target: { comparator: string; threshold: number; unit: string };
  concerns: string[];
  on_miss: string[];
}

export interface TraceEdge {
  from: string;
  to: string;
  relation: string;
}

export interface TraceResult {
  kpi_id: string;
  metrics: string[];
  concerns: string[];
  decisions: string[];
  features: string[];
  elements: string[];
  edges: TraceEdge[];
}

export interface TransitionEvent {
  kpi_id: string;
  fired_actions: string[];
}

export interface RevisionEvent {
  revision: number;
  kind: string;
  id: string;
}

export type ServerEvent =
  | { type: "kpi_status"; data: KpiStatus }
  | { type: "kpi_transition"; data: TransitionEvent }
  | { type: "revision"; data: RevisionEvent }
  | { type: "hello"; data: Record<string, never> }
  | { type: "dropped"; data: Record<string, never> };
