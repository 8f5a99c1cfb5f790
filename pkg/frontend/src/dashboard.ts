// Live KPI dashboard state: one tile per KPI driven by kpi_status events,
// sparklines of evaluated values over time, an action log fed by transition
// events, and trace drill-down formatting. Pure reducers; the DOM layer in
// main.ts only paints this state.

import type { KpiStatus, ServerEvent, TraceResult, TransitionEvent } from "./types.js";

export type TileTone = "ok" | "alert" | "neutral";

export interface Tile {
  kpiId: string;
  state: "met" | "missed" | "unknown";
  tone: TileTone;
  value: number | null;
  asOf: string;
  inputsUsed: number;
}

export interface SparklinePoint {
  asOf: string;
  value: number | null;
}

export interface ActionEntry {
  kpiId: string;
  firedActions: string[];
  at: string;
}

export interface DashboardState {
  tiles: Record<string, Tile>;
  sparklines: Record<string, SparklinePoint[]>;
  actionLog: ActionEntry[];
  revision: number | null;
  staleRevision: boolean;
  dropped: boolean;
}

export function initialDashboard(revision: number | null = null): DashboardState {
  return {
    tiles: {},
    sparklines: {},
    actionLog: [],
    revision,
    staleRevision: false,
    dropped: false,
  };
}

const TONE: Record<Tile["state"], TileTone> = {
  met: "ok",
  missed: "alert",
  unknown: "neutral",
};

export function applyStatus(state: DashboardState, status: KpiStatus): DashboardState {
  const tile: Tile = {
    kpiId: status.kpi_id,
    state: status.state,
    tone: TONE[status.state],
    value: status.value,
    asOf: status.as_of,
    inputsUsed: status.inputs_used,
  };
  const series = state.sparklines[status.kpi_id] ?? [];
  const lastPoint = series[series.length - 1];
  const nextSeries =
    lastPoint !== undefined && lastPoint.asOf === status.as_of
      ? series
      : [...series, { asOf: status.as_of, value: status.value }];
  return {
    ...state,
    tiles: { ...state.tiles, [status.kpi_id]: tile },
    sparklines: { ...state.sparklines, [status.kpi_id]: nextSeries },
  };
}

export function applyTransition(
  state: DashboardState,
  transition: TransitionEvent,
  at: string,
): DashboardState {
  return {
    ...state,
    actionLog: [
      ...state.actionLog,
      { kpiId: transition.kpi_id, firedActions: transition.fired_actions, at },
    ],
  };
}

export function reduceEvent(state: DashboardState, event: ServerEvent): DashboardState {
  switch (event.type) {
    case "kpi_status":
      return applyStatus(state, event.data);
    case "kpi_transition": {
      const at = state.tiles[event.data.kpi_id]?.asOf ?? "";
      return applyTransition(state, event.data, at);
    }
    case "revision": {
      const stale = state.revision !== null && event.data.revision !== state.revision;
      return { ...state, staleRevision: stale };
    }
    case "dropped":
      return { ...state, dropped: true };
    default:
      return state;
  }
}

export function reduceAll(state: DashboardState, events: ServerEvent[]): DashboardState {
  return events.reduce(reduceEvent, state);
}

/** Trace drill-down as an ordered path list, one line per relation edge. */
export function tracePathList(trace: TraceResult): string[] {
  return trace.edges.map((edge) => `${edge.from} -[${edge.relation}]-> ${edge.to}`);
}

/** Reconnect backoff schedule after an SSE drop: bounded exponential. */
export function backoffDelayMs(attempt: number, baseMs = 500, capMs = 15_000): number {
  const delay = baseMs * 2 ** Math.max(0, attempt - 1);
  return Math.min(delay, capMs);
}
