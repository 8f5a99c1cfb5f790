// Decision-map canvas state: the server renders the SVG (layout stays
// deterministic and server-side); the client only fetches, displays, tracks
// the revision it is showing, and surfaces element details on selection.

export interface CanvasState {
  dmId: string | null;
  svg: string | null;
  shownRevision: number | null;
  serverRevision: number | null;
  error: string | null;
  fetchAttempt: number;
}

export function initialCanvas(): CanvasState {
  return {
    dmId: null,
    svg: null,
    shownRevision: null,
    serverRevision: null,
    error: null,
    fetchAttempt: 0,
  };
}

export function svgLoaded(state: CanvasState, dmId: string, svg: string, revision: number): CanvasState {
  return {
    ...state,
    dmId,
    svg,
    shownRevision: revision,
    serverRevision: revision,
    error: null,
    fetchAttempt: 0,
  };
}

export function fetchFailed(state: CanvasState, message: string): CanvasState {
  return { ...state, error: message, fetchAttempt: state.fetchAttempt + 1 };
}

export function revisionSeen(state: CanvasState, revision: number): CanvasState {
  return { ...state, serverRevision: revision };
}

/** The banner shows when the canvas displays an older revision than the server holds. */
export function isStale(state: CanvasState): boolean {
  return (
    state.shownRevision !== null &&
    state.serverRevision !== null &&
    state.serverRevision !== state.shownRevision
  );
}
