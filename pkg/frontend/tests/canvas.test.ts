// Canvas/revision banner state machine.

import { describe, expect, it } from "vitest";

import { fetchFailed, initialCanvas, isStale, revisionSeen, svgLoaded } from "../src/canvas.js";

describe("canvas revision tracking", () => {
  it("fresh load is not stale", () => {
    const state = svgLoaded(initialCanvas(), "cloud", "<svg/>", 1);
    expect(isStale(state)).toBe(false);
  });

  it("a newer server revision raises the stale banner", () => {
    let state = svgLoaded(initialCanvas(), "cloud", "<svg/>", 1);
    state = revisionSeen(state, 2);
    expect(isStale(state)).toBe(true);
  });

  it("re-fetching at the new revision clears the banner", () => {
    let state = svgLoaded(initialCanvas(), "cloud", "<svg/>", 1);
    state = revisionSeen(state, 2);
    state = svgLoaded(state, "cloud", "<svg v2/>", 2);
    expect(isStale(state)).toBe(false);
  });

  it("failures count attempts for the retry backoff", () => {
    let state = fetchFailed(initialCanvas(), "boom");
    state = fetchFailed(state, "boom again");
    expect(state.fetchAttempt).toBe(2);
    expect(state.error).toBe("boom again");
  });
});
