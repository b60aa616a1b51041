/* The annotate / save / reload loop against intercepted network traffic. */

import { describe, expect, it } from "vitest";

import { Annotation, ApiClient, CurvePayload } from "../src/api.js";
import { buildScene } from "../src/scene.js";
import {
  SLANT_LIMIT,
  adjustSlant,
  annotationsForSave,
  curveLoaded,
  initialState,
  saveApplied,
  snapApplied,
  undoPending,
} from "../src/state.js";
import {
  curveFixture,
  interceptFetch,
  savedFixture,
  snapFixture,
} from "./fixtures.js";

describe("snap-to-annotate", () => {
  it("clicking near an extremum places the marker at the service point", async () => {
    const api = new ApiClient("");
    const payload = curveFixture();
    const snap = snapFixture();
    const calls = interceptFetch([
      [/snap/, () => ({ payload: snap })],
    ]);
    let state = curveLoaded(initialState(), "eta", payload);

    // click on the curve 0.03 arc length before the known extremum at s=0.5;
    // the click position is NOT the extremum position
    const click: [number, number] = [0.455, -1.245];
    const resp = await api.snap("eta", { point: click, kind: "min" });
    state = snapApplied(state, "baseline", "min", resp);

    expect(calls[0].body).toEqual({ point: click, kind: "min" });
    const markers = buildScene(state).markers.filter((m) => m.pending);
    expect(markers).toHaveLength(1);
    expect(markers[0].x).toBe(snap.x); // service-returned point, not the click
    expect(markers[0].y).toBe(snap.y);
    expect(markers[0].s).toBe(snap.s);
  });

  it("a not-found snap shows a toast and places no marker", async () => {
    const api = new ApiClient("");
    interceptFetch([[/snap/, () => ({
      payload: { found: false, s_guess: 0.5, nearest: { s: 0.2, kind: "max" } },
    })]]);
    let state = curveLoaded(initialState(), "eta", curveFixture());
    const resp = await api.snap("eta", { s_guess: 0.5, kind: "min" });
    state = snapApplied(state, "baseline", "min", resp);
    expect(state.pending).toHaveLength(0);
    expect(state.toast).toMatch(/no matching extremum/);
  });

  it("undo removes the last pending marker without a server call", async () => {
    const api = new ApiClient("");
    const calls = interceptFetch([[/snap/, () => ({ payload: snapFixture() })]]);
    let state = curveLoaded(initialState(), "eta", curveFixture());
    state = snapApplied(state, "baseline", "min", await api.snap("eta", { s_guess: 0.45, kind: "min" }));
    state = snapApplied(state, "xline", "max", await api.snap("eta", { s_guess: 0.9, kind: "max" }));
    const before = calls.length;
    state = undoPending(state);
    expect(calls.length).toBe(before); // no network traffic from undo
    expect(state.pending.map((p) => p.type)).toEqual(["baseline"]);
    state = undoPending(state);
    state = undoPending(state); // extra undo is a no-op
    expect(state.pending).toEqual([]);
  });
});

describe("save and reload", () => {
  it("round-trips annotations exactly and refreshes width from the server", async () => {
    const api = new ApiClient("");
    const payload = curveFixture();
    let storedAnnotations: Annotation[] = payload.annotations;
    let storedSlant = payload.slant_deg;

    const calls = interceptFetch([
      [/annotations/, (call) => {
        const body = call.body as { annotations: Annotation[]; slant_deg: number };
        storedAnnotations = body.annotations;
        storedSlant = body.slant_deg;
        return { payload: savedFixture(storedAnnotations, storedSlant) };
      }],
      [/curve/, () => ({
        payload: {
          ...curveFixture(),
          annotations: storedAnnotations,
          slant_deg: storedSlant,
          revision: 4,
        } satisfies CurvePayload,
      })],
      [/snap/, () => ({ payload: snapFixture() })],
    ]);

    let state = curveLoaded(initialState(), "eta", payload);
    state = snapApplied(state, "xline", "max", await api.snap("eta", { s_guess: 0.9, kind: "max" }));
    state = adjustSlant(state, +3);

    const toSave = annotationsForSave(state);
    expect(toSave).toEqual([
      { s: 0.5, type: "baseline", kind: "min" },
      { s: 0.5, type: "xline", kind: "max" },
    ]);

    const saved = await api.saveAnnotations("eta", toSave, state.slantDeg, state.revision!);
    state = saveApplied(state, saved);
    expect(state.widthReadout).toBe(saved.width); // server's recomputed width
    expect(state.revision).toBe(4);

    // reload: the server is now the source of the markers
    const reloaded = await api.curve("eta");
    state = curveLoaded(state, "eta", reloaded);
    expect(state.curve!.annotations).toEqual(toSave);
    expect(state.pending).toEqual([]);
    expect(state.slantDeg).toBe(7); // 4 from the fixture, +3 from the spinner

    const putCall = calls.find((c) => c.method === "PUT")!;
    expect(putCall.body).toEqual({ annotations: toSave, slant_deg: 7, revision: 3 });
  });
});

describe("slant spinner", () => {
  it("moves in whole-degree steps", () => {
    let state = curveLoaded(initialState(), "eta", curveFixture());
    expect(state.slantDeg).toBe(4);
    state = adjustSlant(state, +1);
    state = adjustSlant(state, +1);
    state = adjustSlant(state, -1);
    expect(state.slantDeg).toBe(5);
    state = adjustSlant(state, 2.4); // fractional deltas snap to degrees
    expect(state.slantDeg).toBe(7);
  });

  it("clamps strictly inside (-89, 89)", () => {
    let state = initialState();
    state = adjustSlant(state, 500);
    expect(state.slantDeg).toBe(SLANT_LIMIT);
    state = adjustSlant(state, -5000);
    expect(state.slantDeg).toBe(-SLANT_LIMIT);
    expect(SLANT_LIMIT).toBeLessThan(89);
  });
});
