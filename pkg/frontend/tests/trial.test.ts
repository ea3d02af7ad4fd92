import { describe, expect, test } from "vitest";

import { TrialState, scaleLabel } from "../src/trial.js";
import type { StimulusRef } from "../src/types.js";

function stimuli(n: number): StimulusRef[] {
  return Array.from({ length: n }, (_, i) => ({
    stimulus_id: `stim${i}`,
    url: `/api/audio/hash${i}.wav`,
  }));
}

describe("submit gating", () => {
  test("blocked until every stimulus is auditioned and rated", () => {
    const state = new TrialState(stimuli(8));
    expect(state.canSubmit()).toBe(false);

    for (let i = 0; i < 8; i++) state.markAuditioned(`stim${i}`);
    expect(state.canSubmit()).toBe(false); // heard but unrated

    for (let i = 0; i < 7; i++) state.setRating(`stim${i}`, 10 * i);
    expect(state.canSubmit()).toBe(false); // one slider untouched
    expect(state.missing().unrated).toEqual(["stim7"]);

    state.setRating("stim7", 70);
    expect(state.canSubmit()).toBe(true);
    expect(state.missing()).toEqual({ unheard: [], unrated: [] });
  });

  test("rating without auditioning does not open the gate", () => {
    const state = new TrialState(stimuli(3));
    for (let i = 0; i < 3; i++) state.setRating(`stim${i}`, 50);
    expect(state.canSubmit()).toBe(false);
    expect(state.missing().unheard).toHaveLength(3);
  });

  test("payload refuses incomplete trials", () => {
    const state = new TrialState(stimuli(2));
    expect(() => state.payload()).toThrow(/not complete/);
  });
});

describe("slider values", () => {
  test("sent exactly as displayed, no transformation", () => {
    const state = new TrialState(stimuli(3));
    const values = [0, 37, 100];
    for (let i = 0; i < 3; i++) {
      state.markAuditioned(`stim${i}`);
      state.setRating(`stim${i}`, values[i]);
    }
    expect(state.payload()).toEqual([
      { stimulus_id: "stim0", score: 0 },
      { stimulus_id: "stim1", score: 37 },
      { stimulus_id: "stim2", score: 100 },
    ]);
  });

  test("integral 0..100 enforced", () => {
    const state = new TrialState(stimuli(1));
    expect(() => state.setRating("stim0", 101)).toThrow(/0\.\.100/);
    expect(() => state.setRating("stim0", -1)).toThrow(/0\.\.100/);
    expect(() => state.setRating("stim0", 55.5)).toThrow(/0\.\.100/);
    expect(() => state.setRating("nope", 50)).toThrow(/unknown/);
  });

  test("re-rating overwrites, auditioning is idempotent", () => {
    const state = new TrialState(stimuli(1));
    state.markAuditioned("stim0");
    state.markAuditioned("stim0");
    state.setRating("stim0", 20);
    state.setRating("stim0", 80);
    expect(state.rating("stim0")).toBe(80);
    expect(state.auditionedCount).toBe(1);
  });
});

describe("scale labels", () => {
  test("20-point bands", () => {
    expect(scaleLabel(0)).toBe("Bad");
    expect(scaleLabel(19)).toBe("Bad");
    expect(scaleLabel(20)).toBe("Poor");
    expect(scaleLabel(45)).toBe("Fair");
    expect(scaleLabel(60)).toBe("Good");
    expect(scaleLabel(99)).toBe("Excellent");
    expect(scaleLabel(100)).toBe("Excellent");
  });
});
