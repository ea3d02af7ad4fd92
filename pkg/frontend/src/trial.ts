/** Per-trial rating state: which stimuli were auditioned, slider values,
 * and the submit gate (every stimulus heard at least once AND rated).
 *
 * Stimulus identities are opaque server IDs; nothing here knows or stores
 * what condition they map to. Slider values are kept exactly as displayed,
 * integers on the 0..100 MUSHRA scale.
 */

import type { Rating, StimulusRef } from "./types.js";

export const SCALE_BANDS = [
  { min: 80, label: "Excellent" },
  { min: 60, label: "Good" },
  { min: 40, label: "Fair" },
  { min: 20, label: "Poor" },
  { min: 0, label: "Bad" },
] as const;

export function scaleLabel(score: number): string {
  for (const band of SCALE_BANDS) {
    if (score >= band.min) return band.label;
  }
  return "Bad";
}

export class TrialState {
  readonly stimulusIds: string[];
  private auditioned = new Set<string>();
  private ratings = new Map<string, number | null>();

  constructor(stimuli: StimulusRef[]) {
    this.stimulusIds = stimuli.map((s) => s.stimulus_id);
    for (const id of this.stimulusIds) {
      this.ratings.set(id, null);
    }
  }

  markAuditioned(id: string): void {
    if (!this.ratings.has(id)) {
      throw new Error(`unknown stimulus ${id}`);
    }
    this.auditioned.add(id);
  }

  wasAuditioned(id: string): boolean {
    return this.auditioned.has(id);
  }

  setRating(id: string, value: number): void {
    if (!this.ratings.has(id)) {
      throw new Error(`unknown stimulus ${id}`);
    }
    if (!Number.isInteger(value) || value < 0 || value > 100) {
      throw new Error(`rating must be an integer in 0..100, got ${value}`);
    }
    this.ratings.set(id, value);
  }

  rating(id: string): number | null {
    return this.ratings.get(id) ?? null;
  }

  get auditionedCount(): number {
    return this.auditioned.size;
  }

  get ratedCount(): number {
    let count = 0;
    for (const value of this.ratings.values()) {
      if (value !== null) count++;
    }
    return count;
  }

  /** Submit gate: all stimuli auditioned at least once and all rated. */
  canSubmit(): boolean {
    return (
      this.auditioned.size === this.stimulusIds.length &&
      this.ratedCount === this.stimulusIds.length
    );
  }

  missing(): { unheard: string[]; unrated: string[] } {
    return {
      unheard: this.stimulusIds.filter((id) => !this.auditioned.has(id)),
      unrated: this.stimulusIds.filter((id) => this.ratings.get(id) === null),
    };
  }

  /** Ratings exactly as displayed, for the submit payload. */
  payload(): Rating[] {
    if (!this.canSubmit()) {
      throw new Error("trial is not complete");
    }
    return this.stimulusIds.map((id) => ({
      stimulus_id: id,
      score: this.ratings.get(id) as number,
    }));
  }
}
