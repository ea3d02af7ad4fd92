/** Scripted end-to-end session against a live Python session-service:
 * completes a 2-trial plan through the API client and trial state machine,
 * then checks the submitted scores appear verbatim in the CSV export.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { fileURLToPath } from "node:url";
import path from "node:path";
import { afterAll, beforeAll, describe, expect, test } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { TrialState } from "../src/trial.js";
import type { CurrentTrial } from "../src/types.js";

const HELPER = path.join(
  path.dirname(fileURLToPath(import.meta.url)),
  "helpers",
  "launch_service.py",
);

let service: ChildProcess;
let base = "";

beforeAll(async () => {
  service = spawn("python3", [HELPER], { stdio: ["ignore", "pipe", "inherit"] });
  const port = await new Promise<number>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("service start timeout")), 60_000);
    let text = "";
    service.stdout!.on("data", (chunk: Buffer) => {
      text += chunk.toString();
      const match = text.match(/READY (\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(parseInt(match[1], 10));
      }
    });
    service.on("exit", (code) => reject(new Error(`service exited early (${code})`)));
  });
  base = `http://127.0.0.1:${port}`;
  // wait until uvicorn actually accepts connections
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      await fetch(`${base}/api/export.csv`);
      return;
    } catch {
      await new Promise((r) => setTimeout(r, 100));
    }
  }
  throw new Error("service never became reachable");
}, 90_000);

afterAll(() => {
  service?.kill();
});

describe("scripted session against the live service", () => {
  test("completes a 2-trial plan and the export matches verbatim", async () => {
    const api = new ApiClient(base);
    const session = await api.createSession("ui-integration");
    expect(session.num_trials).toBe(2);

    const submitted: number[][] = [];
    let trialsCompleted = 0;

    for (;;) {
      const trial: CurrentTrial = await api.currentTrial(session.session_id);
      if (trial.complete) break;

      const stimuli = trial.stimuli!;
      expect(stimuli).toHaveLength(8);

      // blindness: no condition labels, no condition-bearing filenames
      // (audio URLs are hash-addressed; original names contain "__")
      const serialized = JSON.stringify(trial);
      expect(serialized).not.toMatch(/SH\d+|QN\d+|"MONO"|"REF"|LP\d+|__/);
      for (const stim of stimuli) {
        expect(Object.keys(stim).sort()).toEqual(["stimulus_id", "url"]);
      }

      const state = new TrialState(stimuli);
      expect(state.canSubmit()).toBe(false);

      // server-side gate agrees while the client gate is closed
      await expect(
        api.submitRatings(session.session_id, trial.trial_id!, [
          { stimulus_id: stimuli[0].stimulus_id, score: 10 },
        ]),
      ).rejects.toMatchObject({ status: 400 });

      const scores: number[] = [];
      for (let i = 0; i < stimuli.length; i++) {
        const audio = await api.fetchAudio(stimuli[i].url);
        expect(audio.byteLength).toBeGreaterThan(44); // real WAV payloads
        state.markAuditioned(stimuli[i].stimulus_id);
        const score = 5 + 10 * i + trialsCompleted; // unique per trial+slot
        state.setRating(stimuli[i].stimulus_id, score);
        scores.push(score);
      }
      expect(state.canSubmit()).toBe(true);

      const result = await api.submitRatings(
        session.session_id, trial.trial_id!, state.payload(),
      );
      expect(result.accepted).toBe(trial.trial_id);
      submitted.push(scores);
      trialsCompleted++;

      // idempotence handling: a duplicate submit resolves to 409 "resync"
      try {
        await api.submitRatings(session.session_id, trial.trial_id!, state.payload());
        expect.unreachable();
      } catch (err) {
        expect((err as ApiError).status).toBe(409);
      }
    }

    expect(trialsCompleted).toBe(2);

    const csv = await api.exportCsv();
    const lines = csv.trim().split("\n");
    expect(lines[0]).toBe("listener_id,item,series,condition,score");
    expect(lines).toHaveLength(1 + 2 * 8);

    const exported = lines.slice(1).map((line) => parseInt(line.split(",")[4], 10));
    const sent = submitted.flat();
    expect([...exported].sort((a, b) => a - b)).toEqual([...sent].sort((a, b) => a - b));

    const status = await api.sessionStatus(session.session_id);
    expect(status.state).toBe("complete");
  }, 120_000);
});
