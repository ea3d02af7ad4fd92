/** Application entry: session bootstrap and the trial loop. */

import { ApiClient, ApiError } from "./api.js";
import { GaplessPlayer } from "./player.js";
import { TrialState } from "./trial.js";
import { TrialScreen } from "./ui.js";
import type { CurrentTrial } from "./types.js";

const api = new ApiClient("");
const screen = new TrialScreen();

function audioContext(): AudioContext {
  const Ctor = window.AudioContext ?? (window as never as { webkitAudioContext: typeof AudioContext }).webkitAudioContext;
  return new Ctor();
}

async function loadTrialAudio(
  trial: CurrentTrial,
  player: GaplessPlayer,
): Promise<void> {
  // everything is decoded before the screen appears: no partial trials
  const stimuli = trial.stimuli ?? [];
  const downloads = await Promise.all(
    stimuli.map(async (stim) => ({
      id: stim.stimulus_id,
      data: await api.fetchAudio(stim.url),
    })),
  );
  if (trial.reference) {
    downloads.push({ id: "__reference__", data: await api.fetchAudio(trial.reference.url) });
  }
  await player.loadAll(downloads);
}

async function runTrialLoop(sessionId: string): Promise<void> {
  const trial = await api.currentTrial(sessionId);
  if (trial.complete) {
    screen.showMessage("<h2>Session complete</h2><p>Thank you for participating.</p>");
    return;
  }

  const player = new GaplessPlayer(audioContext());
  try {
    await loadTrialAudio(trial, player);
  } catch (err) {
    screen.showError(
      `Loading the trial audio failed (${String(err)}). Check the connection and retry.`,
      () => void runTrialLoop(sessionId),
    );
    return;
  }

  const state = new TrialState(trial.stimuli ?? []);
  if (trial.stimuli && trial.stimuli.length > 0) {
    player.select(trial.stimuli[0].stimulus_id);
  }

  screen.render(trial, state, player, {
    onSubmit: () => {
      void (async () => {
        try {
          await api.submitRatings(sessionId, trial.trial_id as string, state.payload());
        } catch (err) {
          if (err instanceof ApiError && err.status === 409) {
            // already submitted: fall through and resync to the server state
          } else {
            screen.showError(`Submitting failed: ${String(err)}`, () =>
              void runTrialLoop(sessionId),
            );
            return;
          }
        }
        player.stop();
        await runTrialLoop(sessionId);
      })();
    },
  });
}

function bootstrap(): void {
  screen.showMessage(`
    <h2>Listening test</h2>
    <p>Enter your listener ID to begin.</p>
    <input id="listener-id" placeholder="listener id">
    <button id="start">Start session</button>
    <p id="boot-error" class="hint"></p>`);
  (document.getElementById("start") as HTMLButtonElement).onclick = () => {
    void (async () => {
      const input = document.getElementById("listener-id") as HTMLInputElement;
      const listenerId = input.value.trim();
      if (!listenerId) return;
      try {
        const session = await api.createSession(listenerId);
        await runTrialLoop(session.session_id);
      } catch (err) {
        (document.getElementById("boot-error") as HTMLElement).textContent = String(err);
      }
    })();
  };
}

bootstrap();
