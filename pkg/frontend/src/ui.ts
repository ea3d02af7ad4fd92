/** DOM rendering for the rating screen. Stimuli get neutral position
 * letters (A, B, ...); the page never sees condition names or filenames. */

import { GaplessPlayer } from "./player.js";
import { TrialState, scaleLabel } from "./trial.js";
import type { CurrentTrial } from "./types.js";

export interface TrialScreenCallbacks {
  onSubmit: () => void;
}

const LETTERS = "ABCDEFGHIJKLMNOP";

export class TrialScreen {
  private root: HTMLElement;

  constructor(rootId = "app") {
    const root = document.getElementById(rootId);
    if (!root) throw new Error(`missing #${rootId} container`);
    this.root = root;
  }

  showMessage(html: string): void {
    this.root.innerHTML = `<div class="panel message">${html}</div>`;
  }

  showError(message: string, retry: () => void): void {
    this.root.innerHTML = `
      <div class="panel error">
        <p>${message}</p>
        <button id="retry">Retry</button>
      </div>`;
    (document.getElementById("retry") as HTMLButtonElement).onclick = retry;
  }

  render(
    trial: CurrentTrial,
    state: TrialState,
    player: GaplessPlayer,
    callbacks: TrialScreenCallbacks,
  ): void {
    const stimuli = trial.stimuli ?? [];
    const header = trial.training ? "Training trial" : "Trial";
    const rows = stimuli
      .map((stim, i) => {
        const letter = LETTERS[i] ?? `#${i}`;
        return `
        <div class="stimulus" data-id="${stim.stimulus_id}">
          <button class="listen" data-id="${stim.stimulus_id}">${letter}</button>
          <span class="heard" data-heard="${stim.stimulus_id}">not heard</span>
          <input type="range" min="0" max="100" step="1" value="50"
                 data-slider="${stim.stimulus_id}" aria-label="rating ${letter}">
          <span class="value" data-value="${stim.stimulus_id}">&mdash;</span>
        </div>`;
      })
      .join("");

    this.root.innerHTML = `
      <div class="panel">
        <h2>${header} ${(trial.trial_index ?? 0) + 1} / ${trial.trial_count}</h2>
        <div class="scale-legend">100 Excellent &middot; 80 Good &middot; 60 Fair &middot;
             40 Poor &middot; 20 Bad</div>
        <div class="transport">
          <button id="play-reference">Reference</button>
          <button id="play-pause">Play</button>
          <input type="range" id="seek" min="0" max="100" step="0.1" value="0">
          <button id="loop-set">Loop last 2 s</button>
          <button id="loop-clear">Loop off</button>
        </div>
        <div class="stimuli">${rows}</div>
        <button id="submit" disabled>Submit ratings</button>
        <div id="gate-hint" class="hint"></div>
      </div>`;

    const refreshGate = () => {
      const submit = document.getElementById("submit") as HTMLButtonElement;
      submit.disabled = !state.canSubmit();
      const missing = state.missing();
      const hint = document.getElementById("gate-hint") as HTMLElement;
      hint.textContent = state.canSubmit()
        ? "All stimuli auditioned and rated."
        : `${missing.unheard.length} not auditioned, ${missing.unrated.length} not rated.`;
    };

    const playPause = document.getElementById("play-pause") as HTMLButtonElement;
    playPause.onclick = () => {
      if (player.playing) {
        player.pause();
        playPause.textContent = "Play";
      } else {
        player.play();
        playPause.textContent = "Pause";
        if (player.active && state.stimulusIds.includes(player.active)) {
          state.markAuditioned(player.active);
          this.markHeard(player.active);
          refreshGate();
        }
      }
    };

    (document.getElementById("play-reference") as HTMLButtonElement).onclick = () => {
      player.select("__reference__");
      if (!player.playing) {
        player.play();
        playPause.textContent = "Pause";
      }
    };

    const seek = document.getElementById("seek") as HTMLInputElement;
    seek.onchange = () => {
      player.seek((parseFloat(seek.value) / 100) * player.duration());
    };
    window.setInterval(() => {
      if (player.playing && player.duration() > 0) {
        seek.value = ((player.playhead() / player.duration()) * 100).toFixed(1);
      }
    }, 250);

    (document.getElementById("loop-set") as HTMLButtonElement).onclick = () => {
      const end = Math.max(player.playhead(), 2.0);
      player.setLoop(Math.max(0, end - 2.0), Math.min(end, player.duration()));
    };
    (document.getElementById("loop-clear") as HTMLButtonElement).onclick = () => {
      player.clearLoop();
    };

    for (const button of this.root.querySelectorAll<HTMLButtonElement>("button.listen")) {
      button.onclick = () => {
        const id = button.dataset.id as string;
        player.select(id);
        if (!player.playing) {
          player.play();
          playPause.textContent = "Pause";
        }
        state.markAuditioned(id);
        this.markHeard(id);
        refreshGate();
      };
    }

    for (const slider of this.root.querySelectorAll<HTMLInputElement>("input[data-slider]")) {
      slider.oninput = () => {
        const id = slider.dataset.slider as string;
        const value = parseInt(slider.value, 10);
        state.setRating(id, value);
        const display = this.root.querySelector(`[data-value="${id}"]`) as HTMLElement;
        display.textContent = `${value} (${scaleLabel(value)})`;
        refreshGate();
      };
    }

    (document.getElementById("submit") as HTMLButtonElement).onclick = callbacks.onSubmit;
    refreshGate();
  }

  private markHeard(id: string): void {
    const badge = this.root.querySelector(`[data-heard="${id}"]`) as HTMLElement | null;
    if (badge) {
      badge.textContent = "heard";
      badge.classList.add("done");
    }
  }
}
