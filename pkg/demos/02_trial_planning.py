#!/usr/bin/env python3
"""Walkthrough: from rendered stimuli to a randomized MUSHRA trial plan.

Renders a full condition set for two miniature items, builds the trial plan
(series templates, anchors, hidden reference) and shows how two listeners
get different trial and stimulus orders from the same plan.
"""

from pathlib import Path

import numpy as np

from stereoqa import AudioBuffer, build_plan, build_series, render_condition_set, write_wav
from stereoqa.artifacts import write_manifest
from stereoqa.planning import listener_key, manifest_digest

OUT = Path(__file__).parent / "output" / "02_planning"
STIMULI = OUT / "stimuli"
OUT.mkdir(parents=True, exist_ok=True)
FS = 48000

print("Series templates (7 conditions each, hidden reference added per trial):")
for name in ("SHLR", "SHmix", "QNmix"):
    series = build_series(name)
    print(f"  {name:6s} -> {[c.label for c in series.conditions]}")

# --- render stimuli for two items -------------------------------------------
rng = np.random.default_rng(3)
rows = []
for i, item_name in enumerate(("miniPop", "miniRnB")):
    samples = 0.3 * rng.uniform(-1, 1, (2, int(0.5 * FS)))
    item = AudioBuffer(FS, samples)
    kind = "SH" if i == 0 else "QN"
    rows += render_condition_set(
        item, item_name, kinds=(kind,), modes=("LR", "MS"),
        qualities=("Q1", "Q2", "Q3", "Q4", "Q5"), seed=11, out_dir=STIMULI,
    )
manifest_path = OUT / "manifest.jsonl"
write_manifest(rows, manifest_path)
print(f"\nrendered {len(rows)} files into {STIMULI}")

# --- plan over the two items -------------------------------------------------
plan = build_plan(
    rows,
    items_by_artifact={"SH": ("miniPop",), "QN": ("miniRnB",)},
    seed=5,
    manifest_file_digest=manifest_digest(manifest_path),
)
plan.save(OUT / "plan.json")
print(f"plan: {len(plan.trials)} trials -> {OUT / 'plan.json'}")
for note in plan.notes:
    print(f"  note: {note}")
for trial in plan.trials:
    rated = [s.condition for s in trial.stimuli]
    print(f"  {trial.trial_id:15s} {rated}")

# --- per-listener randomization ----------------------------------------------
print("\nPer-listener orders (same plan, different seeds):")
for listener in ("alice", "bob"):
    schedule = plan.listener_schedule(listener_key(listener))
    order = [trial_id for trial_id, _ in schedule]
    first_perm = schedule[0][1]
    print(f"  {listener:6s} trials={order} first-trial stimulus order={first_perm}")
