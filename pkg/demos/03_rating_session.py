#!/usr/bin/env python3
"""Walkthrough: a scripted listener completing a session over the HTTP API.

Runs the rating service in-process, creates a session, rates every stimulus
of every trial (hidden reference included, as in a real MUSHRA screen) and
prints the resulting CSV export. The same endpoints serve the browser UI.
"""

from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from stereoqa import AudioBuffer, build_plan, render_condition_set
from stereoqa.artifacts import write_manifest
from stereoqa.planning import manifest_digest
from stereoqa.service import create_app

OUT = Path(__file__).parent / "output" / "03_session"
STIMULI = OUT / "stimuli"
OUT.mkdir(parents=True, exist_ok=True)
FS = 48000

# --- stimuli + plan ----------------------------------------------------------
rng = np.random.default_rng(9)
item = AudioBuffer(FS, 0.3 * rng.uniform(-1, 1, (2, int(0.4 * FS))))
rows = render_condition_set(
    item, "demo", kinds=("SH",), modes=("LR", "MS"),
    qualities=("Q3", "Q5"), seed=21, out_dir=STIMULI,
)
manifest_path = OUT / "manifest.jsonl"
write_manifest(rows, manifest_path)
plan = build_plan(
    rows, items_by_artifact={"SH": ("demo",), "QN": ()},
    series_names=("SHmix",), seed=2,
    manifest_file_digest=manifest_digest(manifest_path),
)

app = create_app(plan, STIMULI, OUT / "ratings.sqlite")
client = TestClient(app)

# --- scripted session ---------------------------------------------------------
session = client.post("/api/sessions", json={"listener_id": "demo-listener"}).json()
sid = session["session_id"]
print(f"session {sid[:8]}... created, {session['num_trials']} trial(s)")

rng = np.random.default_rng(4)
while True:
    trial = client.get(f"/api/sessions/{sid}/current-trial").json()
    if trial["complete"]:
        break
    print(f"\ntrial {trial['trial_index'] + 1}/{trial['trial_count']}: "
          f"{len(trial['stimuli'])} stimuli (IDs are opaque)")
    for stim in trial["stimuli"]:
        audio = client.get(stim["url"])
        print(f"  auditioned {stim['stimulus_id']}  ({len(audio.content)} bytes)")
    ratings = [
        {"stimulus_id": s["stimulus_id"], "score": int(rng.integers(10, 100))}
        for s in trial["stimuli"]
    ]
    reply = client.post(
        f"/api/sessions/{sid}/trials/{trial['trial_id']}/ratings",
        json={"ratings": ratings},
    ).json()
    print(f"  submitted -> next: {reply['next_trial_id'] or 'done'}")

print("\nCSV export (condition labels resolved server-side only):")
print(client.get("/api/export.csv").text)
