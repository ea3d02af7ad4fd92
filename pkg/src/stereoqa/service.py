"""HTTP service that administers listening sessions and collects ratings.

Sessions walk a per-listener schedule derived from the trial plan: the two
training trials first, then the test trials in a listener-specific order
with listener-specific stimulus order inside each trial. Clients only ever
see opaque stimulus IDs and hash-addressed audio URLs; condition labels
stay on the server so the test remains blind. Ratings land in a single
SQLite file, one transaction per trial, so an interrupted session resumes
at the first incomplete trial with everything before it intact.

Endpoints (JSON unless noted):
  POST /api/sessions                          {"listener_id": ...}
  GET  /api/sessions/{sid}
  GET  /api/sessions/{sid}/current-trial
  POST /api/sessions/{sid}/trials/{tid}/ratings   {"ratings": [{"stimulus_id", "score"}]}
  GET  /api/export.csv                        text/csv
  GET  /api/audio/{sha256}.wav                audio/wav
"""

from __future__ import annotations

import csv
import io
import sqlite3
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, PlainTextResponse
from pydantic import BaseModel

from .planning import TrialPlan, listener_key

EXPORT_COLUMNS = ("listener_id", "item", "series", "condition", "score")

_SCHEMA = """
CREATE TABLE IF NOT EXISTS sessions (
    session_id TEXT PRIMARY KEY,
    listener_id TEXT NOT NULL,
    listener_key INTEGER NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS ratings (
    session_id TEXT NOT NULL,
    trial_id TEXT NOT NULL,
    condition TEXT NOT NULL,
    stimulus_id TEXT NOT NULL,
    score INTEGER NOT NULL,
    submitted_at TEXT NOT NULL,
    PRIMARY KEY (session_id, trial_id, condition)
);
"""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class SessionStore:
    """SQLite-backed session and rating persistence."""

    def __init__(self, db_path):
        self._conn = sqlite3.connect(str(db_path), check_same_thread=False)
        self._conn.executescript(_SCHEMA)
        self._conn.commit()
        self._lock = threading.Lock()

    def close(self):
        self._conn.close()

    def create_session(self, listener_id: str) -> str:
        with self._lock:
            session_id = uuid.uuid4().hex
            self._conn.execute(
                "INSERT INTO sessions VALUES (?, ?, ?, ?)",
                (session_id, listener_id, listener_key(listener_id), _now()),
            )
            self._conn.commit()
            return session_id

    def sessions_for_listener(self, listener_id: str) -> list[tuple[str, int]]:
        rows = self._conn.execute(
            "SELECT session_id, listener_key FROM sessions WHERE listener_id = ?",
            (listener_id,),
        ).fetchall()
        return rows

    def session(self, session_id: str):
        return self._conn.execute(
            "SELECT session_id, listener_id, listener_key FROM sessions WHERE session_id = ?",
            (session_id,),
        ).fetchone()

    def completed_trials(self, session_id: str) -> set[str]:
        rows = self._conn.execute(
            "SELECT DISTINCT trial_id FROM ratings WHERE session_id = ?", (session_id,)
        ).fetchall()
        return {r[0] for r in rows}

    def insert_ratings(self, session_id: str, trial_id: str, records: list[tuple[str, str, int]]):
        """records: (condition, stimulus_id, score); one transaction per trial."""
        with self._lock:
            stamp = _now()
            self._conn.executemany(
                "INSERT INTO ratings VALUES (?, ?, ?, ?, ?, ?)",
                [
                    (session_id, trial_id, condition, stimulus_id, score, stamp)
                    for condition, stimulus_id, score in records
                ],
            )
            self._conn.commit()

    def all_ratings(self) -> list[tuple[str, str, str, int]]:
        return self._conn.execute(
            "SELECT s.listener_id, r.trial_id, r.condition, r.score "
            "FROM ratings r JOIN sessions s ON s.session_id = r.session_id"
        ).fetchall()


def export_scores(
    store: SessionStore,
    plan: TrialPlan,
    listener_id: str | None = None,
    series: str | None = None,
) -> list[dict]:
    """One row per (listener, item, series, condition); training excluded,
    deterministic order, a pure function of the stored records. Optional
    filters restrict to one listener and/or one trial series."""
    trials = {t.trial_id: t for t in plan.all_trials()}
    rows = []
    for row_listener, trial_id, condition, score in store.all_ratings():
        trial = trials.get(trial_id)
        if trial is None or trial.training:
            continue
        if listener_id is not None and row_listener != listener_id:
            continue
        if series is not None and trial.series != series:
            continue
        rows.append(
            {
                "listener_id": row_listener,
                "item": trial.item,
                "series": trial.series,
                "condition": condition,
                "score": score,
            }
        )
    rows.sort(key=lambda r: (r["listener_id"], r["item"], r["series"], r["condition"]))
    return rows


def scores_to_csv(rows: list[dict]) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=EXPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return out.getvalue()


class CreateSessionRequest(BaseModel):
    listener_id: str


class RatingIn(BaseModel):
    stimulus_id: str
    score: int


class SubmitRequest(BaseModel):
    ratings: list[RatingIn]


def create_app(plan: TrialPlan, audio_dir, db_path, ui_dir=None) -> FastAPI:
    """`ui_dir` may point at the built listener UI (index.html + dist/);
    when given, the service also hosts it at /."""
    audio_dir = Path(audio_dir)
    store = SessionStore(db_path)
    app = FastAPI(title="stereoqa listening test service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.store = store
    app.state.plan = plan

    # hash-addressed audio: clients never see condition-bearing filenames
    files_by_sha = {}
    for trial in plan.all_trials():
        files_by_sha[trial.reference_sha256] = trial.reference_file
        for stim in trial.stimuli:
            files_by_sha[stim.sha256] = stim.file

    trials_by_id = {t.trial_id: t for t in plan.all_trials()}

    def schedule_for(lkey: int):
        return plan.listener_schedule(lkey)

    def session_or_404(session_id: str):
        row = store.session(session_id)
        if row is None:
            raise HTTPException(404, "unknown session")
        return row

    def current_position(session_id: str, lkey: int):
        """(index, trial, stimulus order) of the first incomplete trial."""
        schedule = schedule_for(lkey)
        done = store.completed_trials(session_id)
        for index, (trial_id, stim_order) in enumerate(schedule):
            if trial_id not in done:
                return index, trials_by_id[trial_id], stim_order, schedule
        return len(schedule), None, None, schedule

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        if not plan.trials:
            raise HTTPException(400, "plan has no test trials")
        for session_id, _ in store.sessions_for_listener(body.listener_id):
            done = store.completed_trials(session_id)
            lkey = listener_key(body.listener_id)
            if len(done) < len(schedule_for(lkey)):
                raise HTTPException(409, f"listener {body.listener_id} has an active session")
        session_id = store.create_session(body.listener_id)
        return {
            "session_id": session_id,
            "state": "training" if plan.training_trials else "in_progress",
            "num_trials": len(plan.trials),
            "num_training": len(plan.training_trials),
        }

    @app.get("/api/sessions/{session_id}")
    def session_status(session_id: str):
        row = session_or_404(session_id)
        index, trial, _, schedule = current_position(session_id, row[2])
        if trial is None:
            state = "complete"
        elif trial.training:
            state = "training"
        else:
            state = "in_progress"
        return {
            "session_id": session_id,
            "listener_id": row[1],
            "state": state,
            "completed_trials": index,
            "total_trials": len(schedule),
        }

    @app.get("/api/sessions/{session_id}/current-trial")
    def current_trial(session_id: str):
        row = session_or_404(session_id)
        index, trial, stim_order, schedule = current_position(session_id, row[2])
        if trial is None:
            return {"complete": True, "trial_count": len(schedule)}
        return {
            "complete": False,
            "trial_id": trial.trial_id,
            "trial_index": index,
            "trial_count": len(schedule),
            "training": trial.training,
            "reference": {"url": f"/api/audio/{trial.reference_sha256}.wav"},
            "stimuli": [
                {
                    "stimulus_id": trial.stimuli[i].stimulus_id,
                    "url": f"/api/audio/{trial.stimuli[i].sha256}.wav",
                }
                for i in stim_order
            ],
        }

    @app.post("/api/sessions/{session_id}/trials/{trial_id}/ratings")
    def submit_ratings(session_id: str, trial_id: str, body: SubmitRequest):
        row = session_or_404(session_id)
        _, trial, _, _ = current_position(session_id, row[2])
        if trial_id in store.completed_trials(session_id):
            raise HTTPException(409, f"trial {trial_id} was already submitted")
        if trial is None or trial.trial_id != trial_id:
            raise HTTPException(409, "trials must be completed in order")

        by_id = {s.stimulus_id: s for s in trial.stimuli}
        given = {r.stimulus_id: r.score for r in body.ratings}
        unknown = sorted(set(given) - set(by_id))
        if unknown:
            raise HTTPException(400, f"unknown stimulus ids: {', '.join(unknown)}")
        missing = sorted(set(by_id) - set(given))
        if missing:
            raise HTTPException(400, f"missing ratings for stimuli: {', '.join(missing)}")
        for stimulus_id, score in given.items():
            if not 0 <= score <= 100:
                raise HTTPException(
                    400, f"score {score} for stimulus {stimulus_id} outside 0..100"
                )

        records = [
            (by_id[sid].condition, sid, score) for sid, score in sorted(given.items())
        ]
        store.insert_ratings(session_id, trial_id, records)
        index, nxt, _, schedule = current_position(session_id, row[2])
        return {
            "accepted": trial_id,
            "complete": nxt is None,
            "next_trial_id": None if nxt is None else nxt.trial_id,
            "completed_trials": index if nxt is not None else len(schedule),
        }

    @app.get("/api/export.csv", response_class=PlainTextResponse)
    def export_csv():
        return PlainTextResponse(
            scores_to_csv(export_scores(store, plan)), media_type="text/csv"
        )

    @app.get("/api/audio/{sha256}.wav")
    def audio(sha256: str):
        filename = files_by_sha.get(sha256)
        if filename is None:
            raise HTTPException(404, "unknown stimulus hash")
        path = audio_dir / filename
        if not path.exists():
            raise HTTPException(404, "stimulus file missing on server")
        return FileResponse(path, media_type="audio/wav")

    if ui_dir is not None:
        ui_dir = Path(ui_dir)
        index = ui_dir / "index.html"
        bundle_dir = ui_dir / "dist"

        @app.get("/")
        def ui_index():
            if not index.exists():
                raise HTTPException(404, "listener UI is not built")
            return FileResponse(index, media_type="text/html")

        @app.get("/dist/{name}")
        def ui_bundle(name: str):
            path = (bundle_dir / name).resolve()
            if bundle_dir.resolve() not in path.parents or not path.exists():
                raise HTTPException(404, "unknown bundle file")
            media = "text/javascript" if name.endswith(".js") else "application/octet-stream"
            return FileResponse(path, media_type=media)

    return app
