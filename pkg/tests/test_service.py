import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from stereoqa.audio import AudioBuffer, write_wav
from stereoqa.planning import build_plan
from stereoqa.service import SessionStore, create_app, export_scores, scores_to_csv
from stereoqa.stats import ingest_scores

from test_planning import fake_manifest


@pytest.fixture
def small_plan():
    items = {"SH": ("Pop",), "QN": ("RnB",)}
    return build_plan(
        fake_manifest(items, extra_items=("train1",)),
        items_by_artifact=items,
        series_names=("SHmix", "QNmix"),
        seed=3,
        training_items=("train1",),
    )


@pytest.fixture
def client(small_plan, tmp_path):
    app = create_app(small_plan, tmp_path / "audio", tmp_path / "db.sqlite")
    with TestClient(app) as c:
        yield c


def _start(client, listener="anna"):
    response = client.post("/api/sessions", json={"listener_id": listener})
    assert response.status_code == 201
    return response.json()["session_id"]


def _rate_all(trial, score=50):
    return {"ratings": [{"stimulus_id": s["stimulus_id"], "score": score}
                        for s in trial["stimuli"]]}


def _complete_session(client, sid, score=50):
    while True:
        trial = client.get(f"/api/sessions/{sid}/current-trial").json()
        if trial["complete"]:
            return
        response = client.post(
            f"/api/sessions/{sid}/trials/{trial['trial_id']}/ratings",
            json=_rate_all(trial, score),
        )
        assert response.status_code == 200


def test_session_starts_with_training(client):
    sid = _start(client)
    status = client.get(f"/api/sessions/{sid}").json()
    assert status["state"] == "training"
    trial = client.get(f"/api/sessions/{sid}/current-trial").json()
    assert trial["training"] is True
    assert len(trial["stimuli"]) == 8
    assert trial["trial_index"] == 0
    assert trial["trial_count"] == 3  # 1 training + 2 test


def test_empty_plan_rejected(tmp_path):
    empty = build_plan(fake_manifest(), series_names=())
    app = create_app(empty, tmp_path / "a", tmp_path / "d.sqlite")
    with TestClient(app) as c:
        response = c.post("/api/sessions", json={"listener_id": "x"})
        assert response.status_code == 400


def test_duplicate_active_session_rejected(client):
    _start(client, "bob")
    response = client.post("/api/sessions", json={"listener_id": "bob"})
    assert response.status_code == 409
    assert client.post("/api/sessions", json={"listener_id": "carol"}).status_code == 201


def test_new_session_allowed_after_completion(client):
    sid = _start(client, "dave")
    _complete_session(client, sid)
    assert client.post("/api/sessions", json={"listener_id": "dave"}).status_code == 201


def test_full_submission_advances(client):
    sid = _start(client)
    trial = client.get(f"/api/sessions/{sid}/current-trial").json()
    response = client.post(
        f"/api/sessions/{sid}/trials/{trial['trial_id']}/ratings", json=_rate_all(trial)
    )
    assert response.status_code == 200
    body = response.json()
    assert body["accepted"] == trial["trial_id"]
    assert body["next_trial_id"] != trial["trial_id"]
    after = client.get(f"/api/sessions/{sid}/current-trial").json()
    assert after["trial_id"] == body["next_trial_id"]


def test_missing_rating_names_the_stimulus(client):
    sid = _start(client)
    trial = client.get(f"/api/sessions/{sid}/current-trial").json()
    payload = _rate_all(trial)
    dropped = payload["ratings"].pop()
    response = client.post(
        f"/api/sessions/{sid}/trials/{trial['trial_id']}/ratings", json=payload
    )
    assert response.status_code == 400
    assert dropped["stimulus_id"] in response.json()["detail"]


def test_out_of_range_scores_rejected(client):
    sid = _start(client)
    trial = client.get(f"/api/sessions/{sid}/current-trial").json()
    for bad in (101, -1):
        payload = _rate_all(trial)
        payload["ratings"][0]["score"] = bad
        response = client.post(
            f"/api/sessions/{sid}/trials/{trial['trial_id']}/ratings", json=payload
        )
        assert response.status_code == 400
        assert "0..100" in response.json()["detail"]


def test_unknown_stimulus_rejected(client):
    sid = _start(client)
    trial = client.get(f"/api/sessions/{sid}/current-trial").json()
    payload = _rate_all(trial)
    payload["ratings"][0]["stimulus_id"] = "doesnotexist"
    response = client.post(
        f"/api/sessions/{sid}/trials/{trial['trial_id']}/ratings", json=payload
    )
    assert response.status_code == 400


def test_resubmission_and_out_of_order_rejected(client, small_plan):
    sid = _start(client)
    first = client.get(f"/api/sessions/{sid}/current-trial").json()

    # a later trial cannot be submitted yet
    schedule_ids = [t.trial_id for t in small_plan.all_trials()]
    later = next(t for t in schedule_ids if t != first["trial_id"])
    response = client.post(
        f"/api/sessions/{sid}/trials/{later}/ratings", json=_rate_all(first)
    )
    assert response.status_code == 409

    assert client.post(
        f"/api/sessions/{sid}/trials/{first['trial_id']}/ratings", json=_rate_all(first)
    ).status_code == 200
    # completed trials are immutable
    response = client.post(
        f"/api/sessions/{sid}/trials/{first['trial_id']}/ratings", json=_rate_all(first)
    )
    assert response.status_code == 409


def test_unknown_session_404(client):
    assert client.get("/api/sessions/nope/current-trial").status_code == 404


def test_condition_labels_never_leave_the_server(client, small_plan):
    sid = _start(client)
    labels = {s.condition for t in small_plan.all_trials() for s in t.stimuli}
    files = {s.file for t in small_plan.all_trials() for s in t.stimuli}
    trial = client.get(f"/api/sessions/{sid}/current-trial").json()
    serialized = json.dumps(trial)
    for label in labels:
        assert label not in serialized
    for filename in files:
        assert filename not in serialized


def test_listeners_get_independent_permutations(client):
    sid_a = _start(client, "lisa")
    sid_b = _start(client, "marc")
    trial_a = client.get(f"/api/sessions/{sid_a}/current-trial").json()
    trial_b = client.get(f"/api/sessions/{sid_b}/current-trial").json()
    ids_a = [s["stimulus_id"] for s in trial_a["stimuli"]]
    ids_b = [s["stimulus_id"] for s in trial_b["stimuli"]]
    assert trial_a["trial_id"] == trial_b["trial_id"]  # both in training
    assert sorted(ids_a) == sorted(ids_b)
    assert ids_a != ids_b


def test_export_roundtrips_into_stats(client, small_plan, tmp_path):
    for listener, score in (("pat", 40), ("quinn", 72)):
        sid = _start(client, listener)
        _complete_session(client, sid, score)

    response = client.get("/api/export.csv")
    assert response.status_code == 200
    lines = response.text.strip().splitlines()
    assert lines[0] == "listener_id,item,series,condition,score"
    # 2 listeners x 2 test trials x 8 stimuli; training rows excluded
    assert len(lines) - 1 == 2 * 2 * 8
    assert not any("train1" in line for line in lines)
    assert lines == sorted(lines[:1]) + sorted(lines[1:])

    csv_path = tmp_path / "scores.csv"
    csv_path.write_text(response.text)
    dataset = ingest_scores(csv_path)
    assert len(dataset) == 2 * 2 * 8
    assert dataset.listeners == ["pat", "quinn"]


def test_empty_export_has_header_only(client):
    response = client.get("/api/export.csv")
    assert response.text == "listener_id,item,series,condition,score\n"


def test_crash_resume_preserves_progress(small_plan, tmp_path):
    db = tmp_path / "db.sqlite"
    app = create_app(small_plan, tmp_path / "audio", db)
    with TestClient(app) as client:
        sid = _start(client, "zoe")
        trial = client.get(f"/api/sessions/{sid}/current-trial").json()
        first_id = trial["trial_id"]
        client.post(f"/api/sessions/{sid}/trials/{first_id}/ratings",
                    json=_rate_all(trial, 33))

    # simulate a crash: fresh app instance over the same database
    app2 = create_app(small_plan, tmp_path / "audio", db)
    with TestClient(app2) as client:
        status = client.get(f"/api/sessions/{sid}").json()
        assert status["completed_trials"] == 1
        trial = client.get(f"/api/sessions/{sid}/current-trial").json()
        assert trial["trial_id"] != first_id
        _complete_session(client, sid, 60)
        rows = client.get("/api/export.csv").text.strip().splitlines()[1:]
        # training trial excluded; both test trials present with old score intact
        scores = {line.rsplit(",", 1)[-1] for line in rows}
        assert scores == {"33", "60"} or scores == {"60"}  # first trial may be training


def test_audio_served_by_hash(small_plan, tmp_path):
    audio_dir = tmp_path / "audio"
    audio_dir.mkdir()
    trial = small_plan.training_trials[0]
    stim = trial.stimuli[0]
    write_wav(AudioBuffer(48000, np.zeros((2, 100))), audio_dir / stim.file, 16)

    app = create_app(small_plan, audio_dir, tmp_path / "db.sqlite")
    with TestClient(app) as client:
        good = client.get(f"/api/audio/{stim.sha256}.wav")
        assert good.status_code == 200
        assert good.headers["content-type"] == "audio/wav"
        assert client.get("/api/audio/" + "0" * 64 + ".wav").status_code == 404


def test_ui_static_hosting(small_plan, tmp_path):
    ui_dir = tmp_path / "frontend"
    (ui_dir / "dist").mkdir(parents=True)
    (ui_dir / "index.html").write_text("<html><body>listening test</body></html>")
    (ui_dir / "dist" / "main.js").write_text("console.log('ui');")

    app = create_app(small_plan, tmp_path / "audio", tmp_path / "db.sqlite", ui_dir=ui_dir)
    with TestClient(app) as client:
        index = client.get("/")
        assert index.status_code == 200
        assert "listening test" in index.text
        bundle = client.get("/dist/main.js")
        assert bundle.status_code == 200
        assert "javascript" in bundle.headers["content-type"]
        assert client.get("/dist/nope.js").status_code == 404

    plain = create_app(small_plan, tmp_path / "audio", tmp_path / "db2.sqlite")
    with TestClient(plain) as client:
        assert client.get("/").status_code == 404


def test_export_scores_function_matches_endpoint(small_plan, tmp_path):
    db = tmp_path / "db.sqlite"
    app = create_app(small_plan, tmp_path / "audio", db)
    with TestClient(app) as client:
        for listener in ("uma", "vic"):
            sid = _start(client, listener)
            _complete_session(client, sid, 55)
        via_http = client.get("/api/export.csv").text
    store = SessionStore(db)
    rows = export_scores(store, small_plan)
    assert scores_to_csv(rows) == via_http

    only_uma = export_scores(store, small_plan, listener_id="uma")
    assert {r["listener_id"] for r in only_uma} == {"uma"}
    assert len(only_uma) == 2 * 8
    only_shmix = export_scores(store, small_plan, series="SHmix")
    assert {r["series"] for r in only_shmix} == {"SHmix"}
    store.close()
