from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from api.main import app, get_service
from adaptive_tutor.domain import InterventionGroup
from adaptive_tutor.service import TutorService
from adaptive_tutor.store import Store, snapshot_and_replay

from conftest import student_in


@pytest.fixture
def client(tmp_path, plan):
	service = TutorService(Store.create(tmp_path, plan))
	app.dependency_overrides[get_service] = lambda: service
	yield TestClient(app)
	app.dependency_overrides.clear()


def _event(sid, t, kind="run", **extra):
	return {"student_id": sid, "exercise_id": "e1", "timestamp": t, "kind": kind, **extra}


def test_health(client):
	assert client.get("/health").json() == {"status": "ok"}


def test_event_validation(client):
	assert client.post("/events", json=_event("s", 0.0, kind="dance")).status_code == 422
	assert client.post("/events", json=_event("s", 0.0, score_fraction=1.5)).status_code == 422
	assert client.post("/events", json={"student_id": "s", "exercise_id": "zz", "timestamp": 0, "kind": "run"}).status_code == 422


def test_unknown_student_is_404(client):
	assert client.get("/students/ghost/knowledge").status_code == 404
	assert client.get("/students/ghost/recommendation", params={"week": 1}).status_code == 404


def test_intervention_round_trip(client):
	sid = student_in(InterventionGroup.RFC)
	for t in range(0, 720, 60):
		assert client.post("/events", json=_event(sid, float(t))).status_code == 200
	timer = client.get(f"/students/{sid}/exercises/e1/timer").json()
	assert timer["session_active_seconds"] == 660.0
	assert timer["target_seconds"] == 600.0

	decision = client.post("/intervention_check", json={"student_id": sid, "exercise_id": "e1", "now": 660.0}).json()
	assert decision["kind"] == "rfc_prompt"
	again = client.post("/intervention_check", json={"student_id": sid, "exercise_id": "e1", "now": 670.0})
	assert again.status_code == 200 and again.json() is None

	record = client.post("/dispositions", json={"decision_id": decision["decision_id"], "disposition": "acted"}).json()
	assert record["disposition"] == "acted"
	assert client.post("/dispositions", json={"decision_id": 7, "disposition": "acted"}).status_code == 404


def test_submit_and_knowledge(client):
	client.post("/events", json=_event("s", 0.0))
	body = client.post("/submit_outcome", json={"student_id": "s", "exercise_id": "e1", "score_fraction": 1.0, "at": 120.0}).json()
	assert body["knowledge"][0]["topic_id"] == "a"
	rows = client.get("/students/s/knowledge").json()
	assert rows == [{"student_id": "s", "topic_id": "a", "score": 1.0, "coverage": 1}]
	rec = client.get("/students/s/recommendation", params={"week": 1}).json()
	assert rec["exercise_id"] in {"x1", "d1"}
	assert client.get("/students/s/recommendation", params={"week": 9}).status_code == 404


def test_store_stays_verifiable_through_http(client, tmp_path):
	sid = student_in(InterventionGroup.RFC)
	assert client.post("/events", json=_event(sid, 0.0)).status_code == 200
	assert snapshot_and_replay(tmp_path).consistent
	for t in range(60, 720, 60):
		client.post("/events", json=_event(sid, float(t)))
	decision = client.post("/intervention_check", json={"student_id": sid, "exercise_id": "e1", "now": 660.0}).json()
	client.post("/dispositions", json={"decision_id": decision["decision_id"], "disposition": "acted"})
	client.post("/submit_outcome", json={"student_id": sid, "exercise_id": "e1", "score_fraction": 1.0, "at": 700.0})
	result = snapshot_and_replay(tmp_path)
	assert result.consistent
	assert result.records_replayed == 15
