from __future__ import annotations

import os
from functools import lru_cache
from typing import List, Optional

from fastapi import Depends, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from adaptive_tutor.config import STORE_ENV
from adaptive_tutor.errors import AdaptiveTutorError
from adaptive_tutor.interventions import Disposition
from adaptive_tutor.service import TutorService
from adaptive_tutor.store import Store
from adaptive_tutor.working_time import EventKind


app = FastAPI(title="Adaptive Tutor API", version="0.1.0")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class EventRequest(BaseModel):
    student_id: str
    exercise_id: str
    timestamp: float = Field(ge=0)
    kind: EventKind
    score_fraction: Optional[float] = Field(default=None, ge=0, le=1)


class InterventionCheckRequest(BaseModel):
    student_id: str
    exercise_id: str
    now: float


class SubmitOutcomeRequest(BaseModel):
    student_id: str
    exercise_id: str
    score_fraction: float = Field(ge=0, le=1)
    at: float = Field(ge=0)


class DispositionRequest(BaseModel):
    decision_id: int = Field(ge=0)
    disposition: Disposition


class KnowledgeRow(BaseModel):
    student_id: str
    topic_id: str
    score: float
    coverage: int


@lru_cache(maxsize=1)
def _default_service() -> TutorService:
    root = os.environ.get(STORE_ENV)
    if not root:
        raise HTTPException(status_code=503, detail=f"{STORE_ENV} is not set")
    return TutorService(Store.open(root))


def get_service() -> TutorService:
    return _default_service()


def _unwrap(response: dict):
    if response["ok"]:
        return response["result"]
    error = response["error"]
    status = 404 if error["type"] in _NOT_FOUND else 422
    raise HTTPException(status_code=status, detail=error)


_NOT_FOUND = {
    cls.__name__
    for cls in AdaptiveTutorError.__subclasses__()
    if issubclass(cls, LookupError)
} | {"KeyError", "LookupError"}


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/events")
def ingest_event(req: EventRequest, service: TutorService = Depends(get_service)) -> dict:
    payload = req.model_dump(mode="json")
    return _unwrap(service.handle({"op": "ingest_event", **payload}))


@app.get("/students/{student_id}/exercises/{exercise_id}/timer")
def timer_status(
    student_id: str, exercise_id: str, now: Optional[float] = None, service: TutorService = Depends(get_service),
) -> dict:
    return _unwrap(service.handle({"op": "timer_status", "student_id": student_id, "exercise_id": exercise_id, "now": now}))


@app.post("/intervention_check")
def intervention_check(req: InterventionCheckRequest, service: TutorService = Depends(get_service)) -> Optional[dict]:
    return _unwrap(service.handle({"op": "intervention_check", **req.model_dump()}))


@app.post("/submit_outcome")
def submit_outcome(req: SubmitOutcomeRequest, service: TutorService = Depends(get_service)) -> dict:
    return _unwrap(service.handle({"op": "submit_outcome", **req.model_dump()}))


@app.get("/students/{student_id}/knowledge", response_model=List[KnowledgeRow])
def knowledge_snapshot(student_id: str, service: TutorService = Depends(get_service)) -> list:
    return _unwrap(service.handle({"op": "knowledge_snapshot", "student_id": student_id}))


@app.get("/students/{student_id}/recommendation")
def recommend(student_id: str, week: int, service: TutorService = Depends(get_service)) -> dict:
    return _unwrap(service.handle({"op": "recommend", "student_id": student_id, "week": week}))


@app.post("/dispositions")
def record_disposition(req: DispositionRequest, service: TutorService = Depends(get_service)) -> dict:
    return _unwrap(service.handle({"op": "record_disposition", **req.model_dump(mode="json")}))


if __name__ == "__main__":
    import uvicorn

    uvicorn.run("api.main:app", host="0.0.0.0", port=8000, reload=True)
