"""Motor do tutor: dobra o fluxo de eventos em estado.

Tudo o que altera o estado passa pelo `journal` (eventos, decisões e
disposições, com `seq` global), de modo que reaplicar o journal a partir do
zero reproduz exatamente o mesmo estado.
"""

from __future__ import annotations

import bisect
import threading
from dataclasses import dataclass, replace
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

from .domain import CoursePlan, GroupAssignment, InterventionGroup, assign_groups
from .errors import (
	EventError,
	TimestampRegressionError,
	UnknownDecisionError,
	UnknownExerciseError,
	UnknownStudentError,
)
from .interventions import (
	ActionKind,
	ActionRecord,
	CapCounters,
	Disposition,
	InterventionKind,
	InterventionPolicy,
	InterventionRecord,
	Tick,
	TimerSignal,
	TimerState,
	attribute_action,
	day_of,
	initial_target,
	on_event,
	returning_target,
	should_fire,
)
from .knowledge import KnowledgeVector, SubmissionOutcome, update_on_submission
from .logs import get_logger
from .recommender import RankedRecommendation, recommend
from .state import StudentState
from .working_time import (
	SESSION_GAP_SECONDS,
	EventKind,
	PercentileTable,
	WorkEvent,
	compute_working_time,
	working_time_percentile_band,
)

logger = get_logger(__name__)

DEFAULT_SALT = "adaptive-tutor"
DEFAULT_TOLERANCE_SECONDS = 300.0

# que tipo de ação cada intervenção aceita; a sombra aceita qualquer uma
_ACCEPTS = {
	InterventionKind.RFC_PROMPT: {ActionKind.RFC_SENT},
	InterventionKind.BREAK_PROMPT: {ActionKind.BREAK_TAKEN},
	InterventionKind.SHADOW: {ActionKind.RFC_SENT, ActionKind.BREAK_TAKEN},
}


@dataclass(frozen=True)
class Ack:
	seq: Optional[int]
	duplicate: bool = False

	def to_dict(self) -> Dict[str, Any]:
		return {"seq": self.seq, "duplicate": self.duplicate}


@dataclass(frozen=True)
class Decision:
	decision_id: int
	kind: InterventionKind
	target_seconds: float

	def to_dict(self) -> Dict[str, Any]:
		return {"decision_id": self.decision_id, "kind": self.kind.value, "target_seconds": self.target_seconds}


@dataclass(frozen=True)
class TimerStatus:
	student_id: str
	exercise_id: str
	session_active_seconds: float
	total_active_seconds: float
	target_seconds: float
	focused: bool
	solved: bool
	fired_this_session: int

	def to_dict(self) -> Dict[str, Any]:
		return dict(self.__dict__)


@dataclass
class ExerciseTimer:
	state: TimerState
	last_activity_at: float
	total_active_seconds: float = 0.0
	focus_lost_at: Optional[float] = None
	session_closed: bool = False

	def to_dict(self) -> Dict[str, Any]:
		return {
			"accumulated_active_seconds": self.state.accumulated_active_seconds,
			"focused": self.state.focused,
			"target_seconds": self.state.target_seconds,
			"fired_this_session": self.state.fired_this_session,
			"solved": self.state.solved,
			"last_activity_at": self.last_activity_at,
			"total_active_seconds": self.total_active_seconds,
			"focus_lost_at": self.focus_lost_at,
			"session_closed": self.session_closed,
		}


class TutorEngine:
	def __init__(
		self,
		plan: CoursePlan,
		policy: InterventionPolicy | None = None,
		*,
		salt: str = DEFAULT_SALT,
		timestamp_tolerance_seconds: float = DEFAULT_TOLERANCE_SECONDS,
		session_gap_seconds: float = SESSION_GAP_SECONDS,
	) -> None:
		self.plan = plan
		self.policy = policy or InterventionPolicy()
		self.salt = salt
		self.timestamp_tolerance_seconds = timestamp_tolerance_seconds
		self.session_gap_seconds = session_gap_seconds

		self.students: Dict[str, StudentState] = {}
		self.tables: Dict[str, PercentileTable] = {e.id: PercentileTable(e.id) for e in plan.exercises}
		self.timers: Dict[Tuple[str, str], ExerciseTimer] = {}
		self.knowledge: Dict[str, KnowledgeVector] = {}
		self.decisions: List[InterventionRecord] = []
		self.journal: List[Dict[str, Any]] = []

		self._streams: Dict[Tuple[str, str], List[WorkEvent]] = {}
		self._seen: set[Tuple[str, str, float, str]] = set()
		self._open: Dict[Tuple[str, str], List[int]] = {}
		self._lock = threading.RLock()

	# entrada

	def ingest(self, event: WorkEvent) -> Ack:
		with self._lock:
			if not self.plan.has_exercise(event.exercise_id):
				raise EventError(f"event references unknown exercise '{event.exercise_id}'")
			if event.key in self._seen:
				return Ack(seq=None, duplicate=True)
			student = self.students.get(event.student_id)
			if (
				student is not None
				and student.last_timestamp is not None
				and student.last_timestamp - event.timestamp > self.timestamp_tolerance_seconds
			):
				raise TimestampRegressionError(
					f"event at {event.timestamp} for student '{event.student_id}' is older than "
					f"{student.last_timestamp} beyond the {self.timestamp_tolerance_seconds:g} s tolerance"
				)
			seq = self._append_journal({"type": "event", **event.to_dict()})
			self._apply_event(event)
			return Ack(seq=seq)

	def intervention_check(self, student_id: str, exercise_id: str, now: float) -> Optional[Decision]:
		with self._lock:
			student = self._known_student(student_id)
			if not self.plan.has_exercise(exercise_id):
				raise UnknownExerciseError(f"unknown exercise '{exercise_id}'")
			timer = self.timers.get((student_id, exercise_id))
			if timer is None or timer.state.solved or timer.session_closed:
				return None
			idle = now - timer.last_activity_at
			if idle >= self.session_gap_seconds:
				return None
			state = timer.state
			projected = state.accumulated_active_seconds
			if state.focused and idle > 0:
				projected += idle
			view = replace(state, accumulated_active_seconds=projected)
			counters = CapCounters(
				today_count=student.daily_interventions.get(day_of(now), 0),
				exercise_count=student.exercise_interventions.get(exercise_id, 0),
			)
			group = student.groups.intervention_group
			if group == InterventionGroup.CONTROL:
				if should_fire(view, counters, InterventionGroup.RFC, self.policy) is None:
					return None
				kind = InterventionKind.SHADOW
			else:
				kind = should_fire(view, counters, group, self.policy)
				if kind is None:
					return None
			record = InterventionRecord(
				student_id=student_id,
				exercise_id=exercise_id,
				kind=kind,
				fired_at=now,
				target_seconds=state.target_seconds,
				session_active_seconds=projected,
				disposition=Disposition.SHADOW if kind == InterventionKind.SHADOW else Disposition.SHOWN,
			)
			self._append_journal({"type": "decision", **record.to_dict()})
			decision_id = self._apply_decision(record)
			logger.debug("Intervention %s for %s on %s at %.0f", kind.value, student_id, exercise_id, now)
			if kind == InterventionKind.SHADOW:
				return None
			return Decision(decision_id=decision_id, kind=kind, target_seconds=state.target_seconds)

	def record_disposition(self, decision_id: int, disposition: Disposition) -> InterventionRecord:
		with self._lock:
			if not 0 <= decision_id < len(self.decisions):
				raise UnknownDecisionError(f"unknown decision {decision_id}")
			disposition = Disposition(disposition)
			self._append_journal({"type": "disposition", "decision_id": decision_id, "disposition": disposition.value})
			self._apply_disposition(decision_id, disposition)
			return self.decisions[decision_id]

	def submit_outcome(self, student_id: str, exercise_id: str, score_fraction: float, at: float) -> KnowledgeVector:
		self.ingest(WorkEvent(student_id, exercise_id, at, EventKind.SUBMIT, score_fraction))
		return self.knowledge_snapshot(student_id)

	# consultas

	def timer_status(self, student_id: str, exercise_id: str, now: Optional[float] = None) -> TimerStatus:
		with self._lock:
			self._known_student(student_id)
			timer = self.timers.get((student_id, exercise_id))
			if timer is None:
				raise UnknownExerciseError(f"student '{student_id}' never opened exercise '{exercise_id}'")
			session = timer.state.accumulated_active_seconds
			total = timer.total_active_seconds
			if now is not None and timer.state.focused and not timer.state.solved:
				idle = now - timer.last_activity_at
				if 0 < idle < self.session_gap_seconds:
					session += idle
					total += idle
			return TimerStatus(
				student_id=student_id,
				exercise_id=exercise_id,
				session_active_seconds=session,
				total_active_seconds=total,
				target_seconds=timer.state.target_seconds,
				focused=timer.state.focused,
				solved=timer.state.solved,
				fired_this_session=timer.state.fired_this_session,
			)

	def knowledge_snapshot(self, student_id: str) -> KnowledgeVector:
		with self._lock:
			self._known_student(student_id)
			return self.knowledge.get(student_id) or KnowledgeVector(student_id)

	def recommend(self, student_id: str, week: int) -> RankedRecommendation:
		with self._lock:
			student = self._known_student(student_id)
			vector = self.knowledge.get(student_id) or KnowledgeVector(student_id)
			return recommend(week, student, vector, self.plan, student.groups.bonus_group)

	def groups_for(self, student_id: str) -> GroupAssignment:
		student = self.students.get(student_id)
		return student.groups if student is not None else assign_groups(student_id, self.salt)

	def assignments(self) -> Dict[str, GroupAssignment]:
		return {sid: s.groups for sid, s in self.students.items()}

	def events(self) -> List[WorkEvent]:
		return [WorkEvent.from_dict(r) for r in self.journal if r["type"] == "event"]

	def snapshots(self) -> Dict[str, Dict[str, Dict[str, Any]]]:
		"""Estado derivado, indexado por arquivo e chave, pronto para serializar."""
		with self._lock:
			students = {sid: s.to_dict() for sid, s in self.students.items()}
			for (sid, eid), timer in self.timers.items():
				students[sid].setdefault("timers", {})[eid] = timer.to_dict()
			return {
				"students": students,
				"knowledge": {
					sid: {
						"scores": dict(sorted(v.scores.items())),
						"coverage": dict(sorted(v.coverage.items())),
						"history": [o.to_dict() for o in v.history],
					}
					for sid, v in self.knowledge.items()
				},
				"percentiles": {eid: {"samples": list(t.samples)} for eid, t in self.tables.items()},
			}

	# replay

	def apply_record(self, record: Mapping[str, Any]) -> None:
		"""Reaplica uma linha do journal, sem as checagens de entrada."""
		with self._lock:
			kind = record["type"]
			payload = {k: v for k, v in record.items() if k not in ("type", "seq")}
			self._append_journal({"type": kind, **payload})
			if kind == "event":
				self._apply_event(WorkEvent.from_dict(payload))
			elif kind == "decision":
				self._apply_decision(InterventionRecord.from_dict(payload))
			elif kind == "disposition":
				self._apply_disposition(int(payload["decision_id"]), Disposition(payload["disposition"]))
			else:
				raise EventError(f"unknown journal record type '{kind}'")

	@classmethod
	def replay(cls, records: Iterable[Mapping[str, Any]], plan: CoursePlan, **kwargs: Any) -> "TutorEngine":
		engine = cls(plan, **kwargs)
		for record in sorted(records, key=lambda r: r["seq"]):
			engine.apply_record(record)
		return engine

	# internos

	def _append_journal(self, record: Dict[str, Any]) -> int:
		seq = len(self.journal)
		self.journal.append({"seq": seq, **record})
		return seq

	def _known_student(self, student_id: str) -> StudentState:
		student = self.students.get(student_id)
		if student is None:
			raise UnknownStudentError(f"unknown student '{student_id}'")
		return student

	def _student(self, student_id: str) -> StudentState:
		student = self.students.get(student_id)
		if student is None:
			student = StudentState(student_id=student_id, groups=assign_groups(student_id, self.salt))
			self.students[student_id] = student
		return student

	def _apply_event(self, event: WorkEvent) -> None:
		self._seen.add(event.key)
		student = self._student(event.student_id)
		student.touch(event.exercise_id)
		if student.last_timestamp is None or event.timestamp > student.last_timestamp:
			student.last_timestamp = event.timestamp

		key = (event.student_id, event.exercise_id)
		stream = self._streams.setdefault(key, [])
		if not stream or stream[-1].timestamp <= event.timestamp:
			stream.append(event)
		else:
			stream.insert(bisect.bisect_right([e.timestamp for e in stream], event.timestamp), event)

		self._advance_timer(event)

		if event.kind == EventKind.RFC:
			student.rfc_count += 1
			self._attribute(key, ActionRecord(kind=ActionKind.RFC_SENT, at=event.timestamp))

		if event.score_fraction is None:
			return
		eid = event.exercise_id
		student.best_scores[eid] = max(student.best_scores.get(eid, 0.0), event.score_fraction)
		previous = student.working_times.get(eid)
		already_solved = previous is not None and previous.reached_full_score
		working_time = compute_working_time(stream)
		student.working_times[eid] = working_time
		if event.kind == EventKind.SUBMIT:
			self._record_submission(student, eid, working_time.active_seconds)
		if working_time.reached_full_score and not already_solved:
			# medição completa: entra na tabela de percentis do exercício
			self.tables[eid].insert(working_time.active_seconds)
			difficulty = self.plan.exercise(eid).difficulty
			student.max_solved_difficulty = max(student.max_solved_difficulty, difficulty)

	def _record_submission(self, student: StudentState, exercise_id: str, active_seconds: float) -> None:
		vector = self.knowledge.get(student.student_id) or KnowledgeVector(student.student_id)
		order = {eid: i for i, eid in enumerate(student.accessed)}
		mine = order[exercise_id]
		position = 1 + sum(
			1 for o in vector.history
			if o.exercise_id != exercise_id and order.get(o.exercise_id, 0) < mine
		)
		outcome = SubmissionOutcome(
			student_id=student.student_id,
			exercise_id=exercise_id,
			best_score_fraction=student.best_scores[exercise_id],
			working_time_band=working_time_percentile_band(active_seconds, self.tables[exercise_id]),
			position=position,
		)
		self.knowledge[student.student_id] = update_on_submission(vector, outcome, self.plan)

	def _advance_timer(self, event: WorkEvent) -> None:
		key = (event.student_id, event.exercise_id)
		ts = event.timestamp
		timer = self.timers.get(key)
		if timer is None:
			target = initial_target(self.tables[event.exercise_id], self.policy)
			timer = ExerciseTimer(
				state=TimerState(event.student_id, event.exercise_id, target_seconds=target),
				last_activity_at=ts,
			)
			self.timers[key] = timer
		else:
			gap = max(0.0, ts - timer.last_activity_at)
			if not timer.state.solved:
				if timer.session_closed or gap >= self.session_gap_seconds:
					self._start_returning_session(timer, event.exercise_id)
				else:
					before = timer.state.accumulated_active_seconds
					timer.state = on_event(timer.state, Tick(gap))
					timer.total_active_seconds += timer.state.accumulated_active_seconds - before
			timer.last_activity_at = max(timer.last_activity_at, ts)

		if timer.focus_lost_at is not None and event.kind != EventKind.FOCUS_LOSS:
			away = ts - timer.focus_lost_at
			if away >= self.session_gap_seconds:
				self._attribute(key, ActionRecord(ActionKind.BREAK_TAKEN, at=timer.focus_lost_at, duration_seconds=away))
				timer.focus_lost_at = None
			elif event.kind == EventKind.FOCUS_GAIN:
				timer.focus_lost_at = None

		if event.kind == EventKind.FOCUS_LOSS:
			timer.state = on_event(timer.state, TimerSignal.FOCUS_LOSS)
			if timer.focus_lost_at is None:
				timer.focus_lost_at = ts
		elif event.kind == EventKind.FOCUS_GAIN:
			timer.state = on_event(timer.state, TimerSignal.FOCUS_GAIN)
		elif event.kind == EventKind.CLOSE:
			timer.session_closed = True
		if event.is_full_score:
			timer.state = on_event(timer.state, TimerSignal.SOLVED)

	def _start_returning_session(self, timer: ExerciseTimer, exercise_id: str) -> None:
		target = returning_target(timer.total_active_seconds, self.tables[exercise_id], self.policy)
		timer.state = replace(
			timer.state,
			accumulated_active_seconds=0.0,
			focused=True,
			fired_this_session=0,
			target_seconds=target,
		)
		timer.session_closed = False

	def _apply_decision(self, record: InterventionRecord) -> int:
		decision_id = len(self.decisions)
		self.decisions.append(record)
		key = (record.student_id, record.exercise_id)
		self._student(record.student_id).count_intervention(day_of(record.fired_at), record.exercise_id)
		timer = self.timers.get(key)
		if timer is not None:
			state = on_event(timer.state, TimerSignal.FIRED)
			# rearma: mais min_active_seconds de trabalho em foco até o próximo disparo
			timer.state = replace(state, target_seconds=record.session_active_seconds + self.policy.min_active_seconds)
		self._open.setdefault(key, []).append(decision_id)
		return decision_id

	def _apply_disposition(self, decision_id: int, disposition: Disposition) -> None:
		self.decisions[decision_id] = replace(self.decisions[decision_id], disposition=disposition)

	def _attribute(self, key: Tuple[str, str], action: ActionRecord) -> None:
		# no máximo per_exercise_cap decisões por (aluno, exercício)
		window = self.policy.attribution_window_seconds
		for i in reversed(self._open.get(key, [])):
			record = self.decisions[i]
			if record.fired_at > action.at or action.kind not in _ACCEPTS[record.kind]:
				continue
			updated = attribute_action(record, action, window)
			if updated is not record:
				self.decisions[i] = updated
				return
