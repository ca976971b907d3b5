"""Máquina de estados das intervenções just-in-time.

O temporizador só anda com a aba do exercício em foco, congela de vez quando
o exercício é resolvido, e os disparos respeitam o piso de 10 minutos, o
percentil de gatilho e os limites diário e por exercício.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Union

from .domain import InterventionGroup
from .errors import AttributionError, ConfigError, EmptyTableError, EventError
from .working_time import PercentileTable, percentile

SECONDS_PER_DAY = 86400


class InterventionKind(str, Enum):
	RFC_PROMPT = "rfc_prompt"
	BREAK_PROMPT = "break_prompt"
	# decisão que teria sido tomada para um aluno do grupo controle; nunca é entregue
	SHADOW = "shadow"


class ActionKind(str, Enum):
	RFC_SENT = "rfc_sent"
	BREAK_TAKEN = "break_taken"


class Disposition(str, Enum):
	SHOWN = "shown"
	DISMISSED = "dismissed"
	ACTED = "acted"
	SHADOW = "shadow"


GROUP_KIND = {
	InterventionGroup.BREAK: InterventionKind.BREAK_PROMPT,
	InterventionGroup.RFC: InterventionKind.RFC_PROMPT,
}


@dataclass(frozen=True)
class InterventionPolicy:
	trigger_percentile: float = 0.75
	min_active_seconds: float = 600.0
	daily_cap: int = 3
	per_exercise_cap: int = 2
	attribution_window_seconds: float = 600.0

	def __post_init__(self) -> None:
		if not 0.0 < self.trigger_percentile < 1.0:
			raise ConfigError(f"trigger_percentile must lie in (0, 1), got {self.trigger_percentile}")
		if self.min_active_seconds <= 0 or self.attribution_window_seconds <= 0:
			raise ConfigError("policy durations must be positive")
		if self.daily_cap < 1 or self.per_exercise_cap < 1:
			raise ConfigError("intervention caps must be at least 1")

	def to_dict(self) -> Dict[str, Any]:
		return {
			"trigger_percentile": self.trigger_percentile,
			"min_active_seconds": self.min_active_seconds,
			"daily_cap": self.daily_cap,
			"per_exercise_cap": self.per_exercise_cap,
			"attribution_window_seconds": self.attribution_window_seconds,
		}


@dataclass(frozen=True)
class TimerState:
	student_id: str
	exercise_id: str
	accumulated_active_seconds: float = 0.0
	focused: bool = True
	target_seconds: float = 600.0
	fired_this_session: int = 0
	solved: bool = False


class TimerSignal(str, Enum):
	FOCUS_GAIN = "focus_gain"
	FOCUS_LOSS = "focus_loss"
	SOLVED = "solved"
	FIRED = "fired"


@dataclass(frozen=True)
class Tick:
	seconds: float


@dataclass(frozen=True)
class CapCounters:
	today_count: int = 0
	exercise_count: int = 0


@dataclass(frozen=True)
class ActionRecord:
	kind: ActionKind
	at: float
	# duração da pausa, só para BREAK_TAKEN
	duration_seconds: Optional[float] = None

	def to_dict(self) -> Dict[str, Any]:
		data: Dict[str, Any] = {"kind": self.kind.value, "at": self.at}
		if self.duration_seconds is not None:
			data["duration_seconds"] = self.duration_seconds
		return data

	@classmethod
	def from_dict(cls, data: Mapping[str, Any]) -> "ActionRecord":
		duration = data.get("duration_seconds")
		return cls(
			kind=ActionKind(data["kind"]),
			at=float(data["at"]),
			duration_seconds=None if duration is None else float(duration),
		)


@dataclass(frozen=True)
class InterventionRecord:
	student_id: str
	exercise_id: str
	kind: InterventionKind
	fired_at: float
	target_seconds: float = 0.0
	session_active_seconds: float = 0.0
	disposition: Disposition = Disposition.SHOWN
	attributed_action: Optional[ActionRecord] = None

	@property
	def delivered(self) -> bool:
		return self.kind != InterventionKind.SHADOW

	def to_dict(self) -> Dict[str, Any]:
		return {
			"student_id": self.student_id,
			"exercise_id": self.exercise_id,
			"kind": self.kind.value,
			"fired_at": self.fired_at,
			"target_seconds": self.target_seconds,
			"session_active_seconds": self.session_active_seconds,
			"disposition": self.disposition.value,
			"attributed_action": None if self.attributed_action is None else self.attributed_action.to_dict(),
		}

	@classmethod
	def from_dict(cls, data: Mapping[str, Any]) -> "InterventionRecord":
		action = data.get("attributed_action")
		return cls(
			student_id=str(data["student_id"]),
			exercise_id=str(data["exercise_id"]),
			kind=InterventionKind(data["kind"]),
			fired_at=float(data["fired_at"]),
			target_seconds=float(data.get("target_seconds", 0.0)),
			session_active_seconds=float(data.get("session_active_seconds", 0.0)),
			disposition=Disposition(data.get("disposition", Disposition.SHOWN.value)),
			attributed_action=None if action is None else ActionRecord.from_dict(action),
		)


def day_of(timestamp: float) -> int:
	"""Dia UTC usado no limite diário."""
	return int(timestamp // SECONDS_PER_DAY)


def _trigger_time(table: PercentileTable, policy: InterventionPolicy) -> Optional[float]:
	try:
		return percentile(table, policy.trigger_percentile)
	except EmptyTableError:
		return None


def initial_target(percentile_table: PercentileTable, policy: InterventionPolicy) -> float:
	"""Alvo da primeira sessão: max(p75, piso); só o piso com tabela vazia."""
	p = _trigger_time(percentile_table, policy)
	if p is None:
		return policy.min_active_seconds
	return max(p, policy.min_active_seconds)


def returning_target(
	prior_active_seconds: float,
	percentile_table: PercentileTable,
	policy: InterventionPolicy,
) -> float:
	"""Alvo de quem volta ao exercício: max(p75 - tempo já trabalhado, piso)."""
	if prior_active_seconds < 0:
		raise ValueError(f"prior_active_seconds must be non-negative, got {prior_active_seconds}")
	p = _trigger_time(percentile_table, policy)
	if p is None:
		return policy.min_active_seconds
	return max(p - prior_active_seconds, policy.min_active_seconds)


TimerEvent = Union[TimerSignal, Tick]


def on_event(state: TimerState, event: TimerEvent) -> TimerState:
	if isinstance(event, Tick):
		if event.seconds < 0:
			raise EventError(f"tick must be non-negative, got {event.seconds}")
		if state.focused and not state.solved:
			return replace(state, accumulated_active_seconds=state.accumulated_active_seconds + event.seconds)
		return state
	if event == TimerSignal.FOCUS_LOSS:
		return replace(state, focused=False)
	if event == TimerSignal.FOCUS_GAIN:
		return replace(state, focused=True)
	if event == TimerSignal.SOLVED:
		return replace(state, solved=True)
	if event == TimerSignal.FIRED:
		return replace(state, fired_this_session=state.fired_this_session + 1)
	raise EventError(f"unknown timer event {event!r}")


def should_fire(
	state: TimerState,
	counters: CapCounters,
	group: InterventionGroup,
	policy: InterventionPolicy,
) -> Optional[InterventionKind]:
	if group == InterventionGroup.CONTROL:
		return None
	if state.solved or state.accumulated_active_seconds < state.target_seconds:
		return None
	if counters.today_count >= policy.daily_cap:
		return None
	if counters.exercise_count >= policy.per_exercise_cap:
		return None
	return GROUP_KIND[group]


def attribute_action(
	record: InterventionRecord,
	action: ActionRecord,
	window: float = InterventionPolicy.attribution_window_seconds,
) -> InterventionRecord:
	"""Credita a ação à intervenção se ocorreu em menos de `window` segundos."""
	if action.at < record.fired_at:
		raise AttributionError(
			f"action at {action.at} precedes the intervention fired at {record.fired_at}"
		)
	if record.attributed_action is not None:
		return record
	if action.at - record.fired_at < window:
		return replace(record, attributed_action=action)
	return record
