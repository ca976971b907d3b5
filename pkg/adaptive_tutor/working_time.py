from __future__ import annotations

import bisect
import math
import threading
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import EmptyTableError, EventError

# Intervalos a partir de cinco minutos são pausas e não contam.
SESSION_GAP_SECONDS = 300.0


class EventKind(str, Enum):
	RUN = "run"
	ASSESS = "assess"
	SUBMIT = "submit"
	AUTOSAVE = "autosave"
	FOCUS_GAIN = "focus_gain"
	FOCUS_LOSS = "focus_loss"
	RFC = "rfc"
	CLOSE = "close"


@dataclass(frozen=True)
class WorkEvent:
	student_id: str
	exercise_id: str
	timestamp: float
	kind: EventKind
	score_fraction: Optional[float] = None

	def __post_init__(self) -> None:
		if not self.student_id or not self.exercise_id:
			raise EventError("event needs a student id and an exercise id")
		if not isinstance(self.kind, EventKind):
			try:
				object.__setattr__(self, "kind", EventKind(self.kind))
			except ValueError as e:
				raise EventError(f"unknown event kind '{self.kind}'") from e
		if self.timestamp is None or not math.isfinite(self.timestamp) or self.timestamp < 0:
			raise EventError(f"event timestamp must be non-negative, got {self.timestamp}")
		if self.score_fraction is not None and not 0.0 <= self.score_fraction <= 1.0:
			raise EventError(f"score_fraction must lie in [0, 1], got {self.score_fraction}")

	@property
	def key(self) -> Tuple[str, str, float, str]:
		"""Chave de deduplicação (aluno, exercício, instante, tipo)."""
		return (self.student_id, self.exercise_id, self.timestamp, self.kind.value)

	@property
	def is_full_score(self) -> bool:
		return self.score_fraction is not None and self.score_fraction >= 1.0

	def to_dict(self) -> Dict[str, Any]:
		data: Dict[str, Any] = {
			"student_id": self.student_id,
			"exercise_id": self.exercise_id,
			"timestamp": self.timestamp,
			"kind": self.kind.value,
		}
		if self.score_fraction is not None:
			data["score_fraction"] = self.score_fraction
		return data

	@classmethod
	def from_dict(cls, data: Mapping[str, Any]) -> "WorkEvent":
		if not isinstance(data, Mapping):
			raise EventError(f"malformed event: expected an object, got {data!r}")
		try:
			score = data.get("score_fraction")
			return cls(
				student_id=str(data["student_id"]),
				exercise_id=str(data["exercise_id"]),
				timestamp=float(data["timestamp"]),
				kind=EventKind(data["kind"]),
				score_fraction=None if score is None else float(score),
			)
		except (KeyError, TypeError, ValueError) as e:
			if isinstance(e, EventError):
				raise
			raise EventError(f"malformed event {dict(data)!r}: {e}") from e


@dataclass(frozen=True)
class WorkingTime:
	student_id: str
	exercise_id: str
	active_seconds: float
	reached_full_score: bool
	first_full_score_at: Optional[float] = None


def compute_working_time(events: Sequence[WorkEvent]) -> WorkingTime:
	"""Soma os intervalos entre eventos consecutivos menores que cinco minutos.

	Só contam os eventos até (inclusive) a primeira pontuação máxima; o que vem
	depois é ignorado.
	"""
	if not events:
		raise EventError("working time needs at least one event")
	first = events[0]
	active = 0.0
	previous: Optional[float] = None
	full_at: Optional[float] = None
	for event in events:
		if event.student_id != first.student_id or event.exercise_id != first.exercise_id:
			raise EventError("events for working time must share one student and exercise")
		if previous is not None and event.timestamp < previous:
			raise EventError("events for working time must be sorted by timestamp")
		if full_at is None:
			if previous is not None:
				gap = event.timestamp - previous
				if gap < SESSION_GAP_SECONDS:
					active += gap
			if event.is_full_score:
				full_at = event.timestamp
		previous = event.timestamp
	return WorkingTime(
		student_id=first.student_id,
		exercise_id=first.exercise_id,
		active_seconds=active,
		reached_full_score=full_at is not None,
		first_full_score_at=full_at,
	)


def group_events(events: Iterable[WorkEvent]) -> Dict[Tuple[str, str], List[WorkEvent]]:
	"""Agrupa por (aluno, exercício), com ordenação estável por instante."""
	grouped: Dict[Tuple[str, str], List[WorkEvent]] = defaultdict(list)
	for event in events:
		grouped[(event.student_id, event.exercise_id)].append(event)
	for stream in grouped.values():
		stream.sort(key=lambda e: e.timestamp)
	return dict(grouped)


class TimeBand(str, Enum):
	LT40 = "lt40"
	LT60 = "lt60"
	LT80 = "lt80"
	GTE80 = "gte80"


@dataclass
class PercentileTable:
	"""Amostras de tempo de trabalho de um exercício, sempre ordenadas.

	Um escritor por exercício (`insert` serializado pelo lock); leitores usam
	`snapshot()` quando precisam de uma visão estável.
	"""

	exercise_id: str
	samples: List[float] = field(default_factory=list)
	_lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

	def __post_init__(self) -> None:
		self.samples = sorted(float(s) for s in self.samples)

	@property
	def count(self) -> int:
		return len(self.samples)

	def insert(self, seconds: float) -> None:
		if seconds < 0:
			raise ValueError(f"working time must be non-negative, got {seconds}")
		with self._lock:
			bisect.insort(self.samples, float(seconds))

	def snapshot(self) -> "PercentileTable":
		with self._lock:
			return PercentileTable(self.exercise_id, list(self.samples))


def percentile(table: PercentileTable, p: float) -> float:
	"""Percentil por posto mais próximo: elemento de posto ⌈p·n⌉ (base 1)."""
	if not 0.0 < p < 1.0:
		raise ValueError(f"percentile must lie in (0, 1), got {p}")
	samples = table.samples
	n = len(samples)
	if n == 0:
		raise EmptyTableError(f"no working-time samples for exercise '{table.exercise_id}'")
	# arredonda antes do teto: 0.7 * 10 não pode virar posto 8
	rank = max(1, math.ceil(round(p * n, 9)))
	return samples[min(rank, n) - 1]


def working_time_percentile_band(student_time: float, table: PercentileTable) -> TimeBand:
	if table.count == 0:
		return TimeBand.LT40
	if student_time < percentile(table, 0.4):
		return TimeBand.LT40
	if student_time < percentile(table, 0.6):
		return TimeBand.LT60
	if student_time < percentile(table, 0.8):
		return TimeBand.LT80
	return TimeBand.GTE80
