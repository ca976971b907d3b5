from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .domain import GroupAssignment
from .working_time import WorkingTime


@dataclass
class StudentState:
	"""Estado acumulado de um aluno: histórico de acesso, tempos, contadores."""

	student_id: str
	groups: GroupAssignment
	# ordem do primeiro acesso (define ι(e, E_s))
	accessed: List[str] = field(default_factory=list)
	working_times: Dict[str, WorkingTime] = field(default_factory=dict)
	best_scores: Dict[str, float] = field(default_factory=dict)
	max_solved_difficulty: int = 0
	daily_interventions: Dict[int, int] = field(default_factory=dict)
	exercise_interventions: Dict[str, int] = field(default_factory=dict)
	rfc_count: int = 0
	last_timestamp: Optional[float] = None

	def has_accessed(self, exercise_id: str) -> bool:
		return exercise_id in self.accessed

	def touch(self, exercise_id: str) -> None:
		if exercise_id not in self.accessed:
			self.accessed.append(exercise_id)

	def count_intervention(self, day: int, exercise_id: str) -> None:
		self.daily_interventions[day] = self.daily_interventions.get(day, 0) + 1
		self.exercise_interventions[exercise_id] = self.exercise_interventions.get(exercise_id, 0) + 1

	def to_dict(self) -> Dict[str, Any]:
		return {
			"student_id": self.student_id,
			"intervention_group": self.groups.intervention_group.value,
			"bonus_group": self.groups.bonus_group.value,
			"accessed": list(self.accessed),
			"working_times": {
				eid: {
					"active_seconds": wt.active_seconds,
					"reached_full_score": wt.reached_full_score,
					"first_full_score_at": wt.first_full_score_at,
				}
				for eid, wt in sorted(self.working_times.items())
			},
			"best_scores": dict(sorted(self.best_scores.items())),
			"max_solved_difficulty": self.max_solved_difficulty,
			"daily_interventions": {str(day): n for day, n in sorted(self.daily_interventions.items())},
			"exercise_interventions": dict(sorted(self.exercise_interventions.items())),
			"rfc_count": self.rfc_count,
			"last_timestamp": self.last_timestamp,
		}
