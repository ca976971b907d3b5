"""Recomendação de exercícios bônus baseada em conteúdo.

Filtra o pool da semana (não repetido, conceitos já vistos, dificuldade até um
nível acima do maior exercício resolvido), ordena pelo benefício potencial e
entrega um único exercício.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .domain import BonusGroup, CoursePlan, ExerciseSpec, stable_seed
from .errors import RecommendationError
from .knowledge import KnowledgeVector, SubmissionOutcome, theta
from .state import StudentState
from .working_time import TimeBand


class Strategy(str, Enum):
	TAILORED = "tailored"
	RANDOM = "random"
	DUMMY = "dummy"
	FALLBACK = "fallback"
	EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class CandidateSet:
	week: int
	candidates: Tuple[ExerciseSpec, ...]


@dataclass(frozen=True)
class RankedRecommendation:
	exercise: Optional[ExerciseSpec]
	benefit: Optional[float]
	fallback: bool
	strategy: Strategy

	@property
	def exhausted(self) -> bool:
		return self.strategy == Strategy.EXHAUSTED

	def to_dict(self) -> dict:
		return {
			"exercise_id": None if self.exercise is None else self.exercise.id,
			"fallback": self.fallback,
			"benefit": self.benefit,
			"strategy": self.strategy.value,
			"exhausted": self.exhausted,
		}


EXHAUSTED = RankedRecommendation(exercise=None, benefit=None, fallback=False, strategy=Strategy.EXHAUSTED)


def filter_candidates(
	pool: Sequence[ExerciseSpec], student: StudentState, vector: KnowledgeVector,
) -> CandidateSet:
	weeks = {e.week for e in pool}
	if len(weeks) > 1:
		raise ValueError(f"candidate pool mixes weeks {sorted(weeks)}")
	ceiling = student.max_solved_difficulty + 1
	kept = [
		e for e in pool
		if not student.has_accessed(e.id)
		and all(t in vector.scores for t in e.topic_ids)
		and e.difficulty <= ceiling
	]
	return CandidateSet(week=weeks.pop() if weeks else 0, candidates=tuple(kept))


def potential_benefit(
	candidate: ExerciseSpec, history: Sequence[SubmissionOutcome], plan: CoursePlan,
) -> float:
	"""Soma dos ganhos de Θ supondo solução completa no menor tempo."""
	hypothetical = SubmissionOutcome(
		student_id=history[0].student_id if history else "",
		exercise_id=candidate.id,
		best_score_fraction=1.0,
		working_time_band=TimeBand.LT40,
		position=len(history) + 1,
	)
	extended = list(history) + [hypothetical]
	benefit = 0.0
	for topic in candidate.topic_ids:
		before = theta(history, topic, plan) if history else None
		after = theta(extended, topic, plan)
		# ganho negativo por reponderação de φ não conta
		benefit += max(0.0, (after or 0.0) - (before or 0.0))
	return benefit


def _easiest(exercises: Sequence[ExerciseSpec]) -> ExerciseSpec:
	return min(exercises, key=lambda e: (e.difficulty, e.id))


def recommend(
	week: int,
	student: StudentState,
	vector: KnowledgeVector,
	plan: CoursePlan,
	bonus_group: BonusGroup,
) -> RankedRecommendation:
	pool = plan.bonus_pool(week)
	if not pool:
		raise RecommendationError(f"week {week} has no bonus pool")

	if bonus_group == BonusGroup.DUMMY:
		dummy = plan.dummy_exercise(week)
		if dummy is None or student.has_accessed(dummy.id):
			return EXHAUSTED
		return RankedRecommendation(
			exercise=dummy,
			benefit=potential_benefit(dummy, vector.history, plan),
			fallback=False,
			strategy=Strategy.DUMMY,
		)

	candidates = filter_candidates(pool, student, vector).candidates
	if not candidates:
		remaining = [e for e in pool if not student.has_accessed(e.id)]
		if not remaining:
			return EXHAUSTED
		return RankedRecommendation(
			exercise=_easiest(remaining), benefit=None, fallback=True, strategy=Strategy.FALLBACK,
		)

	if bonus_group == BonusGroup.RANDOM:
		request_index = sum(1 for e in pool if student.has_accessed(e.id))
		rng = np.random.default_rng(stable_seed(student.student_id, str(week), str(request_index)))
		pick = candidates[int(rng.integers(len(candidates)))]
		return RankedRecommendation(
			exercise=pick,
			benefit=potential_benefit(pick, vector.history, plan),
			fallback=False,
			strategy=Strategy.RANDOM,
		)

	ranked: List[Tuple[float, ExerciseSpec]] = [
		(potential_benefit(e, vector.history, plan), e) for e in candidates
	]
	benefit, best = min(ranked, key=lambda item: (-item[0], item[1].difficulty, item[1].id))
	return RankedRecommendation(exercise=best, benefit=benefit, fallback=False, strategy=Strategy.TAILORED)
