"""Modelo de conhecimento em espaço vetorial.

Para cada aluno s e tópico t, Θ(s, t) é a média de σ(s, e) ponderada por
δ(e)·ρ(t, e)·φ(e, E_s) sobre os exercícios com resultado registrado.

A função de decaimento φ é a logística com ponto médio 0.5·|E_s| e
inclinação 3 / (0.5·|E_s|), de modo que o denominador nunca zera.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .domain import CoursePlan
from .working_time import TimeBand

# (limiar mínimo da linha, valores por faixa de tempo lt40/lt60/lt80/gte80)
SIGMA_ROWS: Tuple[Tuple[float, Tuple[float, float, float, float]], ...] = (
	(1.0, (1.0, 0.9, 0.8, 0.7)),
	(0.8, (0.6, 0.5, 0.5, 0.4)),
	(0.6, (0.5, 0.4, 0.4, 0.3)),
	(0.4, (0.2, 0.2, 0.2, 0.1)),
	(0.0, (0.0, 0.0, 0.0, 0.0)),
)
BAND_COLUMN = {
	TimeBand.LT40: 0,
	TimeBand.LT60: 1,
	TimeBand.LT80: 2,
	TimeBand.GTE80: 3,
}


@dataclass(frozen=True)
class SubmissionOutcome:
	student_id: str
	exercise_id: str
	best_score_fraction: float
	working_time_band: TimeBand
	position: int

	def __post_init__(self) -> None:
		if self.position < 1:
			raise ValueError(f"position must be >= 1, got {self.position}")
		if not 0.0 <= self.best_score_fraction <= 1.0:
			raise ValueError(f"score fraction must lie in [0, 1], got {self.best_score_fraction}")
		if not isinstance(self.working_time_band, TimeBand):
			object.__setattr__(self, "working_time_band", TimeBand(self.working_time_band))

	def to_dict(self) -> Dict[str, Any]:
		return {
			"exercise_id": self.exercise_id,
			"best_score_fraction": self.best_score_fraction,
			"working_time_band": self.working_time_band.value,
			"position": self.position,
		}


@dataclass(frozen=True)
class KnowledgeVector:
	student_id: str
	scores: Dict[str, float] = field(default_factory=dict)
	coverage: Dict[str, int] = field(default_factory=dict)
	history: Tuple[SubmissionOutcome, ...] = ()

	def records(self) -> List[Dict[str, Any]]:
		"""Linhas exportáveis (student_id, topic_id, score, coverage)."""
		return [
			{
				"student_id": self.student_id,
				"topic_id": topic,
				"score": self.scores[topic],
				"coverage": self.coverage[topic],
			}
			for topic in sorted(self.scores)
		]


def sigma(score_fraction: float, band: TimeBand) -> float:
	column = BAND_COLUMN[TimeBand(band)]
	for threshold, values in SIGMA_ROWS:
		if score_fraction >= threshold:
			return values[column]
	return 0.0


def scoring_sigma(outcome: SubmissionOutcome) -> float:
	"""Consulta exata da tabela σ; a pontuação cai para a linha inferior."""
	return sigma(outcome.best_score_fraction, outcome.working_time_band)


def diminishing_phi(position: int, total: int) -> float:
	if total < 1 or not 1 <= position <= total:
		raise ValueError(f"position {position} out of range 1..{total}")
	midpoint = 0.5 * total
	steepness = 3.0 / midpoint
	return 1.0 / (1.0 + math.exp(-steepness * (position - midpoint)))


def _check_positions(history: Sequence[SubmissionOutcome]) -> None:
	positions = sorted(o.position for o in history)
	if positions != list(range(1, len(history) + 1)):
		raise ValueError("history positions must be 1..n without gaps")


def theta(history: Sequence[SubmissionOutcome], topic: str, plan: CoursePlan) -> Optional[float]:
	"""Θ(s, t); None quando nenhum exercício do histórico toca o tópico."""
	_check_positions(history)
	total = len(history)
	numerator = 0.0
	denominator = 0.0
	for outcome in history:
		exercise = plan.exercise(outcome.exercise_id)
		rho = exercise.weight_of(topic)
		if rho <= 0.0:
			continue
		weight = exercise.difficulty * rho * diminishing_phi(outcome.position, total)
		numerator += scoring_sigma(outcome) * weight
		denominator += weight
	if denominator == 0.0:
		return None
	return min(1.0, max(0.0, numerator / denominator))


def _merge_outcome(
	history: Sequence[SubmissionOutcome], outcome: SubmissionOutcome,
) -> List[SubmissionOutcome]:
	merged = sorted(history, key=lambda o: o.position)
	for i, previous in enumerate(merged):
		if previous.exercise_id == outcome.exercise_id:
			# a melhor pontuação vence; a posição original é mantida
			if outcome.best_score_fraction >= previous.best_score_fraction:
				merged[i] = replace(outcome, position=previous.position)
			return merged
	position = min(max(outcome.position, 1), len(merged) + 1)
	shifted = [
		replace(o, position=o.position + 1) if o.position >= position else o
		for o in merged
	]
	shifted.append(replace(outcome, position=position))
	shifted.sort(key=lambda o: o.position)
	return shifted


def _topic_scores(
	history: Sequence[SubmissionOutcome], topics: Iterable[str], plan: CoursePlan,
	scores: Dict[str, float], coverage: Dict[str, int],
) -> None:
	for topic in topics:
		value = theta(history, topic, plan)
		if value is None:
			scores.pop(topic, None)
			coverage.pop(topic, None)
			continue
		scores[topic] = value
		coverage[topic] = sum(1 for o in history if plan.exercise(o.exercise_id).weight_of(topic) > 0)


def update_on_submission(
	vector: KnowledgeVector, outcome: SubmissionOutcome, plan: CoursePlan,
) -> KnowledgeVector:
	"""Registra o resultado e recalcula Θ dos tópicos do exercício enviado.

	Os demais tópicos ficam com o valor da última atualização, calculado com o
	|E_s| daquele momento; `refresh_knowledge` realinha todos.
	"""
	history = _merge_outcome(vector.history, outcome)
	scores = dict(vector.scores)
	coverage = dict(vector.coverage)
	_topic_scores(history, plan.exercise(outcome.exercise_id).topic_ids, plan, scores, coverage)
	return KnowledgeVector(
		student_id=vector.student_id,
		scores=scores,
		coverage=coverage,
		history=tuple(history),
	)


def refresh_knowledge(vector: KnowledgeVector, plan: CoursePlan) -> KnowledgeVector:
	"""Θ de todos os tópicos cobertos sobre o histórico inteiro, com o |E_s| atual."""
	topics = {t for o in vector.history for t in plan.exercise(o.exercise_id).topic_ids}
	scores: Dict[str, float] = {}
	coverage: Dict[str, int] = {}
	_topic_scores(vector.history, sorted(topics), plan, scores, coverage)
	return replace(vector, scores=scores, coverage=coverage)


def weakest_topic(vector: KnowledgeVector, week_topics: Iterable[str]) -> Optional[str]:
	covered = [t for t in week_topics if t in vector.scores]
	if not covered:
		return None
	return min(covered, key=lambda t: (vector.scores[t], t))
