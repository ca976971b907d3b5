from __future__ import annotations

import hashlib
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import CoursePlanError
from .logs import get_logger

logger = get_logger(__name__)

DATA_DIR = Path(__file__).resolve().parent / "data"
SAMPLE_COURSE = DATA_DIR / "sample_course.yaml"

# Acima disso o curso fica difícil de anotar; só avisamos.
RECOMMENDED_MAX_TOPICS = 3


class Pool(str, Enum):
	STANDARD = "standard"
	BONUS = "bonus"
	DUMMY = "dummy"


class InterventionGroup(str, Enum):
	CONTROL = "control"
	BREAK = "break"
	RFC = "rfc"


class BonusGroup(str, Enum):
	DUMMY = "dummy"
	RANDOM = "random"
	TAILORED = "tailored"


@dataclass(frozen=True)
class Topic:
	id: str
	name: str


@dataclass(frozen=True)
class TopicWeight:
	topic: str
	weight: float


@dataclass(frozen=True)
class ExerciseSpec:
	id: str
	title: str
	topics: Tuple[TopicWeight, ...]
	difficulty: int
	week: int
	pool: Pool = Pool.STANDARD

	def weight_of(self, topic_id: str) -> float:
		"""ρ(t, e): participação do tópico no exercício (0 se ausente)."""
		for tw in self.topics:
			if tw.topic == topic_id:
				return tw.weight
		return 0.0

	@property
	def topic_ids(self) -> Tuple[str, ...]:
		return tuple(tw.topic for tw in self.topics)


@dataclass(frozen=True)
class CoursePlan:
	topics: Tuple[Topic, ...]
	exercises: Tuple[ExerciseSpec, ...]
	weeks: int
	_topics_by_id: Dict[str, Topic] = field(init=False, repr=False, compare=False)
	_exercises_by_id: Dict[str, ExerciseSpec] = field(init=False, repr=False, compare=False)

	def __post_init__(self) -> None:
		object.__setattr__(self, "_topics_by_id", {t.id: t for t in self.topics})
		object.__setattr__(self, "_exercises_by_id", {e.id: e for e in self.exercises})

	def topic(self, topic_id: str) -> Topic:
		return self._topics_by_id[topic_id]

	def exercise(self, exercise_id: str) -> ExerciseSpec:
		return self._exercises_by_id[exercise_id]

	def has_exercise(self, exercise_id: str) -> bool:
		return exercise_id in self._exercises_by_id

	def week_exercises(self, week: int, pool: Pool | None = None) -> List[ExerciseSpec]:
		return [
			e for e in self.exercises
			if e.week == week and (pool is None or e.pool == pool)
		]

	def bonus_pool(self, week: int) -> List[ExerciseSpec]:
		return self.week_exercises(week, Pool.BONUS)

	def dummy_exercise(self, week: int) -> Optional[ExerciseSpec]:
		dummies = self.week_exercises(week, Pool.DUMMY)
		return dummies[0] if dummies else None

	def week_topics(self, week: int) -> set[str]:
		"""Tópicos praticados nos exercícios padrão da semana."""
		return {
			tw.topic
			for e in self.week_exercises(week, Pool.STANDARD)
			for tw in e.topics
		}

	def to_dict(self) -> Dict[str, Any]:
		return {
			"weeks": self.weeks,
			"topics": [{"id": t.id, "name": t.name} for t in self.topics],
			"exercises": [
				{
					"id": e.id,
					"title": e.title,
					"week": e.week,
					"difficulty": e.difficulty,
					"pool": e.pool.value,
					"topics": [{"topic": tw.topic, "weight": tw.weight} for tw in e.topics],
				}
				for e in self.exercises
			],
		}


@dataclass(frozen=True)
class GroupAssignment:
	student_id: str
	intervention_group: InterventionGroup
	bonus_group: BonusGroup


# Formato do arquivo de curso (YAML ou JSON)


class _TopicModel(BaseModel):
	model_config = ConfigDict(extra="forbid")

	id: str = Field(min_length=1)
	name: Optional[str] = None


class _TopicRefModel(BaseModel):
	model_config = ConfigDict(extra="forbid")

	topic: str
	weight: float = Field(default=1.0, gt=0)


class _ExerciseModel(BaseModel):
	model_config = ConfigDict(extra="forbid")

	id: str = Field(min_length=1)
	title: str = ""
	week: int = Field(ge=1)
	difficulty: int = Field(ge=1)
	pool: Pool = Pool.STANDARD
	topics: List[_TopicRefModel] = Field(default_factory=list)


class _CourseModel(BaseModel):
	model_config = ConfigDict(extra="forbid")

	weeks: Optional[int] = Field(default=None, ge=1)
	topics: List[_TopicModel]
	exercises: List[_ExerciseModel]


def parse_course_plan(text: str) -> CoursePlan:
	try:
		data = yaml.safe_load(text)
	except yaml.YAMLError as e:
		raise CoursePlanError(f"course description does not parse: {e}") from e
	if not isinstance(data, Mapping):
		raise CoursePlanError("course description must be a mapping with 'topics' and 'exercises'")
	return load_course_plan(data)


def load_course_plan(source: str | Path | Mapping[str, Any]) -> CoursePlan:
	"""Carrega e valida o plano do curso.

	`source` pode ser um caminho para um arquivo YAML/JSON ou um mapeamento já
	lido. Os pesos dos tópicos são normalizados para somar 1 em cada exercício.
	"""
	if not isinstance(source, Mapping):
		path = Path(source)
		try:
			text = path.read_text(encoding="utf-8")
		except OSError as e:
			raise CoursePlanError(f"cannot read course description {path}: {e}") from e
		return parse_course_plan(text)

	try:
		model = _CourseModel.model_validate(dict(source))
	except ValidationError as e:
		raise CoursePlanError(f"course description does not parse: {e}") from e

	topics: List[Topic] = []
	for t in model.topics:
		if any(existing.id == t.id for existing in topics):
			raise CoursePlanError(f"duplicate topic id '{t.id}'")
		topics.append(Topic(id=t.id, name=t.name or t.id))
	topic_ids = {t.id for t in topics}

	exercises: List[ExerciseSpec] = []
	seen: set[str] = set()
	for ex in model.exercises:
		if ex.id in seen:
			raise CoursePlanError(f"duplicate exercise id '{ex.id}'")
		seen.add(ex.id)
		exercises.append(_build_exercise(ex, topic_ids))

	max_week = max((e.week for e in exercises), default=1)
	weeks = model.weeks if model.weeks is not None else max_week
	if weeks < max_week:
		raise CoursePlanError(f"exercise assigned to week {max_week} but course has {weeks} weeks")

	_check_bonus_weeks(exercises)
	plan = CoursePlan(topics=tuple(topics), exercises=tuple(exercises), weeks=weeks)
	logger.info("Loaded course plan: %d topics, %d exercises, %d weeks", len(topics), len(exercises), weeks)
	return plan


def _build_exercise(ex: _ExerciseModel, topic_ids: set[str]) -> ExerciseSpec:
	if not ex.topics:
		raise CoursePlanError("exercise must carry at least one topic")
	names = [ref.topic for ref in ex.topics]
	for name in names:
		if name not in topic_ids:
			raise CoursePlanError(f"exercise '{ex.id}' references unknown topic '{name}'")
	if len(set(names)) != len(names):
		raise CoursePlanError(f"exercise '{ex.id}' lists a topic twice")
	if len(names) > RECOMMENDED_MAX_TOPICS:
		logger.warning(
			"Exercise %s carries %d topics (recommended at most %d)",
			ex.id, len(names), RECOMMENDED_MAX_TOPICS,
		)
	total = math.fsum(ref.weight for ref in ex.topics)
	if math.isclose(total, 1.0, rel_tol=0.0, abs_tol=1e-12):
		# já normalizado (por exemplo, plano relido de um store): mantém os bits
		total = 1.0
	weights = tuple(TopicWeight(topic=ref.topic, weight=ref.weight / total) for ref in ex.topics)
	return ExerciseSpec(
		id=ex.id,
		title=ex.title or ex.id,
		topics=weights,
		difficulty=ex.difficulty,
		week=ex.week,
		pool=ex.pool,
	)


def _check_bonus_weeks(exercises: List[ExerciseSpec]) -> None:
	weeks = sorted({e.week for e in exercises if e.pool != Pool.STANDARD})
	for week in weeks:
		bonus = [e for e in exercises if e.week == week and e.pool == Pool.BONUS]
		dummies = [e for e in exercises if e.week == week and e.pool == Pool.DUMMY]
		if not bonus:
			raise CoursePlanError(f"week {week} has a dummy exercise but an empty bonus pool")
		if not dummies:
			raise CoursePlanError(f"week {week} has bonus exercises but no dummy exercise")
		if len(dummies) > 1:
			raise CoursePlanError(f"week {week} has {len(dummies)} dummy exercises, expected exactly one")


# Atribuição determinística aos grupos A/B

GROUP_THRESHOLDS = (0.2, 0.4)
_INTERVENTION_TAG = "intervention"
_BONUS_TAG = "bonus"


def stable_seed(*parts: str) -> int:
	"""Inteiro de 64 bits estável derivado de `parts`."""
	digest = hashlib.sha256("\x1f".join(parts).encode("utf-8")).digest()
	return int.from_bytes(digest[:8], "big")


def stable_unit(*parts: str) -> float:
	"""Hash estável de `parts` mapeado em [0, 1)."""
	return stable_seed(*parts) / 2.0 ** 64


def _bucket(value: float) -> int:
	low, high = GROUP_THRESHOLDS
	if value < low:
		return 0
	if value < high:
		return 1
	return 2


def assign_groups(student_id: str, salt: str) -> GroupAssignment:
	"""Atribui o aluno aos grupos de intervenção e de bônus (20/20/60 cada).

	As duas dimensões usam derivações de hash distintas e são independentes.
	"""
	intervention = _bucket(stable_unit(salt, _INTERVENTION_TAG, student_id))
	bonus = _bucket(stable_unit(salt, _BONUS_TAG, student_id))
	return GroupAssignment(
		student_id=student_id,
		intervention_group=(InterventionGroup.CONTROL, InterventionGroup.BREAK, InterventionGroup.RFC)[intervention],
		bonus_group=(BonusGroup.DUMMY, BonusGroup.RANDOM, BonusGroup.TAILORED)[bonus],
	)
