"""Coorte sintética e harness do experimento A/B.

Cada agente percorre os exercícios da semana e emite eventos pelo motor
completo (`TutorEngine`), consultando `intervention_check` entre eventos como
faria o frontend. O tempo de trabalho de cada tentativa segue uma log-normal
com mediana por dificuldade, escalada pelo nível do aluno e pela velocidade
individual do agente.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .domain import CoursePlan, ExerciseSpec, GroupAssignment, Pool
from .engine import DEFAULT_SALT, TutorEngine
from .errors import ConfigError
from .interventions import InterventionKind, InterventionPolicy, InterventionRecord, initial_target
from .logs import get_logger
from .working_time import SESSION_GAP_SECONDS, EventKind, WorkEvent

logger = get_logger(__name__)

SECONDS_PER_WEEK = 7 * 86400


class Skill(str, Enum):
	BEGINNER = "beginner"
	SOME_KNOWLEDGE = "some_knowledge"
	GOOD = "good"
	VERY_GOOD = "very_good"
	EXPERT = "expert"


SKILLS: Tuple[Skill, ...] = tuple(Skill)

# beginner | some_knowledge | good + very_good + expert
COARSE_BINS: Dict[Skill, str] = {
	Skill.BEGINNER: "beginner",
	Skill.SOME_KNOWLEDGE: "some_knowledge",
	Skill.GOOD: "experienced",
	Skill.VERY_GOOD: "experienced",
	Skill.EXPERT: "experienced",
}


def _per_skill(*values: float) -> Dict[str, float]:
	return {skill.value: value for skill, value in zip(SKILLS, values)}


def _probability(name: str, value: float) -> None:
	if not 0.0 <= value <= 1.0:
		raise ConfigError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class CohortConfig:
	skill_shares: Mapping[str, float] = field(default_factory=lambda: _per_skill(0.202, 0.478, 0.16, 0.10, 0.06))
	speed_multipliers: Mapping[str, float] = field(default_factory=lambda: _per_skill(1.5, 1.15, 0.9, 0.75, 0.6))
	solve_probability: Mapping[str, float] = field(default_factory=lambda: _per_skill(0.8, 0.88, 0.93, 0.96, 0.98))
	# mediana em minutos para dificuldade 1, 2, ...; acima do último valor cresce linearmente
	median_minutes_by_difficulty: Tuple[float, ...] = (6.0, 10.0, 14.0, 18.0, 22.0)
	working_time_sigma: float = 0.55
	speed_sigma: float = 0.25
	rfc_propensity: float = 0.05
	intervention_responsiveness: float = 0.15
	# só para o grupo RFC
	responsiveness_boost: float = 0.0
	dropout_hazard: float = 0.03
	break_probability: float = 0.1
	break_minutes_median: float = 14.0
	prompted_break_minutes_median: float = 18.0
	bonus_uptake: float = 0.6
	exercise_gap_minutes: float = 5.0
	course_start: float = 1_600_000_000.0

	def __post_init__(self) -> None:
		for name in ("skill_shares", "speed_multipliers", "solve_probability"):
			mapping = dict(getattr(self, name))
			unknown = set(mapping) - {s.value for s in SKILLS}
			if unknown:
				raise ConfigError(f"{name} names unknown skills {sorted(unknown)}")
			object.__setattr__(self, name, mapping)
		shares = self.skill_shares
		if any(v < 0 for v in shares.values()):
			raise ConfigError("skill shares must be non-negative")
		if not math.isclose(math.fsum(shares.values()), 1.0, abs_tol=1e-6):
			raise ConfigError(f"skill shares must sum to 1, got {math.fsum(shares.values()):g}")
		for skill in SKILLS:
			if self.speed_multipliers.get(skill.value, 1.0) <= 0:
				raise ConfigError(f"speed multiplier for {skill.value} must be positive")
			_probability(f"solve_probability[{skill.value}]", self.solve_probability.get(skill.value, 1.0))
		if not self.median_minutes_by_difficulty or any(m <= 0 for m in self.median_minutes_by_difficulty):
			raise ConfigError("median minutes per difficulty must be positive")
		object.__setattr__(self, "median_minutes_by_difficulty", tuple(self.median_minutes_by_difficulty))
		if self.working_time_sigma < 0 or self.speed_sigma < 0:
			raise ConfigError("log-normal sigmas must be non-negative")
		for name in ("rfc_propensity", "intervention_responsiveness", "dropout_hazard", "break_probability", "bonus_uptake"):
			_probability(name, getattr(self, name))
		if not -1.0 <= self.responsiveness_boost <= 1.0:
			raise ConfigError(f"responsiveness_boost must lie in [-1, 1], got {self.responsiveness_boost}")
		if self.break_minutes_median <= 0 or self.prompted_break_minutes_median <= 0:
			raise ConfigError("break medians must be positive")
		if self.exercise_gap_minutes < 0:
			raise ConfigError("exercise_gap_minutes must be non-negative")

	def median_seconds(self, difficulty: int) -> float:
		medians = self.median_minutes_by_difficulty
		if difficulty <= len(medians):
			minutes = medians[max(difficulty, 1) - 1]
		else:
			step = medians[-1] - medians[-2] if len(medians) > 1 else medians[-1]
			minutes = medians[-1] + step * (difficulty - len(medians))
		return minutes * 60.0

	def to_dict(self) -> Dict[str, Any]:
		data = dict(self.__dict__)
		data["skill_shares"] = dict(self.skill_shares)
		data["speed_multipliers"] = dict(self.speed_multipliers)
		data["solve_probability"] = dict(self.solve_probability)
		data["median_minutes_by_difficulty"] = list(self.median_minutes_by_difficulty)
		return data


@dataclass(frozen=True)
class AgentProfile:
	student_id: str
	skill: Skill
	base_speed_multiplier: float
	rfc_propensity: float
	intervention_responsiveness: float
	dropout_hazard_per_struggle: float
	seed: int

	def __post_init__(self) -> None:
		if self.base_speed_multiplier <= 0:
			raise ConfigError(f"speed multiplier must be positive, got {self.base_speed_multiplier}")
		for name in ("rfc_propensity", "intervention_responsiveness", "dropout_hazard_per_struggle"):
			_probability(name, getattr(self, name))

	def to_dict(self) -> Dict[str, Any]:
		return {
			"student_id": self.student_id,
			"skill": self.skill.value,
			"base_speed_multiplier": self.base_speed_multiplier,
			"rfc_propensity": self.rfc_propensity,
			"intervention_responsiveness": self.intervention_responsiveness,
			"dropout_hazard_per_struggle": self.dropout_hazard_per_struggle,
			"seed": self.seed,
		}

	@classmethod
	def from_dict(cls, data: Mapping[str, Any]) -> "AgentProfile":
		return cls(
			student_id=str(data["student_id"]),
			skill=Skill(data["skill"]),
			base_speed_multiplier=float(data["base_speed_multiplier"]),
			rfc_propensity=float(data["rfc_propensity"]),
			intervention_responsiveness=float(data["intervention_responsiveness"]),
			dropout_hazard_per_struggle=float(data["dropout_hazard_per_struggle"]),
			seed=int(data["seed"]),
		)


def allocate_skills(n: int, shares: Mapping[str, float]) -> Dict[Skill, int]:
	"""Maior resto: cada nível recebe floor(n·share) e as sobras vão aos maiores restos."""
	quotas = [(skill, n * shares.get(skill.value, 0.0)) for skill in SKILLS]
	counts = {skill: int(math.floor(q)) for skill, q in quotas}
	remaining = n - sum(counts.values())
	by_remainder = sorted(quotas, key=lambda item: (-(item[1] - math.floor(item[1])), SKILLS.index(item[0])))
	for skill, _ in by_remainder[:remaining]:
		counts[skill] += 1
	return counts


def _beta_around(rng: np.random.Generator, mean: float, concentration: float = 20.0) -> float:
	if mean <= 0.0 or mean >= 1.0:
		return float(mean)
	return float(rng.beta(mean * concentration, (1.0 - mean) * concentration))


def generate_cohort(n: int, config: CohortConfig | None = None, seed: int = 0) -> List[AgentProfile]:
	if n < 1:
		raise ValueError(f"cohort size must be at least 1, got {n}")
	config = config or CohortConfig()
	rng = np.random.default_rng(seed)
	counts = allocate_skills(n, config.skill_shares)
	skills = [skill for skill in SKILLS for _ in range(counts[skill])]
	order = rng.permutation(n)
	width = max(5, len(str(n - 1)))
	cohort: List[AgentProfile] = []
	for i in range(n):
		skill = skills[int(order[i])]
		speed = config.speed_multipliers[skill.value] * float(rng.lognormal(0.0, config.speed_sigma))
		cohort.append(AgentProfile(
			student_id=f"s{i:0{width}d}",
			skill=skill,
			base_speed_multiplier=speed,
			rfc_propensity=_beta_around(rng, config.rfc_propensity),
			intervention_responsiveness=_beta_around(rng, config.intervention_responsiveness),
			dropout_hazard_per_struggle=config.dropout_hazard,
			seed=int(rng.integers(0, 2 ** 63 - 1)),
		))
	return cohort


@dataclass
class SimulationResult:
	engine: TutorEngine
	profiles: List[AgentProfile]
	horizon: int
	dropped_in_week: Dict[str, int] = field(default_factory=dict)

	@property
	def events(self) -> List[WorkEvent]:
		return self.engine.events()

	@property
	def decisions(self) -> List[InterventionRecord]:
		return list(self.engine.decisions)

	def assignments(self) -> Dict[str, GroupAssignment]:
		return {p.student_id: self.engine.groups_for(p.student_id) for p in self.profiles}

	def skills(self) -> Dict[str, str]:
		return {p.student_id: p.skill.value for p in self.profiles}


class _Agent:
	def __init__(
		self, profile: AgentProfile, engine: TutorEngine, config: CohortConfig,
	) -> None:
		self.profile = profile
		self.engine = engine
		self.config = config
		self.rng = np.random.default_rng(profile.seed)
		self.sid = profile.student_id
		self.group = engine.groups_for(profile.student_id).intervention_group

	def run_week(self, week: int, start: float) -> bool:
		"""Percorre a semana a partir de `start`; devolve True se o agente desistiu."""
		t = start
		for exercise in self.engine.plan.week_exercises(week, Pool.STANDARD):
			t, struggled = self._attempt(exercise, t)
			if struggled and self.rng.random() < self.profile.dropout_hazard_per_struggle:
				return True
			t += self.rng.exponential(self.config.exercise_gap_minutes * 60.0) + SESSION_GAP_SECONDS
		if self.engine.plan.bonus_pool(week) and self.sid in self.engine.students:
			if self.rng.random() < self.config.bonus_uptake:
				recommendation = self.engine.recommend(self.sid, week)
				if recommendation.exercise is not None:
					self._attempt(recommendation.exercise, t)
		return False

	def _emit(self, exercise_id: str, at: float, kind: EventKind, score: Optional[float] = None) -> None:
		self.engine.ingest(WorkEvent(self.sid, exercise_id, at, kind, score))

	def _take_break(self, exercise_id: str, at: float, median_minutes: float) -> float:
		away = float(self.rng.lognormal(math.log(median_minutes * 60.0), 0.5))
		away = max(away, SESSION_GAP_SECONDS + 1.0)
		self._emit(exercise_id, at, EventKind.FOCUS_LOSS)
		back = at + away
		self._emit(exercise_id, back, EventKind.FOCUS_GAIN)
		return back

	def _respond(self, decision_kind: InterventionKind, exercise_id: str, t: float) -> float:
		rng = self.rng
		responsiveness = self.profile.intervention_responsiveness
		if decision_kind == InterventionKind.RFC_PROMPT:
			p = min(1.0, max(0.0, responsiveness + self.config.responsiveness_boost))
			if rng.random() < p:
				t += float(rng.uniform(10.0, 240.0))
				self._emit(exercise_id, t, EventKind.RFC)
		elif decision_kind == InterventionKind.BREAK_PROMPT:
			if rng.random() < responsiveness:
				t = self._take_break(exercise_id, t + 5.0, self.config.prompted_break_minutes_median)
		return t

	def _attempt(self, exercise: ExerciseSpec, t0: float) -> Tuple[float, bool]:
		rng = self.rng
		config = self.config
		eid = exercise.id
		median = config.median_seconds(exercise.difficulty) * self.profile.base_speed_multiplier
		work = max(30.0, float(rng.lognormal(math.log(median), config.working_time_sigma)))
		solves = rng.random() < config.solve_probability[self.profile.skill.value]
		final_score = 1.0 if solves else round(float(rng.uniform(0.2, 0.95)), 2)
		struggle_threshold = initial_target(self.engine.tables[eid], self.engine.policy)
		spontaneous_rfc = float(rng.uniform(0.3, 1.0)) * work if rng.random() < self.profile.rfc_propensity else None
		spontaneous_break = float(rng.uniform(0.2, 0.8)) * work if rng.random() < config.break_probability else None

		t = t0
		self._emit(eid, t, EventKind.FOCUS_GAIN)
		done = 0.0
		while done < work:
			step = min(max(float(rng.exponential(75.0)), 5.0), 240.0, work - done)
			t += step
			done += step
			# o frontend consulta o temporizador antes de registrar a próxima ação
			decision = self.engine.intervention_check(self.sid, eid, t)
			if done >= work:
				self._emit(eid, t, EventKind.SUBMIT, final_score)
			elif rng.random() < 0.2:
				self._emit(eid, t, EventKind.ASSESS, round(final_score * 0.9 * done / work, 4))
			else:
				self._emit(eid, t, EventKind.RUN)
			if decision is not None:
				t = self._respond(decision.kind, eid, t)
			if spontaneous_rfc is not None and done >= spontaneous_rfc and done < work:
				t += 5.0
				self._emit(eid, t, EventKind.RFC)
				spontaneous_rfc = None
			if spontaneous_break is not None and done >= spontaneous_break and done < work:
				t = self._take_break(eid, t + 5.0, config.break_minutes_median)
				spontaneous_break = None
		return t, work > struggle_threshold


def simulate(
	cohort: Sequence[AgentProfile],
	plan: CoursePlan,
	policy: InterventionPolicy | None = None,
	horizon: int | None = None,
	*,
	config: CohortConfig | None = None,
	salt: str = DEFAULT_SALT,
) -> SimulationResult:
	"""Roda a coorte pelo motor; resultado determinado por (coorte, plano, política)."""
	config = config or CohortConfig()
	horizon = plan.weeks if horizon is None else horizon
	if not 1 <= horizon <= plan.weeks:
		raise ValueError(f"horizon must lie in 1..{plan.weeks}, got {horizon}")
	engine = TutorEngine(plan, policy, salt=salt)
	agents = {p.student_id: _Agent(p, engine, config) for p in cohort}
	active = sorted(agents)
	dropped: Dict[str, int] = {}
	for week in range(1, horizon + 1):
		week_start = config.course_start + (week - 1) * SECONDS_PER_WEEK
		schedule = sorted(
			(week_start + float(agents[sid].rng.uniform(0.0, 3 * 86400.0)), sid) for sid in active
		)
		for start, sid in schedule:
			if agents[sid].run_week(week, start):
				dropped[sid] = week
		active = [sid for sid in active if sid not in dropped]
		logger.info("Week %d simulated: %d active, %d dropped so far", week, len(active), len(dropped))
	return SimulationResult(engine=engine, profiles=list(cohort), horizon=horizon, dropped_in_week=dropped)
