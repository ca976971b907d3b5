"""Arquivo de configuração (YAML) com as seções policy, cohort e experiment.

Precedência: valores padrão < arquivo < flags da linha de comando.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigError
from .interventions import InterventionPolicy
from .simulation import CohortConfig
from .working_time import SESSION_GAP_SECONDS

STORE_ENV = "ADAPTIVE_TUTOR_STORE"

_POLICY_DEFAULTS = InterventionPolicy()
_COHORT_DEFAULTS = CohortConfig()


class PolicyModel(BaseModel):
	model_config = ConfigDict(extra="forbid")

	trigger_percentile: float = Field(default=_POLICY_DEFAULTS.trigger_percentile, gt=0, lt=1)
	min_active_seconds: float = Field(default=_POLICY_DEFAULTS.min_active_seconds, gt=0)
	daily_cap: int = Field(default=_POLICY_DEFAULTS.daily_cap, ge=1)
	per_exercise_cap: int = Field(default=_POLICY_DEFAULTS.per_exercise_cap, ge=1)
	attribution_window_seconds: float = Field(default=_POLICY_DEFAULTS.attribution_window_seconds, gt=0)

	def to_policy(self) -> InterventionPolicy:
		return InterventionPolicy(**self.model_dump())


class CohortModel(BaseModel):
	model_config = ConfigDict(extra="forbid")

	skill_shares: Dict[str, float] = Field(default_factory=lambda: dict(_COHORT_DEFAULTS.skill_shares))
	speed_multipliers: Dict[str, float] = Field(default_factory=lambda: dict(_COHORT_DEFAULTS.speed_multipliers))
	solve_probability: Dict[str, float] = Field(default_factory=lambda: dict(_COHORT_DEFAULTS.solve_probability))
	median_minutes_by_difficulty: Tuple[float, ...] = _COHORT_DEFAULTS.median_minutes_by_difficulty
	working_time_sigma: float = _COHORT_DEFAULTS.working_time_sigma
	speed_sigma: float = _COHORT_DEFAULTS.speed_sigma
	rfc_propensity: float = _COHORT_DEFAULTS.rfc_propensity
	intervention_responsiveness: float = _COHORT_DEFAULTS.intervention_responsiveness
	responsiveness_boost: float = _COHORT_DEFAULTS.responsiveness_boost
	dropout_hazard: float = _COHORT_DEFAULTS.dropout_hazard
	break_probability: float = _COHORT_DEFAULTS.break_probability
	break_minutes_median: float = _COHORT_DEFAULTS.break_minutes_median
	prompted_break_minutes_median: float = _COHORT_DEFAULTS.prompted_break_minutes_median
	bonus_uptake: float = _COHORT_DEFAULTS.bonus_uptake
	exercise_gap_minutes: float = _COHORT_DEFAULTS.exercise_gap_minutes
	course_start: float = _COHORT_DEFAULTS.course_start

	def to_cohort(self) -> CohortConfig:
		return CohortConfig(**self.model_dump())


class ExperimentModel(BaseModel):
	model_config = ConfigDict(extra="forbid")

	salt: str = Field(default="adaptive-tutor", min_length=1)
	timestamp_tolerance_seconds: float = Field(default=300.0, ge=0)
	session_gap_seconds: float = Field(default=SESSION_GAP_SECONDS, gt=0)


class AppConfig(BaseModel):
	model_config = ConfigDict(extra="forbid")

	policy: PolicyModel = Field(default_factory=PolicyModel)
	cohort: CohortModel = Field(default_factory=CohortModel)
	experiment: ExperimentModel = Field(default_factory=ExperimentModel)

	def with_overrides(
		self,
		*,
		policy: Optional[Dict[str, Any]] = None,
		cohort: Optional[Dict[str, Any]] = None,
		experiment: Optional[Dict[str, Any]] = None,
	) -> "AppConfig":
		"""Aplica as flags da CLI; valores None são ignorados."""
		data = self.model_dump()
		for section, values in (("policy", policy), ("cohort", cohort), ("experiment", experiment)):
			for key, value in (values or {}).items():
				if value is not None:
					data[section][key] = value
		return _validate(data, "command-line overrides")


def _validate(data: Any, origin: str) -> AppConfig:
	try:
		config = AppConfig.model_validate(data)
		# os dataclasses validam invariantes que os modelos não cobrem (soma das proporções)
		config.policy.to_policy()
		config.cohort.to_cohort()
	except ValidationError as e:
		raise ConfigError(f"invalid configuration in {origin}: {e}") from e
	return config


def load_config(path: str | Path | None = None) -> AppConfig:
	if path is None:
		return AppConfig()
	path = Path(path)
	try:
		data = yaml.safe_load(path.read_text(encoding="utf-8"))
	except OSError as e:
		raise ConfigError(f"cannot read config file {path}: {e}") from e
	except yaml.YAMLError as e:
		raise ConfigError(f"config file {path} does not parse: {e}") from e
	return _validate(data or {}, str(path))


def store_dir(explicit: str | Path | None) -> Path:
	"""Diretório do store: flag explícita ou variável de ambiente."""
	value = explicit if explicit is not None else os.environ.get(STORE_ENV)
	if not value:
		raise ConfigError(f"no store directory given (use --store or set {STORE_ENV})")
	return Path(value)
