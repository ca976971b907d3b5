from __future__ import annotations

import pytest

from adaptive_tutor.config import STORE_ENV, AppConfig, load_config, store_dir
from adaptive_tutor.domain import DATA_DIR
from adaptive_tutor.errors import ConfigError
from adaptive_tutor.interventions import InterventionPolicy
from adaptive_tutor.simulation import CohortConfig


def test_defaults_match_dataclasses():
	config = load_config()
	assert config.policy.to_policy() == InterventionPolicy()
	assert config.cohort.to_cohort() == CohortConfig()
	assert config.experiment.salt == "adaptive-tutor"


def test_sample_config_loads():
	config = load_config(DATA_DIR / "experiment.yaml")
	assert config.policy.daily_cap == 3
	assert config.cohort.skill_shares["some_knowledge"] == 0.478


def test_partial_file(tmp_path):
	path = tmp_path / "c.yaml"
	path.write_text("policy:\n  min_active_seconds: 900\ncohort:\n  responsiveness_boost: 0.3\n", encoding="utf-8")
	config = load_config(path)
	assert config.policy.to_policy().min_active_seconds == 900
	assert config.policy.daily_cap == 3
	assert config.cohort.to_cohort().responsiveness_boost == 0.3


@pytest.mark.parametrize("text", [
	"policy:\n  daily_cap: 0\n",
	"policy:\n  colour: blue\n",
	"cohort:\n  skill_shares: {beginner: 0.5}\n",
	"- just\n- a list\n",
	"policy: [unclosed\n",
])
def test_invalid_files(tmp_path, text):
	path = tmp_path / "bad.yaml"
	path.write_text(text, encoding="utf-8")
	with pytest.raises(ConfigError):
		load_config(path)


def test_missing_file(tmp_path):
	with pytest.raises(ConfigError):
		load_config(tmp_path / "absent.yaml")


def test_overrides_skip_none():
	config = AppConfig().with_overrides(policy={"daily_cap": 5, "per_exercise_cap": None}, experiment={"salt": "x"})
	assert config.policy.daily_cap == 5
	assert config.policy.per_exercise_cap == 2
	assert config.experiment.salt == "x"
	with pytest.raises(ConfigError):
		AppConfig().with_overrides(policy={"trigger_percentile": 1.5})


def test_store_dir(monkeypatch, tmp_path):
	monkeypatch.delenv(STORE_ENV, raising=False)
	with pytest.raises(ConfigError):
		store_dir(None)
	assert store_dir(tmp_path) == tmp_path
	monkeypatch.setenv(STORE_ENV, str(tmp_path / "env"))
	assert store_dir(None) == tmp_path / "env"
