from __future__ import annotations

import sys
from pathlib import Path

# Garante que o diretório raiz do workspace esteja no sys.path
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
	sys.path.insert(0, str(ROOT))

import pytest

from adaptive_tutor.domain import SAMPLE_COURSE, BonusGroup, InterventionGroup, assign_groups, load_course_plan
from adaptive_tutor.engine import DEFAULT_SALT


def small_course() -> dict:
	"""Uma semana, três tópicos, pool de bônus com quatro exercícios e um dummy."""
	return {
		"weeks": 1,
		"topics": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
		"exercises": [
			{"id": "e1", "week": 1, "difficulty": 1, "topics": [{"topic": "a"}]},
			{"id": "e2", "week": 1, "difficulty": 2, "topics": [{"topic": "a", "weight": 1}, {"topic": "b", "weight": 1}]},
			{"id": "e3", "week": 1, "difficulty": 3, "topics": [{"topic": "b"}]},
			{"id": "x1", "week": 1, "difficulty": 2, "pool": "bonus", "topics": [{"topic": "a"}]},
			{"id": "x2", "week": 1, "difficulty": 3, "pool": "bonus", "topics": [{"topic": "b"}]},
			{"id": "x3", "week": 1, "difficulty": 4, "pool": "bonus", "topics": [{"topic": "a"}, {"topic": "b"}]},
			{"id": "x4", "week": 1, "difficulty": 2, "pool": "bonus", "topics": [{"topic": "a"}, {"topic": "c"}]},
			{"id": "d1", "week": 1, "difficulty": 1, "pool": "dummy", "topics": [{"topic": "a"}]},
		],
	}


@pytest.fixture
def plan():
	return load_course_plan(small_course())


@pytest.fixture(scope="session")
def sample_plan():
	return load_course_plan(SAMPLE_COURSE)


def student_in(
	group: InterventionGroup | BonusGroup,
	*,
	salt: str = DEFAULT_SALT,
	prefix: str = "u",
	skip: int = 0,
) -> str:
	"""Primeiro id `prefix<i>` atribuído ao grupo pedido (de intervenção ou de bônus)."""
	found = 0
	for i in range(10_000):
		sid = f"{prefix}{i}"
		groups = assign_groups(sid, salt)
		if group in (groups.intervention_group, groups.bonus_group):
			if found == skip:
				return sid
			found += 1
	raise AssertionError(f"no student found for {group}")
