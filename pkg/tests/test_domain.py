from __future__ import annotations

import logging
from collections import Counter

import pytest

from adaptive_tutor.domain import (
	BonusGroup,
	InterventionGroup,
	Pool,
	assign_groups,
	load_course_plan,
	parse_course_plan,
	stable_seed,
)
from adaptive_tutor.errors import CoursePlanError

from conftest import small_course


def _course(*exercises: dict, topics=("a", "b", "c", "d")) -> dict:
	return {"topics": [{"id": t} for t in topics], "exercises": list(exercises)}


def test_sample_course_layout(sample_plan):
	assert sample_plan.weeks == 4
	for week in range(1, 5):
		assert len(sample_plan.week_exercises(week, Pool.STANDARD)) == 5
		assert sample_plan.dummy_exercise(week) is not None
		assert 3 <= len(sample_plan.bonus_pool(week)) <= 4
	assert sum(len(sample_plan.bonus_pool(w)) for w in range(1, 5)) == 15
	assert len([e for e in sample_plan.exercises if e.pool == Pool.DUMMY]) == 4


def test_weights_are_normalized():
	plan = load_course_plan(_course(
		{"id": "e", "week": 1, "difficulty": 1, "topics": [
			{"topic": "a", "weight": 2}, {"topic": "b", "weight": 1}, {"topic": "c", "weight": 1},
		]},
	))
	e = plan.exercise("e")
	assert [tw.weight for tw in e.topics] == pytest.approx([0.5, 0.25, 0.25])
	assert e.weight_of("d") == 0.0


def test_normalized_weights_are_kept():
	plan = load_course_plan(_course(
		{"id": "e", "week": 1, "difficulty": 1, "topics": [{"topic": "a", "weight": 0.5}, {"topic": "b", "weight": 0.5}]},
	))
	assert [tw.weight for tw in plan.exercise("e").topics] == [0.5, 0.5]


def test_plan_dict_reload_is_exact(sample_plan):
	again = load_course_plan(sample_plan.to_dict())
	assert again.to_dict() == sample_plan.to_dict()


def test_exercise_without_topics_is_rejected():
	with pytest.raises(CoursePlanError, match="exercise must carry at least one topic"):
		load_course_plan(_course({"id": "e", "week": 1, "difficulty": 1, "topics": []}))


def test_unknown_topic_is_rejected():
	with pytest.raises(CoursePlanError, match="unknown topic 'zzz'"):
		load_course_plan(_course({"id": "e", "week": 1, "difficulty": 1, "topics": [{"topic": "zzz"}]}))


def test_duplicate_exercise_is_rejected():
	ex = {"id": "e", "week": 1, "difficulty": 1, "topics": [{"topic": "a"}]}
	with pytest.raises(CoursePlanError, match="duplicate exercise"):
		load_course_plan(_course(ex, dict(ex)))


def test_bad_difficulty_and_extra_keys_are_rejected():
	with pytest.raises(CoursePlanError):
		load_course_plan(_course({"id": "e", "week": 1, "difficulty": 0, "topics": [{"topic": "a"}]}))
	with pytest.raises(CoursePlanError):
		load_course_plan(_course({"id": "e", "week": 1, "difficulty": 1, "level": 3, "topics": [{"topic": "a"}]}))


def test_bonus_week_needs_exactly_one_dummy():
	data = small_course()
	data["exercises"] = [e for e in data["exercises"] if e.get("pool") != "dummy"]
	with pytest.raises(CoursePlanError, match="no dummy exercise"):
		load_course_plan(data)
	data = small_course()
	data["exercises"].append({"id": "d2", "week": 1, "difficulty": 1, "pool": "dummy", "topics": [{"topic": "a"}]})
	with pytest.raises(CoursePlanError, match="expected exactly one"):
		load_course_plan(data)


def test_weeks_default_and_overflow():
	plan = load_course_plan(_course({"id": "e", "week": 3, "difficulty": 1, "topics": [{"topic": "a"}]}))
	assert plan.weeks == 3
	data = _course({"id": "e", "week": 3, "difficulty": 1, "topics": [{"topic": "a"}]})
	data["weeks"] = 2
	with pytest.raises(CoursePlanError):
		load_course_plan(data)


def test_many_topics_only_warn(caplog):
	with caplog.at_level(logging.WARNING, logger="adaptive_tutor"):
		plan = load_course_plan(_course({
			"id": "e", "week": 1, "difficulty": 1,
			"topics": [{"topic": t} for t in ("a", "b", "c", "d")],
		}))
	assert len(plan.exercise("e").topics) == 4
	assert "carries 4 topics" in caplog.text


def test_parse_rejects_garbage():
	with pytest.raises(CoursePlanError):
		parse_course_plan("topics: [unclosed")
	with pytest.raises(CoursePlanError):
		parse_course_plan("- just\n- a list\n")


def test_week_topics_use_standard_exercises(plan):
	assert plan.week_topics(1) == {"a", "b"}


def test_assignment_is_deterministic():
	assert assign_groups("s42", "salt") == assign_groups("s42", "salt")
	assert stable_seed("a", "b") == stable_seed("a", "b")
	assert stable_seed("a", "b") != stable_seed("ab")


def test_assignment_depends_on_salt():
	ids = [f"s{i}" for i in range(200)]
	first = [assign_groups(s, "one") for s in ids]
	second = [assign_groups(s, "two") for s in ids]
	assert any(a.intervention_group != b.intervention_group for a, b in zip(first, second))


def test_group_marginals_and_independence():
	n = 10_000
	assignments = [assign_groups(f"student-{i}", "adaptive-tutor") for i in range(n)]
	intervention = Counter(a.intervention_group for a in assignments)
	bonus = Counter(a.bonus_group for a in assignments)
	expected = {0: 0.2, 1: 0.2, 2: 0.6}
	for i, group in enumerate(InterventionGroup):
		assert abs(intervention[group] / n - expected[i]) <= 0.02
	for i, group in enumerate(BonusGroup):
		assert abs(bonus[group] / n - expected[i]) <= 0.02
	joint = Counter((a.intervention_group, a.bonus_group) for a in assignments)
	for ig in InterventionGroup:
		for bg in BonusGroup:
			product = intervention[ig] / n * bonus[bg] / n
			assert abs(joint[(ig, bg)] / n - product) <= 0.02
