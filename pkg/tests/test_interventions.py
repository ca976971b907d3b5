from __future__ import annotations

import random

import pytest

from adaptive_tutor.domain import InterventionGroup
from adaptive_tutor.errors import AttributionError, ConfigError, EventError
from adaptive_tutor.interventions import (
	ActionKind,
	ActionRecord,
	CapCounters,
	InterventionKind,
	InterventionPolicy,
	InterventionRecord,
	Tick,
	TimerSignal,
	TimerState,
	attribute_action,
	day_of,
	initial_target,
	on_event,
	returning_target,
	should_fire,
)
from adaptive_tutor.working_time import PercentileTable

POLICY = InterventionPolicy()


def _table_with_p75(value: float) -> PercentileTable:
	# p75 de quatro amostras é o posto 3
	return PercentileTable("e", [value / 4, value / 2, value, value * 2])


def test_initial_target_floor():
	assert initial_target(_table_with_p75(360), POLICY) == 600
	assert initial_target(_table_with_p75(1500), POLICY) == 1500
	assert initial_target(PercentileTable("e"), POLICY) == 600


def test_returning_target():
	assert returning_target(1320, _table_with_p75(1500), POLICY) == 600
	assert returning_target(600, _table_with_p75(3600), POLICY) == 3000
	assert returning_target(5000, _table_with_p75(3600), POLICY) == 600
	assert returning_target(0, PercentileTable("e"), POLICY) == 600
	with pytest.raises(ValueError):
		returning_target(-1, _table_with_p75(3600), POLICY)


def test_timer_ticks_only_in_focus():
	state = TimerState("s", "e")
	state = on_event(state, Tick(60))
	assert state.accumulated_active_seconds == 60
	state = on_event(state, TimerSignal.FOCUS_LOSS)
	assert on_event(state, Tick(60)).accumulated_active_seconds == 60


def test_solved_freezes_timer():
	state = on_event(TimerState("s", "e", accumulated_active_seconds=100), TimerSignal.SOLVED)
	state = on_event(on_event(state, TimerSignal.FOCUS_GAIN), Tick(600))
	assert state.accumulated_active_seconds == 100
	assert should_fire(state, CapCounters(), InterventionGroup.RFC, POLICY) is None


def test_negative_tick_is_rejected():
	with pytest.raises(EventError):
		on_event(TimerState("s", "e"), Tick(-1))


def test_fired_counts_in_session():
	assert on_event(TimerState("s", "e"), TimerSignal.FIRED).fired_this_session == 1


def test_should_fire_rule():
	state = TimerState("s", "e", accumulated_active_seconds=700, target_seconds=600)
	assert should_fire(state, CapCounters(0, 0), InterventionGroup.RFC, POLICY) == InterventionKind.RFC_PROMPT
	assert should_fire(state, CapCounters(0, 0), InterventionGroup.BREAK, POLICY) == InterventionKind.BREAK_PROMPT
	assert should_fire(state, CapCounters(3, 0), InterventionGroup.RFC, POLICY) is None
	assert should_fire(state, CapCounters(1, 2), InterventionGroup.RFC, POLICY) is None
	assert should_fire(state, CapCounters(0, 0), InterventionGroup.CONTROL, POLICY) is None
	below = TimerState("s", "e", accumulated_active_seconds=599, target_seconds=600)
	assert should_fire(below, CapCounters(), InterventionGroup.RFC, POLICY) is None


def test_fuzzed_schedules_respect_floor_and_caps():
	rng = random.Random(99)
	for _ in range(10_000):
		state = TimerState(
			"s", "e",
			accumulated_active_seconds=rng.uniform(0, 3000),
			target_seconds=max(600.0, rng.uniform(0, 3000)),
			solved=rng.random() < 0.2,
		)
		counters = CapCounters(rng.randint(0, 5), rng.randint(0, 4))
		group = rng.choice(list(InterventionGroup))
		kind = should_fire(state, counters, group, POLICY)
		if kind is not None:
			assert state.accumulated_active_seconds >= 600
			assert counters.today_count < 3 and counters.exercise_count < 2
			assert not state.solved
			assert group != InterventionGroup.CONTROL


def _record(at: float = 1800.0) -> InterventionRecord:
	return InterventionRecord("s", "e", InterventionKind.RFC_PROMPT, fired_at=at)


@pytest.mark.parametrize("delay, attributed", [(0, True), (300, True), (599, True), (600, False), (601, False)])
def test_attribution_window_is_strict(delay, attributed):
	updated = attribute_action(_record(), ActionRecord(ActionKind.RFC_SENT, at=1800.0 + delay))
	assert (updated.attributed_action is not None) == attributed


def test_first_attribution_wins():
	first = attribute_action(_record(), ActionRecord(ActionKind.RFC_SENT, at=1900))
	second = attribute_action(first, ActionRecord(ActionKind.RFC_SENT, at=2000))
	assert second.attributed_action.at == 1900


def test_action_before_intervention_is_an_error():
	with pytest.raises(AttributionError):
		attribute_action(_record(), ActionRecord(ActionKind.RFC_SENT, at=1000))


def test_record_round_trip_keeps_attribution():
	record = attribute_action(_record(), ActionRecord(ActionKind.BREAK_TAKEN, at=1900, duration_seconds=900))
	assert InterventionRecord.from_dict(record.to_dict()) == record


def test_policy_validation():
	with pytest.raises(ConfigError):
		InterventionPolicy(trigger_percentile=1.5)
	with pytest.raises(ConfigError):
		InterventionPolicy(daily_cap=0)
	with pytest.raises(ConfigError):
		InterventionPolicy(min_active_seconds=0)


def test_day_is_utc_day():
	assert day_of(86399.0) == 0
	assert day_of(86400.0) == 1
