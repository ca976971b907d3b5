from __future__ import annotations

import json

import numpy as np
import pytest

from adaptive_tutor.domain import BonusGroup, GroupAssignment, InterventionGroup
from adaptive_tutor.errors import ReportError
from adaptive_tutor.interventions import ActionKind, ActionRecord, InterventionKind, InterventionRecord
from adaptive_tutor.report import format_text, render_markdown, report, to_json, write_report
from adaptive_tutor.working_time import EventKind, WorkEvent


def _groups(table):
	"""{sid: (grupo de intervenção, grupo de bônus)} -> assignments."""
	return {
		sid: GroupAssignment(sid, InterventionGroup(ig), BonusGroup(bg))
		for sid, (ig, bg) in table.items()
	}


def _ev(sid, eid, t, kind=EventKind.RUN, score=None):
	return WorkEvent(sid, eid, float(t), kind, score)


def _prompt(sid, eid, at, kind=InterventionKind.RFC_PROMPT):
	return InterventionRecord(sid, eid, kind, float(at), target_seconds=600.0, session_active_seconds=600.0)


def test_empty_logs(plan):
	rep = report([], [], {}, plan=plan)
	assert rep.horizon == 1
	for metrics in rep.groups.values():
		assert metrics.students == metrics.started == metrics.rfcs == 0
		assert metrics.rfcs_per_student == 0.0
		assert metrics.dropout_rate == 0.0
	assert all(v is None for entry in rep.significance.values() for v in entry.values())
	assert rep.weakest_topics == {}


def test_unknown_student(plan):
	with pytest.raises(ReportError):
		report([_ev("ghost", "e1", 0)], [], {}, plan=plan)


def test_rfcs_per_student(plan):
	assignments = _groups({"a": ("control", "dummy"), "b": ("control", "dummy")})
	events = [
		_ev("a", "e1", 0), _ev("a", "e1", 60, EventKind.RFC), _ev("a", "e1", 90, EventKind.RFC),
		_ev("b", "e2", 0), _ev("b", "e2", 30, EventKind.RFC),
	]
	rep = report(events, [], assignments, plan=plan, knowledge={})
	assert rep.groups["control"].rfcs == 3
	assert rep.groups["control"].rfcs_per_student == 1.5
	assert rep.groups["control"].rfc_after_intervention_share == 0.0


def test_rfc_right_after_prompt_is_attributed(plan):
	assignments = _groups({"r": ("rfc", "tailored")})
	events = [_ev("r", "e1", t) for t in range(0, 1020, 60)] + [_ev("r", "e1", 1300, EventKind.RFC)]
	rep = report(events, [_prompt("r", "e1", 1000)], assignments, plan=plan, knowledge={})
	g = rep.groups["rfc"]
	assert g.interventions_sent == 1
	assert g.rfc_after_intervention_share == 1.0
	assert g.prompt_response_rate == 1.0


def test_rfc_outside_window_is_not_attributed(plan):
	assignments = _groups({"r": ("rfc", "tailored")})
	events = [_ev("r", "e1", 0), _ev("r", "e1", 1600, EventKind.RFC)]
	rep = report(events, [_prompt("r", "e1", 1000)], assignments, plan=plan, knowledge={})
	assert rep.groups["rfc"].rfcs_after_intervention == 0
	assert rep.groups["rfc"].prompt_response_rate == 0.0


def test_control_is_measured_with_shadow_decisions(plan):
	assignments = _groups({"c": ("control", "random")})
	events = [_ev("c", "e1", 0), _ev("c", "e1", 1100, EventKind.RFC)]
	shadow = _prompt("c", "e1", 1000, InterventionKind.SHADOW)
	g = report(events, [shadow], assignments, plan=plan, knowledge={}).groups["control"]
	assert g.interventions_sent == 0
	assert g.shadow_decisions == 1
	assert g.rfc_after_intervention_share == 1.0


def test_breaks_and_time_to_rfc(plan):
	assignments = _groups({"k": ("break", "dummy")})
	events = [
		_ev("k", "e1", 0), _ev("k", "e1", 60), _ev("k", "e1", 120), _ev("k", "e1", 180, EventKind.RFC),
		_ev("k", "e1", 1010, EventKind.FOCUS_LOSS), _ev("k", "e1", 1910, EventKind.FOCUS_GAIN),
		_ev("k", "e2", 3000, EventKind.FOCUS_LOSS), _ev("k", "e2", 3100, EventKind.FOCUS_GAIN),
	]
	rep = report(events, [_prompt("k", "e1", 1000, InterventionKind.BREAK_PROMPT)], assignments, plan=plan, knowledge={})
	g = rep.groups["break"]
	assert g.breaks == 1
	assert g.breaks_after_intervention == 1
	assert g.mean_break_minutes == pytest.approx(15.0)
	assert g.mean_time_to_rfc_minutes == pytest.approx(3.0)


def test_finishing_and_scores(plan):
	assignments = _groups({"a": ("rfc", "dummy"), "b": ("rfc", "dummy"), "idle": ("rfc", "dummy")})
	events = [
		_ev("a", "e1", 0), _ev("a", "e1", 100, EventKind.SUBMIT, 1.0),
		_ev("a", "e2", 200), _ev("a", "e2", 300, EventKind.SUBMIT, 0.5),
		_ev("b", "e1", 0), _ev("b", "e1", 100, EventKind.SUBMIT, 1.0),
	]
	g = report(events, [], assignments, plan=plan).groups["rfc"]
	assert (g.students, g.started, g.finished) == (3, 2, 1)
	assert g.dropout_rate == 0.5
	assert g.last_event_dropout_rate == 0.0
	assert g.mean_score == pytest.approx((0.5 + 1 / 3) / 2)
	assert g.mean_score_finishers == pytest.approx(0.5)


def test_bonus_and_weakest_topics(plan):
	assignments = _groups({"t": ("control", "tailored"), "d": ("control", "dummy")})
	events = [
		_ev("t", "e1", 0), _ev("t", "e1", 60, EventKind.SUBMIT, 1.0),
		_ev("t", "e3", 100), _ev("t", "e3", 160, EventKind.SUBMIT, 0.3),
		_ev("t", "x1", 400), _ev("t", "x1", 520, EventKind.SUBMIT, 1.0),
		_ev("d", "e1", 0), _ev("d", "d1", 400, EventKind.SUBMIT, 0.5),
	]
	rep = report(events, [], assignments, plan=plan, skills={"t": "expert", "d": "beginner"})
	assert rep.bonus["tailored"].served == 1
	assert rep.bonus["tailored"].completion_rate == 1.0
	assert rep.bonus["tailored"].mean_working_minutes == pytest.approx(2.0)
	assert rep.bonus["dummy"].attempts == 1
	assert rep.bonus["dummy"].completed == 0
	assert rep.bonus["random"].students == 0
	assert rep.weakest_topics[1]["expert"] == {"b": 1}


def test_response_rate_estimator_is_consistent(plan):
	rng = np.random.default_rng(0)
	n = 10_000
	assignments = {}
	events = []
	decisions = []
	for i in range(n):
		sid = f"p{i:05d}"
		assignments[sid] = GroupAssignment(sid, InterventionGroup.RFC, BonusGroup.TAILORED)
		events.append(_ev(sid, "e1", 0))
		decisions.append(_prompt(sid, "e1", 100))
		if rng.random() < 0.3:
			events.append(_ev(sid, "e1", 100 + float(rng.uniform(0, 599)), EventKind.RFC))
	g = report(events, decisions, assignments, plan=plan, knowledge={}).groups["rfc"]
	assert g.prompt_response_rate == pytest.approx(0.3, abs=0.02)
	assert g.rfc_after_intervention_share == 1.0


def test_renderers(tmp_path, plan):
	assignments = _groups({"a": ("control", "dummy"), "r": ("rfc", "random")})
	events = [_ev("a", "e1", 0), _ev("a", "e1", 30, EventKind.RFC), _ev("r", "e1", 0), _ev("r", "e1", 50, EventKind.SUBMIT, 1.0)]
	rep = report(events, [], assignments, plan=plan, skills={"a": "beginner", "r": "expert"})

	text = format_text(rep)
	assert "No interventions" in text and "RFC interventions" in text
	data = json.loads(to_json(rep))
	assert data["groups"]["control"]["rfcs"] == 1
	assert data["rfcs_per_skill"]["beginner"]["control"] == 1.0
	assert render_markdown(rep).startswith("# Relatório do experimento A/B")

	written = write_report(rep, tmp_path / "out", plots=True)
	names = {p.name for p in written}
	assert {"report.txt", "report.json", "report.md", "rfcs_per_skill.png", "working_time_week1.png"} <= names
	assert all(p.exists() for p in written)
	assert "figures/rfcs_per_skill.png" in (tmp_path / "out" / "report.md").read_text(encoding="utf-8")


def test_working_time_per_exercise(plan):
	assignments = _groups({f"s{i}": ("control", "dummy") for i in range(5)})
	events = []
	for i, minutes in enumerate((3, 1, 4, 2)):
		events += [_ev(f"s{i}", "e1", 0), _ev(f"s{i}", "e1", 60 * minutes, EventKind.SUBMIT, 1.0)]
	events += [_ev("s4", "e1", 0), _ev("s4", "e1", 240, EventKind.SUBMIT, 0.5)]
	rep = report(events, [], assignments, plan=plan, knowledge={})

	e1 = rep.working_time[1]["e1"]
	assert (e1.count, e1.q1, e1.median, e1.q3, e1.high) == (4, 1.0, 2.0, 3.0, 4.0)
	assert e1.mean == pytest.approx(2.5)
	assert rep.working_time[1]["e2"].count == 0
	assert set(rep.working_time[1]) == {"e1", "e2", "e3"}
	data = json.loads(to_json(rep))
	assert data["working_time"]["1"]["e1"]["median"] == 2.0
	assert "samples" not in data["working_time"]["1"]["e1"]
	assert "Working time to full score, week 1" in format_text(rep)


def test_time_from_rfc_to_full_score(tmp_path, plan):
	assignments = _groups({
		"r": ("rfc", "dummy"), "c": ("control", "dummy"), "late": ("rfc", "dummy"), "stuck": ("break", "dummy"),
	})
	events = [
		_ev("r", "e1", 0), _ev("r", "e1", 120, EventKind.RFC), _ev("r", "e1", 180), _ev("r", "e1", 300, EventKind.SUBMIT, 1.0),
		# o intervalo de dez minutos depois da RFC não conta
		_ev("c", "e1", 0), _ev("c", "e1", 60, EventKind.RFC), _ev("c", "e1", 660), _ev("c", "e1", 720, EventKind.SUBMIT, 1.0),
		_ev("late", "e1", 0, EventKind.SUBMIT, 1.0), _ev("late", "e1", 30, EventKind.RFC),
		_ev("stuck", "e1", 0), _ev("stuck", "e1", 60, EventKind.RFC), _ev("stuck", "e1", 120),
	]
	rep = report(events, [], assignments, plan=plan, knowledge={})

	assert rep.time_after_rfc["rfc"].count == 1
	assert rep.time_after_rfc["rfc"].median == 3.0
	assert rep.time_after_rfc["control"].median == 1.0
	assert rep.time_after_rfc["break"].count == 0
	both = rep.time_after_rfc["all"]
	assert (both.count, both.q1, both.median, both.q3) == (2, 1.0, 1.0, 3.0)
	assert both.mean == pytest.approx(2.0)
	assert "Working time from first RFC to full score" in format_text(rep)

	names = {p.name for p in write_report(rep, tmp_path, plots=True)}
	assert {"time_after_rfc.png", "working_time_week1.png"} <= names
