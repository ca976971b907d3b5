"""Métricas do experimento a partir dos logs de eventos e de decisões.

O relatório é uma dobra pura sobre os logs: nada aqui consulta o motor vivo.
Os vetores de conhecimento finais, quando não são fornecidos, são
reconstruídos reaplicando os eventos num motor novo.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .domain import BonusGroup, CoursePlan, GroupAssignment, InterventionGroup, Pool
from .engine import TutorEngine
from .errors import ReportError
from .interventions import (
	ActionKind,
	ActionRecord,
	InterventionKind,
	InterventionPolicy,
	InterventionRecord,
	attribute_action,
)
from .knowledge import KnowledgeVector, refresh_knowledge, weakest_topic
from .logs import get_logger
from .working_time import (
	SESSION_GAP_SECONDS,
	EventKind,
	PercentileTable,
	WorkEvent,
	compute_working_time,
	group_events,
	percentile,
)

logger = get_logger(__name__)

FINISH_SHARE = 0.5
GROUP_ORDER = (InterventionGroup.CONTROL, InterventionGroup.BREAK, InterventionGroup.RFC)
BONUS_ORDER = (BonusGroup.DUMMY, BonusGroup.RANDOM, BonusGroup.TAILORED)
GROUP_LABELS = {
	InterventionGroup.CONTROL.value: "No interventions",
	InterventionGroup.BREAK.value: "Break interventions",
	InterventionGroup.RFC.value: "RFC interventions",
}


@dataclass
class GroupMetrics:
	group: str
	students: int = 0
	started: int = 0
	finished: int = 0
	dropout_rate: float = 0.0
	# sem nenhum evento nos exercícios da última semana
	last_event_dropout_rate: float = 0.0
	mean_score: float = 0.0
	score_std: float = 0.0
	mean_score_finishers: float = 0.0
	score_std_finishers: float = 0.0
	interventions_sent: int = 0
	shadow_decisions: int = 0
	rfcs: int = 0
	rfcs_per_student: float = 0.0
	rfcs_after_intervention: int = 0
	rfc_after_intervention_share: float = 0.0
	prompt_response_rate: float = 0.0
	mean_time_to_rfc_minutes: float = 0.0
	breaks: int = 0
	breaks_after_intervention: int = 0
	mean_break_minutes: float = 0.0


@dataclass
class BonusMetrics:
	group: str
	students: int = 0
	served: int = 0
	start_rate: float = 0.0
	attempts: int = 0
	completed: int = 0
	completion_rate: float = 0.0
	mean_working_minutes: float = 0.0


@dataclass
class TimeDistribution:
	"""Quartis (posto mais próximo), média e extremos de tempos em minutos."""

	count: int = 0
	q1: float = 0.0
	median: float = 0.0
	q3: float = 0.0
	mean: float = 0.0
	low: float = 0.0
	high: float = 0.0
	samples: List[float] = field(default_factory=list, repr=False)

	@classmethod
	def of(cls, label: str, minutes: Iterable[float]) -> "TimeDistribution":
		table = PercentileTable(label, list(minutes))
		if not table.count:
			return cls()
		return cls(
			count=table.count,
			q1=percentile(table, 0.25),
			median=percentile(table, 0.5),
			q3=percentile(table, 0.75),
			mean=float(np.mean(table.samples)),
			low=table.samples[0],
			high=table.samples[-1],
			samples=table.samples,
		)

	def to_dict(self) -> Dict[str, Any]:
		data = asdict(self)
		del data["samples"]
		return data


@dataclass
class ExperimentReport:
	horizon: int
	groups: Dict[str, GroupMetrics] = field(default_factory=dict)
	rfcs_per_skill: Dict[str, Dict[str, float]] = field(default_factory=dict)
	weakest_topics: Dict[int, Dict[str, Dict[str, int]]] = field(default_factory=dict)
	bonus: Dict[str, BonusMetrics] = field(default_factory=dict)
	significance: Dict[str, Dict[str, Optional[float]]] = field(default_factory=dict)
	# semana -> exercício -> tempo até a pontuação máxima
	working_time: Dict[int, Dict[str, TimeDistribution]] = field(default_factory=dict)
	# grupo (e "all") -> tempo de trabalho da primeira RFC até a pontuação máxima
	time_after_rfc: Dict[str, TimeDistribution] = field(default_factory=dict)

	def to_dict(self) -> Dict[str, Any]:
		return {
			"horizon": self.horizon,
			"groups": {k: asdict(v) for k, v in self.groups.items()},
			"rfcs_per_skill": self.rfcs_per_skill,
			"weakest_topics": {str(week): hist for week, hist in self.weakest_topics.items()},
			"bonus": {k: asdict(v) for k, v in self.bonus.items()},
			"significance": self.significance,
			"working_time": {
				str(week): {eid: d.to_dict() for eid, d in rows.items()} for week, rows in self.working_time.items()
			},
			"time_after_rfc": {k: d.to_dict() for k, d in self.time_after_rfc.items()},
		}


def _rate(numerator: float, denominator: float) -> float:
	return numerator / denominator if denominator else 0.0


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
	if not values:
		return 0.0, 0.0
	arr = np.asarray(values, dtype=float)
	return float(arr.mean()), float(arr.std())


def _finite(value: float) -> Optional[float]:
	value = float(value)
	return value if math.isfinite(value) else None


def _breaks(stream: Sequence[WorkEvent], gap: float) -> List[ActionRecord]:
	"""Perdas de foco seguidas de retorno pelo menos `gap` segundos depois."""
	found: List[ActionRecord] = []
	lost_at: Optional[float] = None
	for event in stream:
		if lost_at is not None and event.kind != EventKind.FOCUS_LOSS:
			away = event.timestamp - lost_at
			if away >= gap:
				found.append(ActionRecord(ActionKind.BREAK_TAKEN, at=lost_at, duration_seconds=away))
				lost_at = None
			elif event.kind == EventKind.FOCUS_GAIN:
				lost_at = None
		if event.kind == EventKind.FOCUS_LOSS and lost_at is None:
			lost_at = event.timestamp
	return found


def _attributed(action: ActionRecord, records: Iterable[InterventionRecord], window: float) -> bool:
	for record in records:
		if record.fired_at > action.at:
			continue
		fresh = replace(record, attributed_action=None)
		if attribute_action(fresh, action, window).attributed_action is action:
			return True
	return False


def _counts_for(group: InterventionGroup, record: InterventionRecord) -> bool:
	# o controle é medido pelas decisões-sombra; os outros grupos pelas entregues
	if group == InterventionGroup.CONTROL:
		return record.kind == InterventionKind.SHADOW
	return record.delivered


def _rebuild_knowledge(
	events: Sequence[WorkEvent], plan: CoursePlan, policy: InterventionPolicy, assignments: Mapping[str, GroupAssignment],
) -> Dict[str, KnowledgeVector]:
	engine = TutorEngine(plan, policy, timestamp_tolerance_seconds=math.inf)
	for event in events:
		engine.ingest(event)
	return {sid: engine.knowledge.get(sid, KnowledgeVector(sid)) for sid in assignments}


def report(
	events: Sequence[WorkEvent],
	decisions: Sequence[InterventionRecord],
	assignments: Mapping[str, GroupAssignment],
	*,
	plan: CoursePlan,
	policy: InterventionPolicy | None = None,
	skills: Mapping[str, str] | None = None,
	horizon: int | None = None,
	knowledge: Mapping[str, KnowledgeVector] | None = None,
	session_gap_seconds: float = SESSION_GAP_SECONDS,
) -> ExperimentReport:
	policy = policy or InterventionPolicy()
	horizon = plan.weeks if horizon is None else horizon
	skills = skills or {}
	window = policy.attribution_window_seconds

	for sid in sorted({e.student_id for e in events} | {d.student_id for d in decisions}):
		if sid not in assignments:
			raise ReportError(f"log references unknown student '{sid}'")

	streams = group_events(events)
	by_student: Dict[str, List[WorkEvent]] = defaultdict(list)
	for event in events:
		by_student[event.student_id].append(event)
	records_by_key: Dict[Tuple[str, str], List[InterventionRecord]] = defaultdict(list)
	for record in decisions:
		records_by_key[(record.student_id, record.exercise_id)].append(record)

	final_standard = plan.week_exercises(horizon, Pool.STANDARD)
	final_ids = {e.id for e in plan.week_exercises(horizon)}
	graded = [e.id for week in range(1, horizon + 1) for e in plan.week_exercises(week, Pool.STANDARD)]

	per_group: Dict[str, Dict[str, Any]] = {
		g.value: {"students": [], "started": [], "finished": [], "scores": [], "finisher_scores": [], "last_week": 0}
		for g in GROUP_ORDER
	}
	for sid, assignment in assignments.items():
		bucket = per_group[assignment.intervention_group.value]
		bucket["students"].append(sid)
		mine = by_student.get(sid)
		if not mine:
			continue
		bucket["started"].append(sid)
		best: Dict[str, float] = {}
		submitted: set[str] = set()
		for e in mine:
			if e.score_fraction is not None:
				best[e.exercise_id] = max(best.get(e.exercise_id, 0.0), e.score_fraction)
			if e.kind == EventKind.SUBMIT:
				submitted.add(e.exercise_id)
		score = _rate(sum(best.get(eid, 0.0) for eid in graded), len(graded))
		bucket["scores"].append(score)
		done = sum(1 for e in final_standard if e.id in submitted)
		if final_standard and done >= FINISH_SHARE * len(final_standard):
			bucket["finished"].append(sid)
			bucket["finisher_scores"].append(score)
		if any(e.exercise_id in final_ids for e in mine):
			bucket["last_week"] += 1

	out = ExperimentReport(horizon=horizon)
	rfc_skill: Dict[Tuple[str, str], int] = Counter()
	for group in GROUP_ORDER:
		bucket = per_group[group.value]
		started = len(bucket["started"])
		metrics = GroupMetrics(group=group.value, students=len(bucket["students"]), started=started)
		metrics.finished = len(bucket["finished"])
		metrics.dropout_rate = 1.0 - _rate(metrics.finished, started) if started else 0.0
		metrics.last_event_dropout_rate = 1.0 - _rate(bucket["last_week"], started) if started else 0.0
		metrics.mean_score, metrics.score_std = _mean_std(bucket["scores"])
		metrics.mean_score_finishers, metrics.score_std_finishers = _mean_std(bucket["finisher_scores"])

		members = set(bucket["students"])
		relevant: List[InterventionRecord] = []
		for record in decisions:
			if record.student_id not in members:
				continue
			if record.delivered:
				metrics.interventions_sent += 1
			else:
				metrics.shadow_decisions += 1
			if _counts_for(group, record):
				relevant.append(record)

		rfc_times: List[float] = []
		answered: set[int] = set()
		break_minutes: List[float] = []
		for (sid, eid), stream in streams.items():
			if sid not in members:
				continue
			mine = [r for r in records_by_key.get((sid, eid), []) if _counts_for(group, r)]
			for event in stream:
				if event.kind != EventKind.RFC:
					continue
				metrics.rfcs += 1
				rfc_skill[(skills.get(sid, "unknown"), group.value)] += 1
				prefix = [e for e in stream if e.timestamp <= event.timestamp]
				rfc_times.append(compute_working_time(prefix).active_seconds / 60.0)
				action = ActionRecord(ActionKind.RFC_SENT, at=event.timestamp)
				if _attributed(action, mine, window):
					metrics.rfcs_after_intervention += 1
				for record in mine:
					if record.fired_at <= event.timestamp and event.timestamp - record.fired_at < window:
						answered.add(id(record))
			for action in _breaks(stream, session_gap_seconds):
				metrics.breaks += 1
				break_minutes.append((action.duration_seconds or 0.0) / 60.0)
				if _attributed(action, mine, window):
					metrics.breaks_after_intervention += 1

		metrics.rfcs_per_student = _rate(metrics.rfcs, started)
		metrics.rfc_after_intervention_share = _rate(metrics.rfcs_after_intervention, metrics.rfcs)
		metrics.prompt_response_rate = _rate(len(answered), len(relevant))
		metrics.mean_time_to_rfc_minutes = float(np.mean(rfc_times)) if rfc_times else 0.0
		metrics.mean_break_minutes = float(np.mean(break_minutes)) if break_minutes else 0.0
		out.groups[group.value] = metrics

	started_by_skill_group: Dict[Tuple[str, str], int] = Counter()
	for group in GROUP_ORDER:
		for sid in per_group[group.value]["started"]:
			started_by_skill_group[(skills.get(sid, "unknown"), group.value)] += 1
	for (skill, group_name), count in sorted(started_by_skill_group.items()):
		out.rfcs_per_skill.setdefault(skill, {})[group_name] = _rate(rfc_skill[(skill, group_name)], count)

	started_ids = [sid for g in GROUP_ORDER for sid in per_group[g.value]["started"]]
	if started_ids:
		vectors = knowledge if knowledge is not None else _rebuild_knowledge(events, plan, policy, assignments)
		# Θ com o mesmo |E_s| para todos os tópicos antes de comparar
		refreshed = {sid: refresh_knowledge(vectors.get(sid) or KnowledgeVector(sid), plan) for sid in started_ids}
		for week in range(1, horizon + 1):
			topics = plan.week_topics(week)
			histogram: Dict[str, Dict[str, int]] = {}
			for sid in sorted(started_ids):
				topic = weakest_topic(refreshed[sid], topics)
				if topic is None:
					continue
				row = histogram.setdefault(skills.get(sid, "unknown"), {})
				row[topic] = row.get(topic, 0) + 1
			out.weakest_topics[week] = histogram

	out.working_time = _working_time_by_week(streams, plan, horizon)
	out.time_after_rfc = _time_after_rfc(streams, assignments)
	out.bonus = _bonus_metrics(streams, assignments, plan, by_student)
	out.significance = _significance(out, per_group)
	return out


def _working_time_by_week(
	streams: Mapping[Tuple[str, str], Sequence[WorkEvent]], plan: CoursePlan, horizon: int,
) -> Dict[int, Dict[str, TimeDistribution]]:
	"""Tempo de trabalho de quem chegou à pontuação máxima, por exercício regular."""
	minutes: Dict[str, List[float]] = defaultdict(list)
	for (_, eid), stream in streams.items():
		wt = compute_working_time(stream)
		if wt.reached_full_score:
			minutes[eid].append(wt.active_seconds / 60.0)
	return {
		week: {e.id: TimeDistribution.of(e.id, minutes.get(e.id, ())) for e in plan.week_exercises(week, Pool.STANDARD)}
		for week in range(1, horizon + 1)
	}


def _time_after_rfc(
	streams: Mapping[Tuple[str, str], Sequence[WorkEvent]], assignments: Mapping[str, GroupAssignment],
) -> Dict[str, TimeDistribution]:
	"""Tempo de trabalho entre a primeira RFC e a pontuação máxima, por grupo."""
	minutes: Dict[str, List[float]] = {g.value: [] for g in GROUP_ORDER}
	for (sid, _), stream in streams.items():
		for i, event in enumerate(stream):
			if event.is_full_score:
				break
			if event.kind == EventKind.RFC:
				wt = compute_working_time(stream[i:])
				if wt.reached_full_score:
					minutes[assignments[sid].intervention_group.value].append(wt.active_seconds / 60.0)
				break
	result = {group: TimeDistribution.of(group, values) for group, values in minutes.items()}
	result["all"] = TimeDistribution.of("all", [m for values in minutes.values() for m in values])
	return result


def _bonus_metrics(
	streams: Mapping[Tuple[str, str], Sequence[WorkEvent]],
	assignments: Mapping[str, GroupAssignment],
	plan: CoursePlan,
	by_student: Mapping[str, Sequence[WorkEvent]],
) -> Dict[str, BonusMetrics]:
	result: Dict[str, BonusMetrics] = {}
	for group in BONUS_ORDER:
		members = {sid for sid, a in assignments.items() if a.bonus_group == group and by_student.get(sid)}
		metrics = BonusMetrics(group=group.value, students=len(members))
		served: set[str] = set()
		minutes: List[float] = []
		for (sid, eid), stream in streams.items():
			if sid not in members or not plan.has_exercise(eid):
				continue
			if plan.exercise(eid).pool == Pool.STANDARD:
				continue
			served.add(sid)
			metrics.attempts += 1
			wt = compute_working_time(stream)
			if wt.reached_full_score:
				metrics.completed += 1
				minutes.append(wt.active_seconds / 60.0)
		metrics.served = len(served)
		metrics.start_rate = _rate(len(served), len(members))
		metrics.completion_rate = _rate(metrics.completed, metrics.attempts)
		metrics.mean_working_minutes = float(np.mean(minutes)) if minutes else 0.0
		result[group.value] = metrics
	return result


def _significance(out: ExperimentReport, per_group: Mapping[str, Mapping[str, Any]]) -> Dict[str, Dict[str, Optional[float]]]:
	"""Welch t nos escores e qui-quadrado nas RFCs após intervenção, contra o controle."""
	control = out.groups[InterventionGroup.CONTROL.value]
	control_scores = per_group[InterventionGroup.CONTROL.value]["scores"]
	tests: Dict[str, Dict[str, Optional[float]]] = {}
	for group in (InterventionGroup.BREAK, InterventionGroup.RFC):
		metrics = out.groups[group.value]
		scores = per_group[group.value]["scores"]
		entry: Dict[str, Optional[float]] = {"score_t": None, "score_p": None, "rfc_chi2": None, "rfc_p": None}
		if len(scores) >= 2 and len(control_scores) >= 2 and (np.std(scores) > 0 or np.std(control_scores) > 0):
			t, p = stats.ttest_ind(scores, control_scores, equal_var=False)
			entry["score_t"], entry["score_p"] = _finite(t), _finite(p)
		table = np.array([
			[metrics.rfcs_after_intervention, metrics.rfcs - metrics.rfcs_after_intervention],
			[control.rfcs_after_intervention, control.rfcs - control.rfcs_after_intervention],
		])
		if (table.sum(axis=0) > 0).all() and (table.sum(axis=1) > 0).all():
			chi2, p, _, _ = stats.chi2_contingency(table)
			entry["rfc_chi2"], entry["rfc_p"] = _finite(chi2), _finite(p)
		tests[group.value] = entry
	return tests


# Saídas


def _pct(value: float) -> str:
	return f"{100.0 * value:.1f}%"


def _distribution_rows(rows: Mapping[str, TimeDistribution]) -> List[str]:
	lines = [f"{'':<22}{'n':>6}{'Q1':>8}{'Median':>8}{'Q3':>8}{'Mean':>8}{'Max':>8}"]
	for name, d in rows.items():
		lines.append(f"{name:<22}{d.count:>6}{d.q1:>8.1f}{d.median:>8.1f}{d.q3:>8.1f}{d.mean:>8.1f}{d.high:>8.1f}")
	return lines


def format_text(rep: ExperimentReport) -> str:
	"""Tabelas alinhadas em texto puro."""
	lines: List[str] = []
	header = f"{'Group':<22}{'#started':>10}{'#finished':>11}{'Dropout':>9}{'Drop(last)':>12}{'Score all':>18}{'Score finisher':>18}"
	lines += ["Course key metrics", header, "-" * len(header)]
	for name, g in rep.groups.items():
		lines.append(
			f"{GROUP_LABELS[name]:<22}{g.started:>10}{g.finished:>11}{_pct(g.dropout_rate):>9}"
			f"{_pct(g.last_event_dropout_rate):>12}"
			f"{_pct(g.mean_score) + ' (±' + _pct(g.score_std) + ')':>18}"
			f"{_pct(g.mean_score_finishers) + ' (±' + _pct(g.score_std_finishers) + ')':>18}"
		)
	lines.append("")
	header = f"{'Group':<22}{'Sent':>7}{'Shadow':>8}{'RFCs/student':>14}{'RFCs after int.':>17}{'Response':>10}{'Time to RFC':>13}{'Break':>10}"
	lines += ["RFCs and breaks after interventions", header, "-" * len(header)]
	for name, g in rep.groups.items():
		lines.append(
			f"{GROUP_LABELS[name]:<22}{g.interventions_sent:>7}{g.shadow_decisions:>8}{g.rfcs_per_student:>14.2f}"
			f"{_pct(g.rfc_after_intervention_share):>17}{_pct(g.prompt_response_rate):>10}"
			f"{g.mean_time_to_rfc_minutes:>9.1f} min{g.mean_break_minutes:>6.1f} min"
		)
	lines.append("")
	lines.append("RFCs per student by skill level")
	groups = [g.value for g in GROUP_ORDER]
	lines.append(f"{'Skill':<18}" + "".join(f"{g:>10}" for g in groups))
	for skill, row in rep.rfcs_per_skill.items():
		lines.append(f"{skill:<18}" + "".join(f"{row.get(g, 0.0):>10.2f}" for g in groups))
	lines.append("")
	lines.append("Bonus exercises")
	lines.append(f"{'Group':<12}{'Students':>10}{'Served':>8}{'Start':>8}{'Completion':>12}{'Minutes':>9}")
	for name, b in rep.bonus.items():
		lines.append(
			f"{name:<12}{b.students:>10}{b.served:>8}{_pct(b.start_rate):>8}{_pct(b.completion_rate):>12}"
			f"{b.mean_working_minutes:>9.1f}"
		)
	for week, rows in rep.working_time.items():
		lines.append("")
		lines.append(f"Working time to full score, week {week} (minutes)")
		lines += _distribution_rows(rows)
	if rep.time_after_rfc:
		lines.append("")
		lines.append("Working time from first RFC to full score (minutes)")
		lines += _distribution_rows({GROUP_LABELS.get(k, "All groups"): d for k, d in rep.time_after_rfc.items()})
	if rep.significance:
		lines.append("")
		lines.append("Against control")
		for name, entry in rep.significance.items():
			parts = [f"{k}={'n/a' if v is None else f'{v:.4g}'}" for k, v in entry.items()]
			lines.append(f"{name:<12}" + " ".join(parts))
	return "\n".join(lines) + "\n"


def to_json(rep: ExperimentReport) -> str:
	return json.dumps(rep.to_dict(), ensure_ascii=False, indent=2)


def plot_report(rep: ExperimentReport, out_dir: str | Path) -> List[Path]:
	"""RFCs por nível e grupo, tópico mais fraco da semana 1, tempos por exercício e após RFC."""
	import matplotlib

	matplotlib.use("Agg")
	import matplotlib.pyplot as plt

	out_dir = Path(out_dir)
	out_dir.mkdir(parents=True, exist_ok=True)
	written: List[Path] = []

	skills = list(rep.rfcs_per_skill)
	if skills:
		groups = [g.value for g in GROUP_ORDER]
		x = np.arange(len(skills))
		width = 0.8 / len(groups)
		fig, ax = plt.subplots(figsize=(8, 4))
		for i, group in enumerate(groups):
			values = [rep.rfcs_per_skill[s].get(group, 0.0) for s in skills]
			ax.bar(x + i * width, values, width, label=GROUP_LABELS[group])
		ax.set_xticks(x + width * (len(groups) - 1) / 2)
		ax.set_xticklabels(skills, rotation=20)
		ax.set_ylabel("RFCs / student")
		ax.legend()
		fig.tight_layout()
		path = out_dir / "rfcs_per_skill.png"
		fig.savefig(path, dpi=120)
		plt.close(fig)
		written.append(path)

	week1 = rep.weakest_topics.get(1, {})
	if week1:
		topics = sorted({t for row in week1.values() for t in row})
		skills = list(week1)
		fig, ax = plt.subplots(figsize=(8, 4))
		bottom = np.zeros(len(skills))
		for topic in topics:
			values = np.array([week1[s].get(topic, 0) for s in skills], dtype=float)
			ax.bar(skills, values, bottom=bottom, label=topic)
			bottom += values
		ax.set_ylabel("students")
		ax.legend(fontsize="small")
		fig.tight_layout()
		path = out_dir / "weakest_topic_week1.png"
		fig.savefig(path, dpi=120)
		plt.close(fig)
		written.append(path)

	for week, rows in rep.working_time.items():
		boxes = [
			{"label": eid, "q1": d.q1, "med": d.median, "q3": d.q3, "mean": d.mean, "whislo": d.low, "whishi": d.high}
			for eid, d in rows.items()
			if d.count
		]
		if not boxes:
			continue
		fig, ax = plt.subplots(figsize=(max(6, len(boxes)), 4))
		ax.bxp(boxes, showmeans=True, showfliers=False)
		ax.set_ylabel("minutes")
		ax.tick_params(axis="x", rotation=30)
		fig.tight_layout()
		path = out_dir / f"working_time_week{week}.png"
		fig.savefig(path, dpi=120)
		plt.close(fig)
		written.append(path)

	after = rep.time_after_rfc.get("all")
	if after is not None and after.count:
		fig, ax = plt.subplots(figsize=(6, 4))
		samples = np.asarray(after.samples, dtype=float)
		if after.count >= 2 and np.ptp(samples) > 0:
			xs = np.linspace(0.0, after.high, 200)
			ax.plot(xs, stats.gaussian_kde(samples)(xs))
		else:
			ax.hist(samples, bins=10, density=True)
		for mark in (after.q1, after.median, after.q3):
			ax.axvline(mark, color="black", linestyle="--", linewidth=0.8)
		ax.set_xlabel("minutes from first RFC to full score")
		ax.set_ylabel("density")
		fig.tight_layout()
		path = out_dir / "time_after_rfc.png"
		fig.savefig(path, dpi=120)
		plt.close(fig)
		written.append(path)
	return written


def render_markdown(rep: ExperimentReport, figures: Sequence[Path] = (), base: Path | None = None) -> str:
	lines = ["# Relatório do experimento A/B", "", "```", format_text(rep).rstrip(), "```", ""]
	for path in figures:
		rel = path.relative_to(base) if base is not None else path
		lines += [f"## {path.stem.replace('_', ' ')}", "", f"![{path.stem}]({rel.as_posix()})", ""]
	return "\n".join(lines)


def write_report(rep: ExperimentReport, out_dir: str | Path, *, plots: bool = False) -> List[Path]:
	out_dir = Path(out_dir)
	out_dir.mkdir(parents=True, exist_ok=True)
	written = [out_dir / "report.txt", out_dir / "report.json"]
	written[0].write_text(format_text(rep), encoding="utf-8")
	written[1].write_text(to_json(rep), encoding="utf-8")
	if plots:
		figures = plot_report(rep, out_dir / "figures")
		md = out_dir / "report.md"
		md.write_text(render_markdown(rep, figures, base=out_dir), encoding="utf-8")
		written += figures + [md]
	return written
