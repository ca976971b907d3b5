from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, TextIO

from . import logs
from .config import STORE_ENV, AppConfig, load_config, store_dir
from .domain import SAMPLE_COURSE, load_course_plan
from .errors import AdaptiveTutorError, EventError
from .report import ExperimentReport, format_text, report, to_json, write_report
from .service import TutorService, serve_stdio
from .simulation import generate_cohort, simulate
from .store import Store, snapshot_and_replay
from .working_time import WorkEvent

logger = logs.get_logger(__name__)


def _policy_flags() -> argparse.ArgumentParser:
	parent = argparse.ArgumentParser(add_help=False)
	parent.add_argument("--config", type=str, default=None, help="Arquivo YAML com as seções policy/cohort/experiment")
	parent.add_argument("--trigger-percentile", type=float, default=None, help="Percentil de gatilho (padrão 0.75)")
	parent.add_argument("--min-active-seconds", type=float, default=None, help="Piso do alvo em segundos (padrão 600)")
	parent.add_argument("--daily-cap", type=int, default=None, help="Intervenções por dia (padrão 3)")
	parent.add_argument("--per-exercise-cap", type=int, default=None, help="Intervenções por exercício (padrão 2)")
	parent.add_argument("--attribution-window", type=float, default=None, help="Janela de atribuição em segundos (padrão 600)")
	parent.add_argument("--salt", type=str, default=None, help="Salt da atribuição aos grupos")
	return parent


def _store_flag(parser: argparse.ArgumentParser) -> None:
	parser.add_argument("--store", type=str, default=None, help=f"Diretório do store (ou ${STORE_ENV})")


def build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(prog="adaptive_tutor", description="Tutor adaptativo: intervenções just-in-time e bônus")
	parser.add_argument("--log-level", type=str, default=None, help="DEBUG, INFO, WARNING (padrão) ou ERROR")
	sub = parser.add_subparsers(dest="command", required=True)
	policy = _policy_flags()

	p = sub.add_parser("ingest", parents=[policy], help="Grava eventos (JSON por linha) no store")
	_store_flag(p)
	p.add_argument("--course", type=str, default=None, help="Curso (YAML/JSON) para criar um store novo")
	p.add_argument("--events", type=str, default="-", help="Arquivo de eventos ou '-' para stdin")
	p.add_argument("--skip-invalid", action="store_true", help="Ignora linhas inválidas em vez de parar")

	p = sub.add_parser("simulate", parents=[policy], help="Roda a coorte sintética e grava logs e relatório")
	p.add_argument("--students", type=int, default=1000, help="Tamanho da coorte")
	p.add_argument("--seed", type=int, default=0)
	p.add_argument("--weeks", type=int, default=None, help="Horizonte em semanas (padrão: todas)")
	p.add_argument("--boost", type=float, default=None, help="Aumento de resposta do grupo RFC")
	p.add_argument("--course", type=str, default=None, help="Curso (padrão: curso de exemplo)")
	p.add_argument("--out", type=str, required=True, help="Diretório de saída (vira um store)")
	p.add_argument("--plots", action="store_true", help="Gera figuras e relatório em markdown")

	p = sub.add_parser("recommend", help="Recomenda um exercício bônus")
	_store_flag(p)
	p.add_argument("--student", type=str, required=True)
	p.add_argument("--week", type=int, required=True)

	p = sub.add_parser("report", help="Recalcula o relatório a partir dos logs do store")
	_store_flag(p)
	p.add_argument("--weeks", type=int, default=None, help="Horizonte em semanas")
	p.add_argument("--format", choices=("text", "json"), default="text")
	p.add_argument("--out", type=str, default=None, help="Diretório para report.txt/report.json")
	p.add_argument("--plots", action="store_true")

	p = sub.add_parser("verify", help="Reaplica o journal e compara com os snapshots")
	_store_flag(p)

	p = sub.add_parser("serve", help="Atende requisições (stdio com prefixo de tamanho, ou HTTP)")
	_store_flag(p)
	p.add_argument("--stdio", action="store_true", help="Usa stdin/stdout em vez de HTTP")
	p.add_argument("--host", type=str, default="127.0.0.1")
	p.add_argument("--port", type=int, default=8000)
	return parser


def _app_config(args: argparse.Namespace) -> AppConfig:
	config = load_config(getattr(args, "config", None))
	return config.with_overrides(
		policy={
			"trigger_percentile": getattr(args, "trigger_percentile", None),
			"min_active_seconds": getattr(args, "min_active_seconds", None),
			"daily_cap": getattr(args, "daily_cap", None),
			"per_exercise_cap": getattr(args, "per_exercise_cap", None),
			"attribution_window_seconds": getattr(args, "attribution_window", None),
		},
		cohort={"responsiveness_boost": getattr(args, "boost", None)},
		experiment={"salt": getattr(args, "salt", None)},
	)


def _print(data: Any, out: TextIO) -> None:
	out.write(json.dumps(data, ensure_ascii=False, indent=2) + "\n")


def _read_lines(source: str) -> Iterable[str]:
	if source == "-":
		yield from sys.stdin
		return
	with open(source, "r", encoding="utf-8") as f:
		yield from f


def cmd_ingest(args: argparse.Namespace, out: TextIO) -> int:
	config = _app_config(args)
	root = store_dir(args.store)
	plan = load_course_plan(args.course) if args.course else None
	store = Store.open_or_create(
		root,
		plan,
		policy=config.policy.to_policy(),
		salt=config.experiment.salt,
		timestamp_tolerance_seconds=config.experiment.timestamp_tolerance_seconds,
		session_gap_seconds=config.experiment.session_gap_seconds,
	)
	accepted = duplicates = skipped = 0
	with store.batch():
		for lineno, line in enumerate(_read_lines(args.events), start=1):
			if not line.strip():
				continue
			try:
				event = WorkEvent.from_dict(json.loads(line))
				ack = store.ingest(event)
			except (json.JSONDecodeError, EventError) as e:
				if not args.skip_invalid:
					raise EventError(f"line {lineno}: {e}") from e
				logger.warning("Skipping line %d: %s", lineno, e)
				skipped += 1
				continue
			if ack.duplicate:
				logger.warning("Duplicate event on line %d", lineno)
				duplicates += 1
			else:
				accepted += 1
	_print({"accepted": accepted, "duplicates": duplicates, "skipped": skipped}, out)
	return 0


def cmd_simulate(args: argparse.Namespace, out: TextIO) -> int:
	config = _app_config(args)
	plan = load_course_plan(args.course or SAMPLE_COURSE)
	policy = config.policy.to_policy()
	cohort_config = config.cohort.to_cohort()
	cohort = generate_cohort(args.students, cohort_config, seed=args.seed)
	result = simulate(cohort, plan, policy, args.weeks, config=cohort_config, salt=config.experiment.salt)

	store = Store.from_engine(args.out, result.engine)
	store.write_agents(p.to_dict() for p in cohort)
	store.write_simulation_info({
		"students": args.students,
		"seed": args.seed,
		"horizon": result.horizon,
		"cohort": cohort_config.to_dict(),
	})
	rep = report(
		result.events,
		result.decisions,
		result.assignments(),
		plan=plan,
		policy=policy,
		skills=result.skills(),
		horizon=result.horizon,
		knowledge=result.engine.knowledge,
	)
	write_report(rep, args.out, plots=args.plots)
	out.write(format_text(rep))
	return 0


def report_for_store(root: Path, horizon: int | None = None) -> ExperimentReport:
	store = Store.open(root)
	engine = store.engine
	agents = store.agents()
	info = store.simulation_info()
	horizon = horizon or info.get("horizon") or store.plan.weeks
	ids = set(engine.students) | {a["student_id"] for a in agents}
	return report(
		engine.events(),
		list(engine.decisions),
		{sid: engine.groups_for(sid) for sid in sorted(ids)},
		plan=store.plan,
		policy=store.settings.policy,
		skills={a["student_id"]: a["skill"] for a in agents},
		horizon=horizon,
		knowledge=engine.knowledge,
		session_gap_seconds=store.settings.session_gap_seconds,
	)


def cmd_report(args: argparse.Namespace, out: TextIO) -> int:
	rep = report_for_store(store_dir(args.store), args.weeks)
	if args.out:
		write_report(rep, args.out, plots=args.plots)
	out.write(to_json(rep) + "\n" if args.format == "json" else format_text(rep))
	return 0


def cmd_recommend(args: argparse.Namespace, out: TextIO) -> int:
	store = Store.open(store_dir(args.store))
	_print(store.engine.recommend(args.student, args.week).to_dict(), out)
	return 0


def cmd_verify(args: argparse.Namespace, out: TextIO) -> int:
	result = snapshot_and_replay(store_dir(args.store))
	_print(result.to_dict(), out)
	return 0 if result.consistent else 1


def cmd_serve(args: argparse.Namespace, out: TextIO) -> int:
	root = store_dir(args.store)
	if args.stdio:
		served = serve_stdio(TutorService(Store.open(root)), sys.stdin.buffer, sys.stdout.buffer)
		logger.info("Served %d requests", served)
		return 0
	import uvicorn

	os.environ[STORE_ENV] = str(root)
	uvicorn.run("api.main:app", host=args.host, port=args.port)
	return 0


COMMANDS = {
	"ingest": cmd_ingest,
	"simulate": cmd_simulate,
	"recommend": cmd_recommend,
	"report": cmd_report,
	"verify": cmd_verify,
	"serve": cmd_serve,
}


def main(argv: List[str] | None = None, out: TextIO | None = None) -> int:
	parser = build_parser()
	args = parser.parse_args(argv)
	logs.configure(args.log_level)
	out = out or sys.stdout
	try:
		return COMMANDS[args.command](args, out)
	except AdaptiveTutorError as e:
		print(f"error: {e}", file=sys.stderr)
		return 2


if __name__ == "__main__":
	exit(main())
