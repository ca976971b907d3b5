"""Store em diretório, com logs de linhas JSON só de acréscimo.

Layout::

	plan.json            plano do curso
	settings.json        política, salt e tolerâncias
	events.jsonl         eventos de trabalho (com seq global)
	decisions.jsonl      decisões e disposições (com seq global)
	snapshots/*.jsonl    estado derivado: students, knowledge, percentiles
	agents.jsonl         perfis dos agentes, quando o store veio de uma simulação
	simulation.json      parâmetros da simulação (tamanho, semente, horizonte)

O estado vivo é sempre a dobra do journal: abrir um store reaplica os dois
logs, na ordem de `seq`.
"""

from __future__ import annotations

import json
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional

from .domain import CoursePlan, load_course_plan
from .engine import Ack, Decision, TutorEngine
from .errors import StoreError
from .interventions import Disposition, InterventionPolicy, InterventionRecord
from .logs import get_logger
from .working_time import WorkEvent

logger = get_logger(__name__)

PLAN_FILE = "plan.json"
SETTINGS_FILE = "settings.json"
EVENTS_FILE = "events.jsonl"
DECISIONS_FILE = "decisions.jsonl"
AGENTS_FILE = "agents.jsonl"
SIMULATION_FILE = "simulation.json"
SNAPSHOT_DIR = "snapshots"
SNAPSHOT_FILES = ("students", "knowledge", "percentiles")


def _dumps(record: Mapping[str, Any]) -> str:
	return json.dumps(record, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def read_jsonl(path: Path) -> Iterator[Dict[str, Any]]:
	if not path.exists():
		return
	with path.open("r", encoding="utf-8") as f:
		for lineno, line in enumerate(f, start=1):
			line = line.strip()
			if not line:
				continue
			try:
				yield json.loads(line)
			except json.JSONDecodeError as e:
				raise StoreError(f"{path}:{lineno}: invalid JSON line: {e}") from e


def write_jsonl(path: Path, records: Iterable[Mapping[str, Any]]) -> None:
	tmp = path.with_suffix(path.suffix + ".tmp")
	with tmp.open("w", encoding="utf-8") as f:
		for record in records:
			f.write(_dumps(record) + "\n")
	tmp.replace(path)


@dataclass(frozen=True)
class Settings:
	policy: InterventionPolicy
	salt: str
	timestamp_tolerance_seconds: float
	session_gap_seconds: float

	def engine_kwargs(self) -> Dict[str, Any]:
		return {
			"policy": self.policy,
			"salt": self.salt,
			"timestamp_tolerance_seconds": self.timestamp_tolerance_seconds,
			"session_gap_seconds": self.session_gap_seconds,
		}

	def to_dict(self) -> Dict[str, Any]:
		return {
			"policy": self.policy.to_dict(),
			"salt": self.salt,
			"timestamp_tolerance_seconds": self.timestamp_tolerance_seconds,
			"session_gap_seconds": self.session_gap_seconds,
		}

	@classmethod
	def from_dict(cls, data: Mapping[str, Any]) -> "Settings":
		return cls(
			policy=InterventionPolicy(**data["policy"]),
			salt=str(data["salt"]),
			timestamp_tolerance_seconds=float(data["timestamp_tolerance_seconds"]),
			session_gap_seconds=float(data["session_gap_seconds"]),
		)


class Store:
	"""Um escritor serializado; leitores consultam o motor sob o lock dele.

	Toda escrita acrescenta ao journal e regrava os snapshots, de modo que o
	diretório fica verificável a qualquer momento; `batch` adia os snapshots
	para o fim de uma ingestão em lote.
	"""

	def __init__(self, root: Path, plan: CoursePlan, settings: Settings, engine: TutorEngine) -> None:
		self.root = Path(root)
		self.plan = plan
		self.settings = settings
		self.engine = engine
		self._flushed = len(engine.journal)
		self._write_lock = threading.Lock()
		self._deferred = 0

	@classmethod
	def create(
		cls,
		root: str | Path,
		plan: CoursePlan,
		policy: InterventionPolicy | None = None,
		*,
		salt: str = "adaptive-tutor",
		timestamp_tolerance_seconds: float = 300.0,
		session_gap_seconds: float = 300.0,
	) -> "Store":
		root = Path(root)
		if (root / PLAN_FILE).exists():
			raise StoreError(f"store already exists at {root}")
		(root / SNAPSHOT_DIR).mkdir(parents=True, exist_ok=True)
		settings = Settings(policy or InterventionPolicy(), salt, timestamp_tolerance_seconds, session_gap_seconds)
		(root / PLAN_FILE).write_text(json.dumps(plan.to_dict(), ensure_ascii=False, indent=2), encoding="utf-8")
		(root / SETTINGS_FILE).write_text(json.dumps(settings.to_dict(), indent=2), encoding="utf-8")
		for name in (EVENTS_FILE, DECISIONS_FILE):
			(root / name).touch()
		store = cls(root, plan, settings, TutorEngine(plan, **settings.engine_kwargs()))
		store.write_snapshots()
		logger.info("Created store at %s", root)
		return store

	@classmethod
	def from_engine(cls, root: str | Path, engine: TutorEngine) -> "Store":
		"""Persiste um motor já populado (por exemplo, depois de uma simulação)."""
		store = cls.create(
			root,
			engine.plan,
			engine.policy,
			salt=engine.salt,
			timestamp_tolerance_seconds=engine.timestamp_tolerance_seconds,
			session_gap_seconds=engine.session_gap_seconds,
		)
		store.engine = engine
		store._flushed = 0
		store.flush()
		store.write_snapshots()
		return store

	@classmethod
	def open(cls, root: str | Path) -> "Store":
		root = Path(root)
		plan, settings = read_plan_and_settings(root)
		journal = read_journal(root)
		engine = TutorEngine.replay(journal, plan, **settings.engine_kwargs())
		logger.info("Opened store at %s (%d journal records)", root, len(journal))
		return cls(root, plan, settings, engine)

	@classmethod
	def open_or_create(cls, root: str | Path, plan: Optional[CoursePlan] = None, **kwargs: Any) -> "Store":
		root = Path(root)
		if (root / PLAN_FILE).exists():
			return cls.open(root)
		if plan is None:
			raise StoreError(f"no store at {root} and no course plan to create one")
		return cls.create(root, plan, **kwargs)

	# escrita

	def ingest(self, event: WorkEvent) -> Ack:
		with self._write_lock:
			ack = self.engine.ingest(event)
			self._commit_locked()
			return ack

	def intervention_check(self, student_id: str, exercise_id: str, now: float) -> Optional[Decision]:
		with self._write_lock:
			decision = self.engine.intervention_check(student_id, exercise_id, now)
			self._commit_locked()
			return decision

	def record_disposition(self, decision_id: int, disposition: Disposition) -> InterventionRecord:
		with self._write_lock:
			record = self.engine.record_disposition(decision_id, disposition)
			self._commit_locked()
			return record

	@contextmanager
	def batch(self) -> Iterator["Store"]:
		"""Adia a reescrita dos snapshots até o fim do bloco (ingestão em lote)."""
		self._deferred += 1
		try:
			yield self
		finally:
			self._deferred -= 1
			if not self._deferred:
				self.write_snapshots()

	def flush(self) -> None:
		with self._write_lock:
			self._flush_locked()

	def _commit_locked(self) -> None:
		# snapshots acompanham o journal a cada escrita, fora de um lote
		if self._flush_locked() and not self._deferred:
			write_snapshot_files(self.root, self.engine.snapshots())

	def _flush_locked(self) -> bool:
		pending = self.engine.journal[self._flushed:]
		if not pending:
			return False
		events = [r for r in pending if r["type"] == "event"]
		others = [r for r in pending if r["type"] != "event"]
		if events:
			with (self.root / EVENTS_FILE).open("a", encoding="utf-8") as f:
				f.writelines(_dumps(r) + "\n" for r in events)
		if others:
			with (self.root / DECISIONS_FILE).open("a", encoding="utf-8") as f:
				f.writelines(_dumps(r) + "\n" for r in others)
		self._flushed = len(self.engine.journal)
		return True

	def write_snapshots(self) -> None:
		with self._write_lock:
			self._flush_locked()
			write_snapshot_files(self.root, self.engine.snapshots())

	def write_agents(self, profiles: Iterable[Mapping[str, Any]]) -> None:
		write_jsonl(self.root / AGENTS_FILE, profiles)

	def agents(self) -> List[Dict[str, Any]]:
		return list(read_jsonl(self.root / AGENTS_FILE))

	def write_simulation_info(self, info: Mapping[str, Any]) -> None:
		(self.root / SIMULATION_FILE).write_text(json.dumps(dict(info), indent=2), encoding="utf-8")

	def simulation_info(self) -> Dict[str, Any]:
		path = self.root / SIMULATION_FILE
		if not path.exists():
			return {}
		return json.loads(path.read_text(encoding="utf-8"))


def read_plan_and_settings(root: Path) -> tuple[CoursePlan, Settings]:
	plan_path = root / PLAN_FILE
	if not plan_path.exists():
		raise StoreError(f"no store at {root} (missing {PLAN_FILE})")
	try:
		plan = load_course_plan(json.loads(plan_path.read_text(encoding="utf-8")))
		settings = Settings.from_dict(json.loads((root / SETTINGS_FILE).read_text(encoding="utf-8")))
	except (OSError, KeyError, json.JSONDecodeError) as e:
		raise StoreError(f"store at {root} is unreadable: {e}") from e
	return plan, settings


def read_journal(root: Path) -> List[Dict[str, Any]]:
	records = list(read_jsonl(root / EVENTS_FILE)) + list(read_jsonl(root / DECISIONS_FILE))
	records.sort(key=lambda r: r["seq"])
	for expected, record in enumerate(records):
		if record["seq"] != expected:
			raise StoreError(f"journal has a gap or duplicate at seq {expected} (found {record['seq']})")
	return records


def write_snapshot_files(root: Path, snapshots: Mapping[str, Mapping[str, Any]]) -> None:
	directory = root / SNAPSHOT_DIR
	directory.mkdir(parents=True, exist_ok=True)
	for name in SNAPSHOT_FILES:
		rows = snapshots.get(name, {})
		write_jsonl(directory / f"{name}.jsonl", ({"key": key, "value": rows[key]} for key in sorted(rows)))


def read_snapshot_files(root: Path) -> Dict[str, Dict[str, Any]]:
	directory = root / SNAPSHOT_DIR
	return {
		name: {row["key"]: row["value"] for row in read_jsonl(directory / f"{name}.jsonl")}
		for name in SNAPSHOT_FILES
	}


@dataclass(frozen=True)
class Mismatch:
	file: str
	key: str
	stored: Any
	replayed: Any

	def to_dict(self) -> Dict[str, Any]:
		return {"file": self.file, "key": self.key, "stored": self.stored, "replayed": self.replayed}


@dataclass(frozen=True)
class VerificationResult:
	consistent: bool
	records_replayed: int
	mismatch: Optional[Mismatch] = None

	def to_dict(self) -> Dict[str, Any]:
		return {
			"consistent": self.consistent,
			"records_replayed": self.records_replayed,
			"mismatch": None if self.mismatch is None else self.mismatch.to_dict(),
		}


def snapshot_and_replay(root: str | Path) -> VerificationResult:
	"""Reaplica o journal do zero e compara com os snapshots gravados."""
	root = Path(root)
	plan, settings = read_plan_and_settings(root)
	journal = read_journal(root)
	engine = TutorEngine.replay(journal, plan, **settings.engine_kwargs())
	# passa pelo JSON para comparar exatamente o que foi gravado
	replayed = json.loads(_dumps(engine.snapshots()))
	stored = read_snapshot_files(root)
	for name in SNAPSHOT_FILES:
		expected = stored.get(name, {})
		actual = replayed.get(name, {})
		for key in sorted(set(expected) | set(actual)):
			if _dumps({"v": expected.get(key)}) != _dumps({"v": actual.get(key)}):
				logger.warning("Replay diverges from snapshot %s at %s", name, key)
				return VerificationResult(
					consistent=False,
					records_replayed=len(journal),
					mismatch=Mismatch(file=name, key=key, stored=expected.get(key), replayed=actual.get(key)),
				)
	return VerificationResult(consistent=True, records_replayed=len(journal))
