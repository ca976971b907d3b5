"""Serviço de requisição/resposta sobre um `Store`.

Formato no stdio: cada mensagem é um prefixo de 4 bytes big-endian com o
tamanho, seguido de um objeto JSON UTF-8. Requisição ``{"op": ..., ...}``;
resposta ``{"ok": true, "result": ...}`` ou
``{"ok": false, "error": {"type": ..., "message": ...}}``.

O serviço nunca lê o relógio do sistema: `now` vem sempre na requisição.
"""

from __future__ import annotations

import json
import struct
from typing import Any, BinaryIO, Callable, Dict, Mapping, Optional

from .errors import AdaptiveTutorError, EventError
from .interventions import Disposition
from .logs import get_logger
from .store import Store
from .working_time import EventKind, WorkEvent

logger = get_logger(__name__)

HEADER = struct.Struct(">I")
MAX_FRAME_BYTES = 16 * 1024 * 1024


def _require(payload: Mapping[str, Any], name: str, convert: Callable[[Any], Any] = str) -> Any:
	"""Lê um campo obrigatório da requisição, já convertido; falha com `EventError`."""
	value = payload.get(name)
	if value is None:
		raise EventError(f"request is missing '{name}'")
	try:
		return convert(value)
	except (TypeError, ValueError) as e:
		raise EventError(f"request field '{name}' is malformed: {value!r}") from e


class TutorService:
	def __init__(self, store: Store) -> None:
		self.store = store
		self._ops: Dict[str, Callable[[Mapping[str, Any]], Any]] = {
			"ingest_event": self.ingest_event,
			"timer_status": self.timer_status,
			"intervention_check": self.intervention_check,
			"submit_outcome": self.submit_outcome,
			"knowledge_snapshot": self.knowledge_snapshot,
			"recommend": self.recommend,
			"record_disposition": self.record_disposition,
		}

	@property
	def operations(self) -> tuple[str, ...]:
		return tuple(self._ops)

	def handle(self, request: Mapping[str, Any]) -> Dict[str, Any]:
		op = request.get("op") if isinstance(request, Mapping) else None
		handler = self._ops.get(op) if isinstance(op, str) else None
		if handler is None:
			return _error("UnknownOperation", f"unknown operation {op!r}")
		try:
			return {"ok": True, "result": handler(request)}
		except (AdaptiveTutorError, LookupError, ValueError) as e:
			logger.debug("Request %s failed: %s", op, e)
			return _error(type(e).__name__, str(e))

	# operações

	def ingest_event(self, payload: Mapping[str, Any]) -> Dict[str, Any]:
		event = WorkEvent.from_dict(payload.get("event", payload))
		return self.store.ingest(event).to_dict()

	def timer_status(self, payload: Mapping[str, Any]) -> Dict[str, Any]:
		return self.store.engine.timer_status(
			_require(payload, "student_id"),
			_require(payload, "exercise_id"),
			None if payload.get("now") is None else _require(payload, "now", float),
		).to_dict()

	def intervention_check(self, payload: Mapping[str, Any]) -> Optional[Dict[str, Any]]:
		decision = self.store.intervention_check(
			_require(payload, "student_id"),
			_require(payload, "exercise_id"),
			_require(payload, "now", float),
		)
		return None if decision is None else decision.to_dict()

	def submit_outcome(self, payload: Mapping[str, Any]) -> Dict[str, Any]:
		event = WorkEvent(
			student_id=_require(payload, "student_id"),
			exercise_id=_require(payload, "exercise_id"),
			timestamp=_require(payload, "at", float),
			kind=EventKind.SUBMIT,
			score_fraction=_require(payload, "score_fraction", float),
		)
		ack = self.store.ingest(event)
		return {"ack": ack.to_dict(), "knowledge": self.store.engine.knowledge_snapshot(event.student_id).records()}

	def knowledge_snapshot(self, payload: Mapping[str, Any]) -> list:
		return self.store.engine.knowledge_snapshot(_require(payload, "student_id")).records()

	def recommend(self, payload: Mapping[str, Any]) -> Dict[str, Any]:
		return self.store.engine.recommend(
			_require(payload, "student_id"), _require(payload, "week", int),
		).to_dict()

	def record_disposition(self, payload: Mapping[str, Any]) -> Dict[str, Any]:
		record = self.store.record_disposition(
			_require(payload, "decision_id", int), _require(payload, "disposition", Disposition),
		)
		return record.to_dict()


def _error(kind: str, message: str) -> Dict[str, Any]:
	return {"ok": False, "error": {"type": kind, "message": message}}


def encode_frame(message: Mapping[str, Any]) -> bytes:
	body = json.dumps(message, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
	return HEADER.pack(len(body)) + body


def _read_exact(stream: BinaryIO, size: int) -> bytes:
	chunks = []
	remaining = size
	while remaining:
		chunk = stream.read(remaining)
		if not chunk:
			break
		chunks.append(chunk)
		remaining -= len(chunk)
	return b"".join(chunks)


def read_frame(stream: BinaryIO) -> Optional[Any]:
	"""Lê uma mensagem; None no fim do fluxo."""
	header = _read_exact(stream, HEADER.size)
	if not header:
		return None
	if len(header) < HEADER.size:
		raise EventError("truncated frame header")
	(length,) = HEADER.unpack(header)
	if length > MAX_FRAME_BYTES:
		raise EventError(f"frame of {length} bytes exceeds the {MAX_FRAME_BYTES} byte limit")
	body = _read_exact(stream, length)
	if len(body) < length:
		raise EventError("truncated frame body")
	try:
		return json.loads(body.decode("utf-8"))
	except (UnicodeDecodeError, json.JSONDecodeError) as e:
		raise EventError(f"invalid frame payload: {e}") from e


def serve_stdio(service: TutorService, instream: BinaryIO, outstream: BinaryIO) -> int:
	"""Atende requisições até o fim da entrada; devolve quantas foram atendidas."""
	served = 0
	while True:
		try:
			request = read_frame(instream)
		except EventError as e:
			outstream.write(encode_frame(_error(type(e).__name__, str(e))))
			outstream.flush()
			break
		if request is None:
			break
		outstream.write(encode_frame(service.handle(request)))
		outstream.flush()
		served += 1
	service.store.write_snapshots()
	return served
