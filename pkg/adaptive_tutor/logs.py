from __future__ import annotations

import logging
import os

FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
LOG_LEVEL_ENV = "ADAPTIVE_TUTOR_LOG_LEVEL"


def get_logger(name: str) -> logging.Logger:
	return logging.getLogger(name)


def configure(level: str | None = None) -> None:
	"""Instala um único handler de stream no logger do pacote."""
	level = (level or os.environ.get(LOG_LEVEL_ENV) or "WARNING").upper()
	root = logging.getLogger("adaptive_tutor")
	root.setLevel(level)
	if not any(getattr(h, "_adaptive_tutor", False) for h in root.handlers):
		handler = logging.StreamHandler()
		handler.setFormatter(logging.Formatter(FORMAT))
		handler._adaptive_tutor = True  # type: ignore[attr-defined]
		root.addHandler(handler)
