"""Hierarquia de exceções do adaptive_tutor.

Cada classe também herda da exceção embutida mais próxima, para que quem
chama possa capturar tanto `AdaptiveTutorError` quanto `ValueError`/`LookupError`.
"""

from __future__ import annotations


class AdaptiveTutorError(Exception):
	"""Raiz de todos os erros do pacote."""


class CoursePlanError(AdaptiveTutorError, ValueError):
	pass


class ConfigError(AdaptiveTutorError, ValueError):
	pass


class EventError(AdaptiveTutorError, ValueError):
	"""Evento malformado ou sequência de eventos inválida."""


class TimestampRegressionError(EventError):
	pass


class EmptyTableError(AdaptiveTutorError, ValueError):
	"""Tabela de percentis sem amostras (cold start)."""


class AttributionError(AdaptiveTutorError, ValueError):
	pass


class UnknownStudentError(AdaptiveTutorError, LookupError):
	pass


class UnknownExerciseError(AdaptiveTutorError, LookupError):
	pass


class RecommendationError(AdaptiveTutorError, LookupError):
	pass


class ReportError(AdaptiveTutorError, ValueError):
	pass


class StoreError(AdaptiveTutorError):
	pass


class UnknownDecisionError(AdaptiveTutorError, LookupError):
	pass
