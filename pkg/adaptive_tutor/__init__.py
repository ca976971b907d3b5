"""adaptive_tutor

Motor de um curso de programação adaptativo: mede o tempo de trabalho por
exercício, dispara intervenções just-in-time (pedido de comentários ou pausa)
para quem está travado, mantém um modelo de conhecimento por tópico e
recomenda exercícios bônus. Inclui um simulador de coorte para o experimento
A/B e um store baseado em eventos.
"""

from .domain import CoursePlan, ExerciseSpec, GroupAssignment, assign_groups, load_course_plan
from .engine import TutorEngine
from .interventions import InterventionPolicy, InterventionRecord
from .knowledge import KnowledgeVector, SubmissionOutcome, theta
from .recommender import RankedRecommendation, recommend
from .report import ExperimentReport, report
from .simulation import AgentProfile, CohortConfig, generate_cohort, simulate
from .store import Store, snapshot_and_replay
from .working_time import PercentileTable, WorkEvent, compute_working_time, percentile

__all__ = [
	"AgentProfile",
	"CohortConfig",
	"CoursePlan",
	"ExerciseSpec",
	"ExperimentReport",
	"GroupAssignment",
	"InterventionPolicy",
	"InterventionRecord",
	"KnowledgeVector",
	"PercentileTable",
	"RankedRecommendation",
	"Store",
	"SubmissionOutcome",
	"TutorEngine",
	"WorkEvent",
	"assign_groups",
	"compute_working_time",
	"generate_cohort",
	"load_course_plan",
	"percentile",
	"recommend",
	"report",
	"simulate",
	"snapshot_and_replay",
	"theta",
]

__version__ = "0.1.0"
