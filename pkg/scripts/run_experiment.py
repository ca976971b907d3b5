#!/usr/bin/env python3
from __future__ import annotations

import sys
from pathlib import Path

# Garante que o diretório raiz do workspace esteja no sys.path
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from adaptive_tutor import CohortConfig, InterventionPolicy, generate_cohort, load_course_plan, report, simulate
from adaptive_tutor.domain import SAMPLE_COURSE
from adaptive_tutor.report import format_text, write_report


def main() -> int:
    plan = load_course_plan(SAMPLE_COURSE)
    config = CohortConfig(responsiveness_boost=0.3)
    cohort = generate_cohort(200, config, seed=7)
    result = simulate(cohort, plan, InterventionPolicy(), horizon=2, config=config)
    rep = report(
        result.events,
        result.decisions,
        result.assignments(),
        plan=plan,
        skills=result.skills(),
        horizon=result.horizon,
        knowledge=result.engine.knowledge,
    )
    out = Path(__file__).parent / "experiment"
    write_report(rep, out, plots=True)
    print(format_text(rep))
    print(f"Exportado: {out}")
    return 0


if __name__ == "__main__":
    exit(main())
