"""Advisors: deletion suggestions and static hazard findings."""

from leader.advisors.cfg import Cfg, build_cfg
from leader.advisors.debloat import (
    Suggestion,
    coverage_domain,
    static_candidates,
    suggest,
    uncovered_candidates,
)
from leader.advisors.security import (
    HIGH,
    MEDIUM,
    Finding,
    SecurityDiff,
    analyze_unit,
    diff_findings,
)

__all__ = [
    "Cfg",
    "build_cfg",
    "Suggestion",
    "coverage_domain",
    "static_candidates",
    "suggest",
    "uncovered_candidates",
    "HIGH",
    "MEDIUM",
    "Finding",
    "SecurityDiff",
    "analyze_unit",
    "diff_findings",
]
