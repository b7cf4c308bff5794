"""KCBS quantities from the five joint-probability tables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from kcbs_optics.measurement import JointProbTable, State, all_contexts
from kcbs_optics.optics import N_OBSERVABLES, KcbsMeasurementFamily
from kcbs_optics.tolerances import PHYSICS_TOL

S_CLASSICAL_MAX = 2.0
KAPPA_CLASSICAL_MIN = -3.0
S_QUANTUM_MAX = math.sqrt(5.0)
KAPPA_QUANTUM_MIN = 5.0 - 4.0 * math.sqrt(5.0)


class MalformedTables(ValueError):
    pass


def _check(tables: Sequence[JointProbTable]) -> None:
    if len(tables) != N_OBSERVABLES:
        raise MalformedTables(f"expected 5 context tables, got {len(tables)}")
    if sorted(t.j for t in tables) != list(range(1, N_OBSERVABLES + 1)):
        raise MalformedTables("tables must cover contexts 1..5 exactly once")


def s_from_tables(tables: Sequence[JointProbTable]) -> float:
    """``sum_j p(v_j=+1) - sum_j p(v_j=+1, v_{j+1}=+1)``; the classical bound is 2."""
    _check(tables)
    return sum(t.marginal_first for t in tables) - sum(t.p_pp for t in tables)


def s_from_plus_minus(tables: Sequence[JointProbTable]) -> float:
    """Same quantity summed from the ``p(+,-)`` entries alone."""
    _check(tables)
    return sum(t.p_pm for t in tables)


def kappa_from_correlators(tables: Sequence[JointProbTable]) -> float:
    """Sum of the five adjacent correlators; the classical bound is -3."""
    _check(tables)
    if not all(t.resolved for t in tables):
        raise MalformedTables("kappa needs p_mm/p_mp for every context (single-photon input)")
    return sum(t.correlator() for t in tables)


@dataclass(frozen=True)
class KcbsResult:
    s_value: float
    kappa: Optional[float]
    per_context: tuple[JointProbTable, ...]

    @property
    def violates_classical(self) -> bool:
        return self.s_value > S_CLASSICAL_MAX

    @property
    def kappa_violates(self) -> Optional[bool]:
        return None if self.kappa is None else self.kappa < KAPPA_CLASSICAL_MIN

    def to_json(self) -> dict:
        return {
            "S": self.s_value,
            "kappa": self.kappa,
            "violates_classical": self.violates_classical,
            "per_context": [t.to_json() for t in self.per_context],
        }

    def csv_row(self) -> list:
        return [self.s_value, self.kappa, self.violates_classical]


def evaluate(family: KcbsMeasurementFamily, state: State) -> KcbsResult:
    """Run all five contexts on ``state`` and assemble S (and kappa where defined)."""
    tables = all_contexts(family, state)
    kappa = kappa_from_correlators(tables) if all(t.resolved for t in tables) else None
    return KcbsResult(s_from_tables(tables), kappa, tables)


def consistency_check(result: KcbsResult, tol: float = PHYSICS_TOL) -> bool:
    """Whether ``kappa == 5 - 4 S`` holds for the independently computed values."""
    if result.kappa is None:
        raise MalformedTables("consistency check needs single-photon tables")
    return abs(result.kappa - (5.0 - 4.0 * result.s_value)) < tol
