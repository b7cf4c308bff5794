"""Noncontextual hidden-variable models for the five-cycle, by brute force.

A deterministic model assigns a fixed value ``+1`` or ``-1`` to each of the
five observables; general models are probability distributions over the 32
assignments.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from kcbs_optics.kcbs import S_CLASSICAL_MAX, s_from_tables
from kcbs_optics.measurement import JointProbTable
from kcbs_optics.optics import N_OBSERVABLES
from kcbs_optics.tolerances import PHYSICS_TOL, PROBABILITY_TOL


@dataclass(frozen=True)
class Assignment:
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.values) != N_OBSERVABLES or any(v not in (-1, 1) for v in self.values):
            raise ValueError(f"an assignment is five values in {{-1, +1}}, got {self.values}")

    def _pairs(self):
        v = self.values
        return ((v[i], v[(i + 1) % N_OBSERVABLES]) for i in range(N_OBSERVABLES))

    def kappa(self) -> int:
        return sum(a * b for a, b in self._pairs())

    def s_value(self) -> int:
        plus = sum(1 for v in self.values if v == 1)
        both_plus = sum(1 for a, b in self._pairs() if a == 1 and b == 1)
        return plus - both_plus

    def has_adjacent_minus(self) -> bool:
        return any(a == -1 and b == -1 for a, b in self._pairs())


def all_assignments() -> tuple[Assignment, ...]:
    """The 32 assignments, in lexicographic order with -1 before +1."""
    return tuple(Assignment(v) for v in itertools.product((-1, 1), repeat=N_OBSERVABLES))


def classical_kappa_range() -> tuple[int, int]:
    values = [a.kappa() for a in all_assignments()]
    return min(values), max(values)


def kappa_minimisers() -> list[Assignment]:
    low, _ = classical_kappa_range()
    return [a for a in all_assignments() if a.kappa() == low]


def classical_s_max(exclusive_only: bool = False) -> int:
    """Largest S over deterministic assignments.

    With ``exclusive_only`` the search is restricted to assignments that never
    give ``-1`` on two adjacent observables, mirroring the exclusivity of the
    quantum projectors.
    """
    pool = [a for a in all_assignments() if not (exclusive_only and a.has_adjacent_minus())]
    return max(a.s_value() for a in pool)


def fine_marginal_check(distribution: Sequence[float]) -> tuple[JointProbTable, ...]:
    """Adjacent-pair marginals of a distribution over :func:`all_assignments`.

    Any such table set obeys the classical bound ``S <= 2``; a breach raises.
    """
    p = np.asarray(distribution, dtype=float)
    assignments = all_assignments()
    if p.shape != (len(assignments),):
        raise ValueError(f"distribution must have {len(assignments)} entries")
    if np.any(p < 0) or abs(p.sum() - 1.0) > PROBABILITY_TOL:
        raise ValueError("distribution must be non-negative and sum to one")
    values = np.array([a.values for a in assignments])
    tables = []
    for i in range(N_OBSERVABLES):
        first, second = values[:, i], values[:, (i + 1) % N_OBSERVABLES]

        def mass(x, y):
            return float(p[(first == x) & (second == y)].sum())

        tables.append(
            JointProbTable(i + 1, p_pm=mass(1, -1), p_pp=mass(1, 1), p_mm=mass(-1, -1), p_mp=mass(-1, 1))
        )
    tables = tuple(tables)
    s = s_from_tables(tables)
    if s > S_CLASSICAL_MAX + PHYSICS_TOL:
        raise RuntimeError(f"classical model produced S = {s}")
    return tables


def is_classically_reproducible(tables: Sequence[JointProbTable], tol: float = PHYSICS_TOL) -> bool:
    """False when the tables witness ``S > 2``, so no distribution over assignments yields them."""
    return s_from_tables(tables) <= S_CLASSICAL_MAX + tol


def assignment_rows() -> list[list]:
    """Rows ``v1..v5, kappa, S`` for every assignment."""
    return [[*a.values, a.kappa(), a.s_value()] for a in all_assignments()]


ASSIGNMENT_CSV_HEADER = ["v1", "v2", "v3", "v4", "v5", "kappa", "S"]
