"""On-off detection of mode 1 and sequential KCBS measurements.

Observable ``A^(j)`` is realised as network ``U^(j)^dagger``, an on-off
detector on mode 1, then network ``U^(j)``.  A no-click (outcome +1) projects
mode 1 onto vacuum and keeps the photon; a click (outcome -1) absorbs it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from kcbs_optics.optics import N_OBSERVABLES, KcbsMeasurementFamily, apply
from kcbs_optics.states import InvalidState, SinglePhotonState, UnnormalizedCoherent
from kcbs_optics.tolerances import PHYSICS_TOL

State = Union[SinglePhotonState, UnnormalizedCoherent]

NO_SIGNALING_TOL = 1e-9


class Outcome(enum.IntEnum):
    PLUS = 1  # no click
    MINUS = -1  # click


@dataclass(frozen=True)
class MeasurementContext:
    """Adjacent pair ``(j, j+1)`` with ``5 + 1 -> 1``."""

    j: int

    def __post_init__(self) -> None:
        if not 1 <= self.j <= N_OBSERVABLES:
            raise ValueError(f"context index must lie in 1..5, got {self.j}")

    @property
    def first(self) -> int:
        return self.j

    @property
    def second(self) -> int:
        return self.j % N_OBSERVABLES + 1

    @classmethod
    def all(cls) -> tuple[MeasurementContext, ...]:
        return tuple(cls(j) for j in range(1, N_OBSERVABLES + 1))


def _as_context(context: Union[MeasurementContext, int]) -> MeasurementContext:
    return context if isinstance(context, MeasurementContext) else MeasurementContext(int(context))


@dataclass(frozen=True)
class JointProbTable:
    """Outcome probabilities for ``(v_j, v_{j+1})``.

    For coherent inputs the click branch is not resolved further, so
    ``p_mm`` and ``p_mp`` are ``None`` and only ``p_m_total`` is available;
    ``resolved`` tells the two cases apart.
    """

    j: int
    p_pm: float
    p_pp: float
    p_mm: Optional[float] = None
    p_mp: Optional[float] = None
    unresolved_p_m: Optional[float] = None

    def __post_init__(self) -> None:
        if (self.p_mm is None) != (self.p_mp is None):
            raise ValueError("p_mm and p_mp must both be given or both omitted")
        if self.p_mm is None and self.unresolved_p_m is None:
            raise ValueError("unresolved table needs p_m_total")
        entries = [self.p_pm, self.p_pp, self.p_m_total]
        if any(p < -PHYSICS_TOL or p > 1.0 + PHYSICS_TOL for p in entries):
            raise ValueError(f"probabilities out of [0, 1]: {entries}")
        if abs(sum(entries) - 1.0) > PHYSICS_TOL:
            raise ValueError(f"joint table sums to {sum(entries)!r}")

    @property
    def resolved(self) -> bool:
        return self.p_mm is not None

    @property
    def p_m_total(self) -> float:
        if self.p_mm is not None:
            return self.p_mm + self.p_mp
        return self.unresolved_p_m

    @property
    def marginal_first(self) -> float:
        """p(v_j = +1)."""
        return self.p_pm + self.p_pp

    @property
    def marginal_second(self) -> Optional[float]:
        """p(v_{j+1} = +1) marginalised from the table; None if unresolved."""
        if self.p_mp is None:
            return None
        return self.p_mp + self.p_pp

    def correlator(self) -> float:
        """``<A^(j) A^(j+1)>`` from the four joint probabilities."""
        if not self.resolved:
            raise ValueError("correlator needs the full p_mm/p_mp split")
        return self.p_pp + self.p_mm - self.p_pm - self.p_mp

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "p_mm": self.p_mm,
            "p_mp": self.p_mp,
            "p_pm": self.p_pm,
            "p_pp": self.p_pp,
            "p_m_total": self.p_m_total,
            "marginal_first": self.marginal_first,
            "marginal_second": self.marginal_second,
            "resolved": self.resolved,
        }

    def csv_row(self) -> list:
        return [self.j, self.p_mm, self.p_mp, self.p_pm, self.p_pp]


CSV_HEADER = ["j", "p_mm", "p_mp", "p_pm", "p_pp"]


@dataclass(frozen=True)
class Detection:
    p_click: float
    p_noclick: float
    post_noclick: State


def detect_mode1_photon(state: SinglePhotonState) -> Detection:
    """On-off detection of mode 1 for a single photon.

    Probabilities are relative to the incoming norm; the returned no-click
    state is unnormalized, carrying the absolute weight of the record.
    """
    n2 = state.norm_squared()
    if n2 <= 0.0:
        raise InvalidState("cannot measure a zero-norm state")
    c1 = state.amplitudes[0]
    p_click = float(abs(c1) ** 2 / n2)
    post = state.amplitudes.copy()
    post[0] = 0.0
    return Detection(p_click, 1.0 - p_click, SinglePhotonState(post))


def detect_mode1_coherent(state: UnnormalizedCoherent) -> Detection:
    """On-off detection of mode 1 for a coherent state.

    Projecting mode 1 onto vacuum multiplies the state by ``<0|mu_1>``, a
    factor ``exp(-|mu_1|^2 / 2)`` in amplitude.
    """
    mu1_sq = float(abs(state.displacements[0]) ** 2)
    p_noclick = float(np.exp(-mu1_sq))
    post = state.displacements.copy()
    post[0] = 0.0
    return Detection(1.0 - p_noclick, p_noclick, UnnormalizedCoherent(post, state.log_weight - 0.5 * mu1_sq))


def _detect(state: State) -> Detection:
    if isinstance(state, SinglePhotonState):
        return detect_mode1_photon(state)
    if isinstance(state, UnnormalizedCoherent):
        return detect_mode1_coherent(state)
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _weight(state: State) -> float:
    if isinstance(state, SinglePhotonState):
        return state.norm_squared()
    return state.probability


@dataclass(frozen=True)
class ObservableResult:
    p_plus: float
    p_minus: float
    post_plus: State


def measure_observable(j: int, family: KcbsMeasurementFamily, state: State) -> ObservableResult:
    """Measure ``A^(j)``; probabilities are conditional on the incoming state."""
    u = family.unitary(j)
    det = _detect(apply(u.dagger, state))
    return ObservableResult(det.p_noclick, det.p_click, apply(u, det.post_noclick))


def _p_noclick_absolute(j: int, family: KcbsMeasurementFamily, state: State) -> tuple[float, State]:
    """Absolute weight of the +1 branch and the corresponding unnormalized state."""
    if _weight(state) <= 0.0:
        return 0.0, state
    res = measure_observable(j, family, state)
    return _weight(res.post_plus), res.post_plus


def sequential_context(
    context: Union[MeasurementContext, int], family: KcbsMeasurementFamily, state: State
) -> JointProbTable:
    """Exact joint outcome table for measuring ``A^(j)`` then ``A^(j+1)``."""
    ctx = _as_context(context)
    total = _weight(state)
    if total <= 0.0:
        raise InvalidState("cannot measure a zero-norm state")
    w_p, after_plus = _p_noclick_absolute(ctx.first, family, state)
    w_pp, _ = _p_noclick_absolute(ctx.second, family, after_plus)
    p_plus = w_p / total
    p_pp = w_pp / total
    p_pm = p_plus - p_pp
    p_minus = 1.0 - p_plus
    if isinstance(state, SinglePhotonState):
        # A click absorbs the photon; the vacuum left behind never clicks again.
        return JointProbTable(ctx.j, p_pm=p_pm, p_pp=p_pp, p_mm=0.0, p_mp=p_minus)
    if w_p == total:
        # the first detector never fires, so both -1 entries vanish
        return JointProbTable(ctx.j, p_pm=p_pm, p_pp=p_pp, p_mm=0.0, p_mp=0.0)
    return JointProbTable(ctx.j, p_pm=p_pm, p_pp=p_pp, unresolved_p_m=p_minus)


def all_contexts(family: KcbsMeasurementFamily, state: State) -> tuple[JointProbTable, ...]:
    return tuple(sequential_context(ctx, family, state) for ctx in MeasurementContext.all())


def single_click_approximation_error(table: JointProbTable) -> float:
    """Error of approximating ``p(v_j=-1)`` by ``p(v_j=-1, v_{j+1}=+1)``, i.e. ``p_mm``."""
    if not table.resolved:
        raise ValueError("needs a resolved table")
    return table.p_m_total - table.p_mp


def _coherent_click_then_plus(ctx: MeasurementContext, family: KcbsMeasurementFamily,
                              state: UnnormalizedCoherent) -> float:
    """``|| P+^(j+1) P-^(j) |state> ||^2`` for an ideal projective click branch.

    With ``P- = 1 - P+`` this is ``w(+') - 2 Re <P+' s | P+' P+ s> + w(+,+')``,
    and every vector involved is an unnormalized coherent state.
    """
    w_second, second_only = _p_noclick_absolute(ctx.second, family, state)
    _, after_first = _p_noclick_absolute(ctx.first, family, state)
    w_both, both = _p_noclick_absolute(ctx.second, family, after_first)
    cross = second_only.overlap(both).real
    return max(w_second - 2.0 * cross + w_both, 0.0)


@dataclass(frozen=True)
class NoSignalingReport:
    lhs: float
    rhs: float
    passed: bool


def no_signaling_check(
    context: Union[MeasurementContext, int], family: KcbsMeasurementFamily, state: State
) -> NoSignalingReport:
    """Compare ``p(v_{j+1}=+1)`` measured alone with its marginal after measuring ``A^(j)``."""
    ctx = _as_context(context)
    total = _weight(state)
    lhs = measure_observable(ctx.second, family, state).p_plus
    table = sequential_context(ctx, family, state)
    if table.resolved:
        rhs = table.marginal_second
    else:
        rhs = table.p_pp + _coherent_click_then_plus(ctx, family, state) / total
    return NoSignalingReport(lhs, rhs, abs(lhs - rhs) < NO_SIGNALING_TOL)
