"""Finite-statistics simulation of the three-mode bench.

Each heralded shot ends in exactly one detector:

* D1 - click on mode 1 after the first network (``v_j = -1``),
* D2 - output mode 1 of the second network (``v_j = +1, v_{j+1} = -1``),
* D3, D4 - output modes 2 and 3 (``v_j = +1, v_{j+1} = +1``),
* D5 - the loss monitor, only when loss is monitored.

A click at D1 absorbs the photon, so no shot can register both ``v_j = -1``
and ``v_{j+1} = -1``.

Random numbers: the counts of repetition ``r`` of context ``j`` are drawn from
``numpy.random.Generator(PCG64(SeedSequence(seed, spawn_key=key + (j, r))))``
where ``key`` is ``()`` for a single experiment and ``(grid_index,)`` inside
a loss sweep.  Results therefore do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from kcbs_optics.kcbs import evaluate
from kcbs_optics.measurement import MeasurementContext
from kcbs_optics.optics import N_OBSERVABLES, KcbsMeasurementFamily, bench_compile
from kcbs_optics.states import SinglePhotonState, make_single_photon

DEFAULT_SHOTS = 4100
DEFAULT_REPETITIONS = 100


class NoCoincidences(RuntimeError):
    """Raised when a configuration yields no detected photons to condition on."""


@dataclass(frozen=True)
class ShotConfig:
    shots_per_context: int = DEFAULT_SHOTS
    repetitions: int = DEFAULT_REPETITIONS
    seed: int = 0
    loss_rate: float = 0.0
    monitor_loss: bool = False

    def __post_init__(self) -> None:
        if self.shots_per_context < 1:
            raise ValueError("shots_per_context must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 0.0 <= self.loss_rate <= 1.0:
            raise ValueError(f"loss_rate must lie in [0, 1], got {self.loss_rate}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_json(self) -> dict:
        return {
            "shots_per_context": self.shots_per_context,
            "repetitions": self.repetitions,
            "seed": self.seed,
            "loss_rate": self.loss_rate,
            "monitor_loss": self.monitor_loss,
        }


@dataclass(frozen=True)
class DetectorProbabilities:
    context: int
    q: tuple[float, ...]  # D1..D4, plus D5 when loss is monitored

    @property
    def q1(self) -> float:
        return self.q[0]

    @property
    def q2(self) -> float:
        return self.q[1]

    @property
    def q3(self) -> float:
        return self.q[2]

    @property
    def q4(self) -> float:
        return self.q[3]

    @property
    def q_lost(self) -> float:
        return self.q[4] if len(self.q) > 4 else 0.0


def _stage_transfers(family: KcbsMeasurementFamily, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-vector transfer matrices of the two bench stages for context ``j``."""
    if family.mode_count == 3:
        setting = bench_compile(j, family)
        if not setting.verified:
            raise RuntimeError(f"wave-plate settings for context {j} do not reproduce the family")
        return setting.stage_transfer(1).entries, setting.stage_transfer(2).entries
    u_j = family.unitary(j).entries
    u_next = family.unitary(j + 1).entries
    return u_j.conj().T, u_j @ u_next.conj().T


def detector_probabilities(
    context: MeasurementContext | int,
    family: KcbsMeasurementFamily,
    loss_rate: float = 0.0,
    monitor_loss: bool = False,
    state: Optional[SinglePhotonState] = None,
) -> DetectorProbabilities:
    """Probabilities of each detector firing in one heralded window.

    Without loss monitoring the lost photons never produce a coincidence and
    the result is conditioned on detection (fair sampling), so it does not
    depend on ``loss_rate``.  With monitoring the photon branch is scaled by
    ``1 - loss_rate`` and D5 takes the rest.  For more than three modes D4
    collects every output mode beyond the second.
    """
    ctx = context if isinstance(context, MeasurementContext) else MeasurementContext(int(context))
    if not 0.0 <= loss_rate <= 1.0:
        raise ValueError(f"loss_rate must lie in [0, 1], got {loss_rate}")
    if state is None:
        state = make_single_photon(1, family.mode_count)
    c = state.normalized().amplitudes
    first, second = _stage_transfers(family, ctx.j)
    inner = c @ first
    q1 = abs(inner[0]) ** 2
    inner = inner.copy()
    inner[0] = 0.0
    out = np.abs(inner @ second) ** 2
    photon = np.array([q1, out[0], out[1], out[2:].sum()])
    if monitor_loss:
        q = np.append((1.0 - loss_rate) * photon, loss_rate)
    else:
        if loss_rate >= 1.0:
            raise NoCoincidences("every photon is lost; nothing to condition on")
        q = photon
    q = q / q.sum()
    return DetectorProbabilities(ctx.j, tuple(float(x) for x in q))


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(key))))


@dataclass(frozen=True)
class ContextCounts:
    """Detector counts of every repetition for one context, shape ``(repetitions, detectors)``."""

    context: int
    samples: np.ndarray = field(repr=False)

    @property
    def repetitions(self) -> int:
        return self.samples.shape[0]

    @property
    def counts(self) -> np.ndarray:
        """Mean counts per window, C1..C4 (and C5 if monitored)."""
        return self.samples.mean(axis=0)

    @property
    def counts_sigma(self) -> np.ndarray:
        return self.samples.std(axis=0, ddof=1) if self.repetitions > 1 else np.zeros(self.samples.shape[1])

    def per_repetition_probabilities(self) -> np.ndarray:
        totals = self.samples.sum(axis=1, keepdims=True)
        if np.any(totals == 0):
            raise NoCoincidences(f"context {self.context}: a repetition recorded no events")
        return self.samples / totals

    @property
    def probabilities(self) -> np.ndarray:
        """Mean of the per-repetition ``P_i = C_i / sum_k C_k``."""
        return self.per_repetition_probabilities().mean(axis=0)

    @property
    def probabilities_sigma(self) -> np.ndarray:
        """Standard deviation of the mean of ``P_i`` over repetitions.

        With a single repetition the multinomial estimate
        ``sqrt(P (1 - P) / N)`` is used instead.
        """
        p = self.per_repetition_probabilities()
        if self.repetitions > 1:
            return p.std(axis=0, ddof=1) / math.sqrt(self.repetitions)
        n = self.samples.sum()
        return np.sqrt(p[0] * (1.0 - p[0]) / n)

    def to_json(self) -> dict:
        return {
            "context": self.context,
            "counts": self.counts.tolist(),
            "counts_sigma": self.counts_sigma.tolist(),
            "probabilities": self.probabilities.tolist(),
            "probabilities_sigma": self.probabilities_sigma.tolist(),
        }


def sample_context(
    config: ShotConfig,
    context: MeasurementContext | int,
    family: KcbsMeasurementFamily,
    stream_key: tuple[int, ...] = (),
) -> ContextCounts:
    """Multinomial detector counts for ``config.repetitions`` windows of ``shots_per_context``."""
    ctx = context if isinstance(context, MeasurementContext) else MeasurementContext(int(context))
    probs = detector_probabilities(ctx, family, config.loss_rate, config.monitor_loss).q
    samples = np.stack(
        [
            substream(config.seed, *stream_key, ctx.j, r).multinomial(config.shots_per_context, probs)
            for r in range(config.repetitions)
        ]
    )
    return ContextCounts(ctx.j, samples)


def sample_experiment(
    config: ShotConfig, family: KcbsMeasurementFamily, stream_key: tuple[int, ...] = ()
) -> tuple[ContextCounts, ...]:
    return tuple(sample_context(config, ctx, family, stream_key) for ctx in MeasurementContext.all())


def estimate_s(counts: Sequence[ContextCounts]) -> tuple[float, float]:
    """``S = sum_j P2^(j)`` with the context uncertainties added in quadrature."""
    if len(counts) != N_OBSERVABLES:
        raise ValueError(f"need counts for all five contexts, got {len(counts)}")
    s_hat = sum(float(c.probabilities[1]) for c in counts)
    sigma = math.sqrt(sum(float(c.probabilities_sigma[1]) ** 2 for c in counts))
    return s_hat, sigma


@dataclass(frozen=True)
class SweepPoint:
    loss_rate: float
    s_ideal: float
    s_sampled: float
    sigma: float

    def row(self) -> list[float]:
        return [self.loss_rate, self.s_ideal, self.s_sampled, self.sigma]


SWEEP_HEADER = ["loss_rate", "s_ideal", "s_sampled", "sigma"]


def loss_sweep(grid: Sequence[float], config: ShotConfig, family: KcbsMeasurementFamily) -> list[SweepPoint]:
    """S against the vacuum fraction of the input, with the loss channel monitored."""
    s_photon = evaluate(family, make_single_photon(1, family.mode_count)).s_value
    points = []
    for i, loss in enumerate(grid):
        if not 0.0 <= loss <= 1.0:
            raise ValueError(f"loss rates must lie in [0, 1], got {loss}")
        cfg = ShotConfig(config.shots_per_context, config.repetitions, config.seed, float(loss), True)
        s_hat, sigma = estimate_s(sample_experiment(cfg, family, stream_key=(i,)))
        points.append(SweepPoint(float(loss), (1.0 - loss) * s_photon, s_hat, sigma))
    return points


COUNTS_HEADER = (
    ["context"]
    + [f"C{i}" for i in range(1, 5)]
    + [f"C{i}_sigma" for i in range(1, 5)]
    + [f"P{i}" for i in range(1, 5)]
    + [f"P{i}_sigma" for i in range(1, 5)]
)


def counts_rows(counts: Sequence[ContextCounts]) -> list[list]:
    rows = []
    for c in counts:
        ctx = MeasurementContext(c.context)
        rows.append(
            [f"A{ctx.first}A{ctx.second}"]
            + c.counts[:4].tolist()
            + c.counts_sigma[:4].tolist()
            + c.probabilities[:4].tolist()
            + c.probabilities_sigma[:4].tolist()
        )
    return rows
