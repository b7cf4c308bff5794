"""Quantum states handled by the simulator.

All amplitude vectors are *row* vectors: a network with transfer matrix ``U``
maps single-photon amplitudes ``c`` to ``c @ U`` and coherent displacements
``mu`` to ``mu @ U``.

States are kept unnormalized internally.  The squared norm of a
:class:`SinglePhotonState` (or ``exp(2 * log_weight)`` of an
:class:`UnnormalizedCoherent`) is the probability of the measurement record
that produced it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import poisson

from kcbs_optics.tolerances import PHYSICS_TOL, PROBABILITY_TOL

MIN_MODES = 3
DEFAULT_TRUNCATION = 20


class InvalidState(ValueError):
    """Raised when a state violates its invariants."""


def _check_mode_count(mode_count: int) -> None:
    if int(mode_count) != mode_count or mode_count < MIN_MODES:
        raise InvalidState(f"mode_count must be an integer >= {MIN_MODES}, got {mode_count}")


def _complex_pairs(vector: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in vector]


def _from_pairs(pairs: Sequence[Sequence[float]]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


def _frozen(vector: np.ndarray) -> np.ndarray:
    vector = np.array(vector, dtype=complex)
    vector.setflags(write=False)
    return vector


@dataclass(frozen=True, eq=False)
class SinglePhotonState:
    """One photon spread over ``mode_count`` modes, amplitudes ``c_1 .. c_M``."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes)
        if amps.ndim != 1:
            raise InvalidState("amplitudes must be a one-dimensional vector")
        _check_mode_count(amps.size)
        amps = _frozen(amps)
        total = float(np.vdot(amps, amps).real)
        if total > 1.0 + PHYSICS_TOL:
            raise InvalidState(f"squared norm {total} exceeds 1")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def mode_count(self) -> int:
        return self.amplitudes.size

    def norm_squared(self) -> float:
        return norm_squared(self)

    def normalized(self) -> SinglePhotonState:
        n2 = self.norm_squared()
        if n2 <= 0.0:
            raise InvalidState("cannot normalize a zero-norm state")
        return SinglePhotonState(self.amplitudes / np.sqrt(n2))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SinglePhotonState):
            return NotImplemented
        return self.mode_count == other.mode_count and np.allclose(
            self.amplitudes, other.amplitudes, atol=PHYSICS_TOL, rtol=0.0
        )

    def to_json(self) -> dict:
        return {"amplitudes": _complex_pairs(self.amplitudes)}

    @classmethod
    def from_json(cls, data: dict) -> SinglePhotonState:
        return cls(_from_pairs(data["amplitudes"]))


@dataclass(frozen=True, eq=False)
class UnnormalizedCoherent:
    """Multimode coherent state ``exp(log_weight) |mu_1, ..., mu_M>``.

    ``exp(2 * log_weight)`` is the probability of the no-click record that
    led here; a freshly prepared state has ``log_weight == 0``.
    """

    displacements: np.ndarray
    log_weight: float = 0.0

    def __post_init__(self) -> None:
        disp = np.asarray(self.displacements)
        if disp.ndim != 1:
            raise InvalidState("displacements must be a one-dimensional vector")
        _check_mode_count(disp.size)
        if self.log_weight > PHYSICS_TOL:
            raise InvalidState(f"log_weight must be <= 0, got {self.log_weight}")
        object.__setattr__(self, "displacements", _frozen(disp))
        object.__setattr__(self, "log_weight", float(self.log_weight))

    @property
    def mode_count(self) -> int:
        return self.displacements.size

    @property
    def probability(self) -> float:
        return float(np.exp(2.0 * self.log_weight))

    @property
    def mean_photon_number(self) -> float:
        return float(np.vdot(self.displacements, self.displacements).real)

    def overlap(self, other: UnnormalizedCoherent) -> complex:
        """Inner product ``<self|other>`` including both weights."""
        mu, nu = self.displacements, other.displacements
        exponent = (
            self.log_weight
            + other.log_weight
            - 0.5 * np.vdot(mu, mu).real
            - 0.5 * np.vdot(nu, nu).real
            + np.vdot(mu, nu)
        )
        return complex(np.exp(exponent))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UnnormalizedCoherent):
            return NotImplemented
        return (
            self.mode_count == other.mode_count
            and np.allclose(self.displacements, other.displacements, atol=PHYSICS_TOL, rtol=0.0)
            and abs(self.log_weight - other.log_weight) < PHYSICS_TOL
        )

    def to_json(self) -> dict:
        return {"displacements": _complex_pairs(self.displacements), "log_weight": self.log_weight}

    @classmethod
    def from_json(cls, data: dict) -> UnnormalizedCoherent:
        return cls(_from_pairs(data["displacements"]), float(data.get("log_weight", 0.0)))


@dataclass(frozen=True, eq=False)
class PhotonNumberMixture:
    """Single-mode state diagonal in the Fock basis, populations ``rho_00 .. rho_NN``."""

    populations: np.ndarray = field()

    def __post_init__(self) -> None:
        pops = np.array(self.populations, dtype=float)
        if pops.ndim != 1 or pops.size == 0:
            raise InvalidState("populations must be a non-empty vector")
        if np.any(pops < 0.0):
            raise InvalidState("populations must be non-negative")
        if abs(pops.sum() - 1.0) > PROBABILITY_TOL:
            raise InvalidState(f"populations sum to {float(pops.sum())!r}, expected 1")
        pops.setflags(write=False)
        object.__setattr__(self, "populations", pops)

    @property
    def truncation(self) -> int:
        return self.populations.size - 1

    @classmethod
    def from_dict(cls, populations: dict[int, float]) -> PhotonNumberMixture:
        """Build from a sparse ``{n: rho_nn}`` mapping."""
        size = max(populations) + 1
        pops = np.zeros(size)
        for n, p in populations.items():
            if n < 0:
                raise InvalidState(f"photon number must be >= 0, got {n}")
            pops[n] = p
        return cls(pops)

    @classmethod
    def poissonian(cls, mean: float, truncation: int = DEFAULT_TRUNCATION) -> PhotonNumberMixture:
        """Photon-number distribution of a coherent state, truncated at ``truncation``.

        The tail beyond the truncation is dropped; the remaining populations
        must still sum to one within the probability tolerance.
        """
        if mean < 0:
            raise InvalidState(f"mean photon number must be >= 0, got {mean}")
        n = np.arange(truncation + 1)
        return cls(poisson.pmf(n, mean))

    @classmethod
    def lossy_single_photon(cls, loss_rate: float) -> PhotonNumberMixture:
        if not 0.0 <= loss_rate <= 1.0:
            raise InvalidState(f"loss_rate must lie in [0, 1], got {loss_rate}")
        return cls(np.array([loss_rate, 1.0 - loss_rate]))

    def to_json(self) -> dict:
        return {"populations": [float(p) for p in self.populations]}

    @classmethod
    def from_json(cls, data: dict) -> PhotonNumberMixture:
        return cls(np.array(data["populations"], dtype=float))


def make_single_photon(mode: int, mode_count: int) -> SinglePhotonState:
    """Photon in ``mode`` (1-based) of ``mode_count`` modes."""
    _check_mode_count(mode_count)
    if not 1 <= mode <= mode_count:
        raise InvalidState(f"mode must lie in 1..{mode_count}, got {mode}")
    amps = np.zeros(mode_count, dtype=complex)
    amps[mode - 1] = 1.0
    return SinglePhotonState(amps)


def norm_squared(state: SinglePhotonState) -> float:
    return float(np.vdot(state.amplitudes, state.amplitudes).real)


def make_coherent(alpha: complex, mode_count: int) -> UnnormalizedCoherent:
    """Coherent amplitude ``alpha`` in mode 1, vacuum elsewhere."""
    _check_mode_count(mode_count)
    disp = np.zeros(mode_count, dtype=complex)
    disp[0] = alpha
    return UnnormalizedCoherent(disp, 0.0)


def vacuum(mode_count: int) -> UnnormalizedCoherent:
    return make_coherent(0.0, mode_count)


def state_from_json(data: dict) -> SinglePhotonState | UnnormalizedCoherent | PhotonNumberMixture:
    """Dispatch on the JSON keys to the matching state type."""
    if "amplitudes" in data:
        return SinglePhotonState.from_json(data)
    if "displacements" in data:
        return UnnormalizedCoherent.from_json(data)
    if "populations" in data:
        return PhotonNumberMixture.from_json(data)
    raise InvalidState(f"unrecognised state record with keys {sorted(data)}")
