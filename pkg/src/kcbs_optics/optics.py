"""Lossless linear-optical networks.

Transfer matrices act on row vectors of mode amplitudes, ``c -> c @ U``, so
that a photon entering mode 1 leaves in the superposition given by the first
row of ``U``.  Mode indices in the public API are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from kcbs_optics.states import MIN_MODES, SinglePhotonState, UnnormalizedCoherent
from kcbs_optics.tolerances import PHYSICS_TOL, UNITARITY_TOL

N_OBSERVABLES = 5

OPTIMAL_COS_THETA = 5.0 ** -0.25
OPTIMAL_THETA = math.acos(OPTIMAL_COS_THETA)


class NotUnitaryError(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Unitary ``M x M`` transfer matrix of a passive network."""

    entries: np.ndarray
    tolerance: float = UNITARITY_TOL

    def __post_init__(self) -> None:
        u = np.array(self.entries, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise DimensionMismatch(f"transfer matrix must be square, got shape {u.shape}")
        deviation = unitarity_error(u)
        if deviation > self.tolerance:
            raise NotUnitaryError(f"U^dagger U deviates from identity by {deviation:.3e}")
        u.setflags(write=False)
        object.__setattr__(self, "entries", u)

    @property
    def mode_count(self) -> int:
        return self.entries.shape[0]

    @property
    def first_row(self) -> np.ndarray:
        return self.entries[0]

    @property
    def dagger(self) -> TransferMatrix:
        return TransferMatrix(self.entries.conj().T, self.tolerance)

    def __matmul__(self, other: TransferMatrix) -> TransferMatrix:
        if not isinstance(other, TransferMatrix):
            return NotImplemented
        if other.mode_count != self.mode_count:
            raise DimensionMismatch("cannot compose networks with different mode counts")
        return TransferMatrix(self.entries @ other.entries, max(self.tolerance, other.tolerance))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransferMatrix):
            return NotImplemented
        return self.entries.shape == other.entries.shape and np.allclose(
            self.entries, other.entries, atol=PHYSICS_TOL, rtol=0.0
        )

    def to_json(self) -> list:
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.entries]

    @classmethod
    def from_json(cls, data: list) -> TransferMatrix:
        return cls(np.array([[complex(re, im) for re, im in row] for row in data]))


def unitarity_error(u: np.ndarray) -> float:
    """Largest entry of ``|U^dagger U - I|``."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def identity(mode_count: int) -> TransferMatrix:
    return TransferMatrix(np.eye(mode_count, dtype=complex))


def _rotation(omega: float) -> np.ndarray:
    c, s = math.cos(omega), math.sin(omega)
    return np.array([[c, s], [-s, c]])


def beam_splitter(omega: float, j: int, k: int, mode_count: int) -> TransferMatrix:
    """Real beam splitter on modes ``j < k``; ``cos(omega)`` is the j -> j transmissivity."""
    if mode_count < 2:
        raise ValueError(f"mode_count must be >= 2, got {mode_count}")
    if not 1 <= j < k <= mode_count:
        raise ValueError(f"need 1 <= j < k <= {mode_count}, got j={j}, k={k}")
    u = np.eye(mode_count, dtype=complex)
    idx = np.array([j - 1, k - 1])
    u[np.ix_(idx, idx)] = _rotation(omega)
    return TransferMatrix(u)


def kcbs_unitary(j: int, theta: float, phi_j: float) -> TransferMatrix:
    """Three-mode network of two beam splitters whose first row is the KCBS vector.

    ``j`` only labels the observable; the matrix depends on ``theta`` and ``phi_j``.
    """
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi_j), math.sin(phi_j)
    return TransferMatrix(
        np.array(
            [
                [ct, st * cp, st * sp],
                [-st, ct * cp, ct * sp],
                [0.0, -sp, cp],
            ],
            dtype=complex,
        )
    )


def complete_unitary(first_row: Sequence[complex]) -> TransferMatrix:
    """Unitary whose first row is ``first_row``, remaining rows by Gram-Schmidt.

    Candidate rows are the standard basis vectors ``e_1, e_2, ...`` taken in
    order; any that are (numerically) dependent on the rows already kept are
    skipped, so the completion is deterministic.
    """
    row = np.asarray(first_row, dtype=complex)
    norm = np.linalg.norm(row)
    if abs(norm - 1.0) > UNITARITY_TOL:
        raise NotUnitaryError(f"first row must have unit norm, got {norm}")
    rows = [row]
    m = row.size
    for n in range(m):
        if len(rows) == m:
            break
        v = np.zeros(m, dtype=complex)
        v[n] = 1.0
        for r in rows:
            v = v - np.vdot(r, v) * r
        for r in rows:  # second pass for numerical orthogonality
            v = v - np.vdot(r, v) * r
        vn = np.linalg.norm(v)
        if vn > 1e-8:
            rows.append(v / vn)
    return TransferMatrix(np.array(rows))


@dataclass(frozen=True, eq=False)
class KcbsMeasurementFamily:
    """Five networks ``U^(1) .. U^(5)`` defining the KCBS observables.

    Observable ``j`` clicks (outcome -1) on the state given by the first row
    of ``unitaries[j - 1]``.
    """

    unitaries: tuple[TransferMatrix, ...]
    theta: float
    phis: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.unitaries) != N_OBSERVABLES or len(self.phis) != N_OBSERVABLES:
            raise ValueError("a KCBS family needs exactly five networks")
        sizes = {u.mode_count for u in self.unitaries}
        if len(sizes) != 1:
            raise DimensionMismatch("all networks in a family must share the mode count")
        object.__setattr__(self, "unitaries", tuple(self.unitaries))
        object.__setattr__(self, "phis", tuple(float(p) for p in self.phis))

    @property
    def mode_count(self) -> int:
        return self.unitaries[0].mode_count

    def unitary(self, j: int) -> TransferMatrix:
        """Network for observable ``j`` in 1..5, cyclic (``j = 6`` is ``j = 1``)."""
        return self.unitaries[(j - 1) % N_OBSERVABLES]

    def phi(self, j: int) -> float:
        return self.phis[(j - 1) % N_OBSERVABLES]

    def projector_vectors(self) -> np.ndarray:
        """Rows are the click states ``psi^(j)``."""
        return np.array([u.first_row for u in self.unitaries])

    def adjacent_overlaps(self) -> np.ndarray:
        """``<psi^(j)|psi^(j+1)>`` for j = 1..5."""
        vecs = self.projector_vectors()
        return np.array([np.vdot(vecs[i], vecs[(i + 1) % N_OBSERVABLES]) for i in range(N_OBSERVABLES)])

    def is_orthogonal_cycle(self, tol: float = PHYSICS_TOL) -> bool:
        return bool(np.all(np.abs(self.adjacent_overlaps()) < tol))

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "phis": list(self.phis),
            "unitaries": [u.to_json() for u in self.unitaries],
        }


def optimal_phis() -> tuple[float, ...]:
    return tuple(4.0 * math.pi * j / 5.0 for j in range(1, N_OBSERVABLES + 1))


def kcbs_family(theta: float, phis: Sequence[float], mode_count: int = MIN_MODES) -> KcbsMeasurementFamily:
    """Family with first rows ``(cos t, sin t cos phi_j, sin t sin phi_j, 0, ...)``.

    For three modes the two-beam-splitter networks are used; for more modes
    the first row is zero-padded and completed by :func:`complete_unitary`.
    """
    if mode_count < MIN_MODES:
        raise ValueError(f"mode_count must be >= {MIN_MODES}")
    if mode_count == MIN_MODES:
        unitaries = tuple(kcbs_unitary(j, theta, p) for j, p in enumerate(phis, start=1))
    else:
        unitaries = []
        for p in phis:
            row = np.zeros(mode_count, dtype=complex)
            row[:3] = kcbs_unitary(0, theta, p).first_row
            unitaries.append(complete_unitary(row))
        unitaries = tuple(unitaries)
    return KcbsMeasurementFamily(unitaries, float(theta), tuple(phis))


def optimal_family(mode_count: int = MIN_MODES) -> KcbsMeasurementFamily:
    return kcbs_family(OPTIMAL_THETA, optimal_phis(), mode_count)


def apply_single_photon(u: TransferMatrix, state: SinglePhotonState) -> SinglePhotonState:
    if u.mode_count != state.mode_count:
        raise DimensionMismatch(f"network has {u.mode_count} modes, state has {state.mode_count}")
    return SinglePhotonState(state.amplitudes @ u.entries)


def apply_coherent(u: TransferMatrix, state: UnnormalizedCoherent) -> UnnormalizedCoherent:
    if u.mode_count != state.mode_count:
        raise DimensionMismatch(f"network has {u.mode_count} modes, state has {state.mode_count}")
    return UnnormalizedCoherent(state.displacements @ u.entries, state.log_weight)


def apply(u: TransferMatrix, state):
    if isinstance(state, SinglePhotonState):
        return apply_single_photon(u, state)
    if isinstance(state, UnnormalizedCoherent):
        return apply_coherent(u, state)
    raise TypeError(f"unsupported state type {type(state).__name__}")


# -- wave-plate bench ---------------------------------------------------------


def hwp_pair(theta1: float, theta2: float) -> np.ndarray:
    """Jones matrix of two cascaded half-wave plates at angles ``theta1`` then ``theta2``.

    The pair is a rotation by ``2 (theta1 - theta2)`` acting on column vectors.
    """
    return _rotation(2.0 * (theta1 - theta2))


def _wrap_half_turn(angle: float) -> float:
    """Reduce a wave-plate angle difference into ``(-pi/2, pi/2]``; the pair has period pi."""
    wrapped = math.remainder(angle, math.pi)
    if wrapped <= -math.pi / 2:
        wrapped += math.pi
    return wrapped


def _embed(block: np.ndarray, j: int, k: int, mode_count: int) -> np.ndarray:
    u = np.eye(mode_count)
    idx = np.array([j - 1, k - 1])
    u[np.ix_(idx, idx)] = block
    return u


@dataclass(frozen=True)
class BenchSetting:
    """Wave-plate angle differences for one measurement context.

    ``elements`` lists ``(angle_difference, (j, k))`` in the order light meets
    them.  The first two form the network in front of detector D1; the last
    three form the network between D1 and the output detectors D2..D4.
    """

    context: int
    elements: tuple[tuple[float, tuple[int, int]], ...]
    verified: bool

    @property
    def angle_differences(self) -> tuple[float, ...]:
        return tuple(a for a, _ in self.elements)

    def stage_matrix(self, stage: int) -> np.ndarray:
        """Column-vector Jones matrix of stage 1 (two pairs) or stage 2 (three pairs)."""
        parts = self.elements[:2] if stage == 1 else self.elements[2:]
        total = np.eye(MIN_MODES)
        for angle, (j, k) in parts:
            total = _embed(hwp_pair(angle, 0.0), j, k, MIN_MODES) @ total
        return total

    def stage_transfer(self, stage: int) -> TransferMatrix:
        """Row-vector transfer matrix of a stage (transpose of the Jones matrix)."""
        return TransferMatrix(self.stage_matrix(stage).T.astype(complex))

    def to_json(self) -> dict:
        names = ["first_bs", "second_bs", "third_bs", "lower_path_rotation", "final_bs"]
        return {
            "context": self.context,
            "verified": self.verified,
            "settings": [
                {
                    "element": name,
                    "modes": list(modes),
                    "radians": angle,
                    "degrees": math.degrees(angle),
                }
                for name, (angle, modes) in zip(names, self.elements)
            ],
        }


def bench_compile(j: int, family: KcbsMeasurementFamily, tol: float = PHYSICS_TOL) -> BenchSetting:
    """Wave-plate settings realising context ``(j, j+1)`` on the three-mode bench.

    Stage 1 (pairs at ``phi_j/2`` on modes 2,3 then ``theta/2`` on modes 1,2)
    has Jones matrix ``U^(j)``, i.e. row-vector transfer ``U^(j)^dagger``.
    Stage 2 (``-theta/2``, ``(phi_{j+1} - phi_j)/2`` on modes 2,3, ``theta/2``)
    has row-vector transfer ``U^(j) U^(j+1)^dagger``.  ``verified`` records
    whether both identities hold within ``tol``.
    """
    if not 1 <= j <= N_OBSERVABLES:
        raise ValueError(f"context index must lie in 1..5, got {j}")
    if family.mode_count != MIN_MODES:
        raise DimensionMismatch("the wave-plate bench realises three-mode families only")
    theta = family.theta
    phi_j, phi_next = family.phi(j), family.phi(j + 1)
    elements = (
        (_wrap_half_turn(phi_j / 2.0), (2, 3)),
        (_wrap_half_turn(theta / 2.0), (1, 2)),
        (_wrap_half_turn(-theta / 2.0), (1, 2)),
        (_wrap_half_turn((phi_next - phi_j) / 2.0), (2, 3)),
        (_wrap_half_turn(theta / 2.0), (1, 2)),
    )
    setting = BenchSetting(j, elements, False)
    u_j = family.unitary(j).entries
    u_next = family.unitary(j + 1).entries
    ok1 = np.allclose(setting.stage_matrix(1), u_j, atol=tol, rtol=0.0)
    ok2 = np.allclose(setting.stage_matrix(2).T, u_j @ u_next.conj().T, atol=tol, rtol=0.0)
    return BenchSetting(j, elements, bool(ok1 and ok2))
