import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_photon, random_unitary
from kcbs_optics.optics import (
    DimensionMismatch,
    NotUnitaryError,
    OPTIMAL_THETA,
    TransferMatrix,
    apply_coherent,
    apply_single_photon,
    beam_splitter,
    bench_compile,
    complete_unitary,
    hwp_pair,
    identity,
    kcbs_family,
    kcbs_unitary,
    optimal_family,
    unitarity_error,
)
from kcbs_optics.states import UnnormalizedCoherent, make_coherent, make_single_photon, norm_squared

angles = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi, allow_nan=False)


def matmul3(a, b):
    """Textbook triple loop; independent of numpy's matmul."""
    return [[sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


def test_beam_splitter_zero_is_identity():
    np.testing.assert_array_equal(beam_splitter(0.0, 1, 2, 3).entries, np.eye(3))


def test_beam_splitter_quarter_turn_swaps_with_sign():
    u = beam_splitter(math.pi / 2, 1, 2, 3).entries
    np.testing.assert_allclose(u, [[0, 1, 0], [-1, 0, 0], [0, 0, 1]], atol=1e-15)


def test_balanced_beam_splitter():
    h = 1 / math.sqrt(2)
    np.testing.assert_allclose(beam_splitter(math.pi / 4, 1, 2, 2).entries, [[h, h], [-h, h]], atol=1e-15)


@pytest.mark.parametrize("j, k", [(2, 1), (1, 1), (0, 2), (1, 4)])
def test_beam_splitter_bad_indices(j, k):
    with pytest.raises(ValueError):
        beam_splitter(0.3, j, k, 3)


def test_non_unitary_rejected():
    with pytest.raises(NotUnitaryError):
        TransferMatrix(np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_kcbs_unitary_zero_angles_is_identity():
    np.testing.assert_allclose(kcbs_unitary(3, 0.0, 0.0).entries, np.eye(3), atol=1e-15)


def test_optimal_u11():
    u = kcbs_unitary(1, math.acos(5 ** -0.25), 4 * math.pi / 5)
    assert u.entries[0, 0].real == pytest.approx(0.668740304976422, abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(theta=angles, phi=angles)
def test_kcbs_unitary_is_two_beam_splitters(theta, phi):
    bs_theta = beam_splitter(theta, 1, 2, 3).entries.real.tolist()
    bs_phi = beam_splitter(phi, 2, 3, 3).entries.real.tolist()
    expected = np.array(matmul3(bs_theta, bs_phi))
    got = kcbs_unitary(1, theta, phi).entries
    assert np.max(np.abs(got - expected)) < 1e-12
    assert unitarity_error(got) < 1e-10


def test_optimal_family_cyclic_orthogonality(family):
    assert np.all(np.abs(family.adjacent_overlaps()) < 1e-10)


def test_optimal_family_overlap_with_mode_one(family):
    e1 = make_single_photon(1, 3).amplitudes
    for row in family.projector_vectors():
        assert abs(np.vdot(row, e1)) == pytest.approx(5 ** -0.25, abs=1e-12)


def test_optimal_family_non_adjacent_not_orthogonal(family):
    # <psi_i|psi_j> = cos^2 t + sin^2 t cos(phi_i - phi_j)
    t = OPTIMAL_THETA
    vecs = family.projector_vectors()
    for i, j in [(1, 3), (2, 4), (1, 4)]:
        expected = math.cos(t) ** 2 + math.sin(t) ** 2 * math.cos(4 * math.pi * (i - j) / 5)
        got = np.vdot(vecs[i - 1], vecs[j - 1]).real
        assert got == pytest.approx(expected, abs=1e-12)
        assert abs(got) > 0.6


def test_apply_identity_and_first_row(family):
    e1 = make_single_photon(1, 3)
    assert apply_single_photon(identity(3), e1) == e1
    out = apply_single_photon(family.unitary(1), e1)
    np.testing.assert_allclose(out.amplitudes, family.unitary(1).entries[0], atol=1e-15)


def test_apply_dimension_mismatch(family):
    with pytest.raises(DimensionMismatch):
        apply_single_photon(family.unitary(1), make_single_photon(1, 4))
    with pytest.raises(DimensionMismatch):
        apply_coherent(identity(4), make_coherent(1.0, 3))


def test_unitary_preserves_norm(rng):
    for _ in range(200):
        u = TransferMatrix(random_unitary(rng))
        s = random_photon(rng)
        assert norm_squared(apply_single_photon(u, s)) == pytest.approx(norm_squared(s), abs=1e-12)


def test_coherent_through_dagger(family):
    alpha = 0.9 + 0.4j
    u = family.unitary(1)
    out = apply_coherent(u.dagger, make_coherent(alpha, 3))
    col = [u.entries[n][0] for n in range(3)]
    expected = [alpha * complex(z).conjugate() for z in col]
    np.testing.assert_allclose(out.displacements, expected, atol=1e-14)
    assert out.log_weight == 0.0


def test_coherent_photon_number_invariant(rng):
    for _ in range(100):
        u = TransferMatrix(random_unitary(rng))
        mu = rng.normal(size=3) + 1j * rng.normal(size=3)
        c = UnnormalizedCoherent(mu, -0.3)
        out = apply_coherent(u, c)
        assert out.mean_photon_number == pytest.approx(c.mean_photon_number, rel=1e-12)
        assert out.log_weight == -0.3


def test_transfer_matrix_json_roundtrip(family):
    u = family.unitary(2)
    assert TransferMatrix.from_json(json.loads(json.dumps(u.to_json()))) == u


def test_complete_unitary_keeps_first_row(rng):
    for modes in (3, 4, 6):
        row = rng.normal(size=modes) + 1j * rng.normal(size=modes)
        row /= np.linalg.norm(row)
        u = complete_unitary(row)
        np.testing.assert_allclose(u.entries[0], row, atol=1e-14)
        assert unitarity_error(u.entries) < 1e-10


def test_complete_unitary_is_deterministic():
    row = np.array([0.6, 0.8, 0.0, 0.0])
    assert complete_unitary(row) == complete_unitary(row)


@pytest.mark.parametrize("modes", [4, 5, 7])
def test_larger_family_keeps_kcbs_geometry(modes):
    fam = optimal_family(modes)
    assert fam.mode_count == modes
    assert fam.is_orthogonal_cycle()
    for row in fam.projector_vectors():
        assert abs(row[0]) == pytest.approx(5 ** -0.25, abs=1e-12)


def test_hwp_pair_equal_angles_is_identity():
    np.testing.assert_allclose(hwp_pair(0.37, 0.37), np.eye(2), atol=1e-15)


@pytest.mark.parametrize("j", range(1, 6))
def test_hwp_pair_realises_beam_splitter(family, j):
    phi = family.phi(j)
    block = beam_splitter(phi, 1, 2, 2).entries.real
    np.testing.assert_allclose(hwp_pair(phi / 2, 0.0), block, atol=1e-14)


@pytest.mark.parametrize("j", range(1, 6))
def test_hwp_pair_lower_path_rotation(family, j):
    d = family.phi(j + 1) - family.phi(j)
    expected = [[math.cos(d), math.sin(d)], [-math.sin(d), math.cos(d)]]
    np.testing.assert_allclose(hwp_pair(d / 2, 0.0), expected, atol=1e-14)


def test_bench_compile_first_context_angles(family):
    setting = bench_compile(1, family)
    assert setting.angle_differences[0] == pytest.approx(2 * math.pi / 5)
    assert setting.angle_differences[1] == pytest.approx(OPTIMAL_THETA / 2)
    assert setting.angle_differences[2] == pytest.approx(-OPTIMAL_THETA / 2)


@pytest.mark.parametrize("j", range(1, 6))
def test_bench_compile_reproduces_networks(family, j):
    setting = bench_compile(j, family)
    assert setting.verified
    assert setting.angle_differences[3] == pytest.approx(2 * math.pi / 5, abs=1e-12)
    u_j = family.unitary(j).entries.real.tolist()
    assert np.max(np.abs(setting.stage_matrix(1) - np.array(u_j))) < 1e-10
    # stage 2 in row-vector form is U^(j) U^(j+1)^T for the real family
    u_next_t = family.unitary(j + 1).entries.real.T.tolist()
    assert np.max(np.abs(setting.stage_transfer(2).entries - np.array(matmul3(u_j, u_next_t)))) < 1e-10


def test_bench_compile_json_reports_degrees(family):
    data = bench_compile(1, family).to_json()
    first = data["settings"][0]
    assert first["degrees"] == pytest.approx(72.0)
    assert len(data["settings"]) == 5


def test_bench_compile_rejects_bad_context(family):
    with pytest.raises(ValueError):
        bench_compile(6, family)


def test_bench_compile_general_angles():
    # the wiring identities do not depend on the optimal angles
    fam = kcbs_family(0.4, [0.1, 0.2, 0.3, 0.4, 0.5])
    assert bench_compile(2, fam).verified
