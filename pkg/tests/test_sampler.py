import math

import numpy as np
import pytest

from kcbs_optics.sampler import (
    COUNTS_HEADER,
    ContextCounts,
    NoCoincidences,
    ShotConfig,
    counts_rows,
    detector_probabilities,
    estimate_s,
    loss_sweep,
    sample_context,
    sample_experiment,
)
from kcbs_optics.optics import optimal_family
from kcbs_optics.states import SinglePhotonState

SQRT5 = math.sqrt(5)
# D3 and D4 shares of the +1,+1 branch, from the stage-two output amplitudes
Q3 = 0.020163
Q4 = 0.085410


@pytest.mark.parametrize("j", range(1, 6))
def test_lossless_detector_probabilities(family, j):
    q = detector_probabilities(j, family)
    assert q.q1 == pytest.approx(1 / SQRT5, abs=1e-12)
    assert q.q2 == pytest.approx(1 / SQRT5, abs=1e-12)
    assert q.q3 + q.q4 == pytest.approx(1 - 2 / SQRT5, abs=1e-12)
    assert q.q3 == pytest.approx(Q3, abs=1e-6)
    assert q.q4 == pytest.approx(Q4, abs=1e-6)
    assert q.q_lost == 0.0


def test_fair_sampling_ignores_loss(family):
    a = detector_probabilities(2, family, loss_rate=0.0).q
    b = detector_probabilities(2, family, loss_rate=0.6).q
    np.testing.assert_allclose(a, b, atol=1e-15)


def test_monitored_loss_scales_photon_branch(family):
    q = detector_probabilities(3, family, loss_rate=0.25, monitor_loss=True)
    assert q.q_lost == pytest.approx(0.25)
    assert q.q2 == pytest.approx(0.75 / SQRT5, abs=1e-12)
    assert sum(q.q) == pytest.approx(1.0, abs=1e-12)


def test_total_loss_without_monitor_has_no_coincidences(family):
    with pytest.raises(NoCoincidences):
        detector_probabilities(1, family, loss_rate=1.0)
    with pytest.raises(NoCoincidences):
        sample_context(ShotConfig(100, 2, seed=1, loss_rate=1.0), 1, family)


def test_total_loss_with_monitor(family):
    counts = sample_context(ShotConfig(100, 3, seed=1, loss_rate=1.0, monitor_loss=True), 1, family)
    np.testing.assert_array_equal(counts.counts, [0, 0, 0, 0, 100])


def test_detector_probabilities_for_other_inputs(family):
    q = detector_probabilities(1, family, state=SinglePhotonState(family.unitary(1).first_row))
    assert q.q1 == pytest.approx(1.0)


def test_larger_family_probabilities():
    fam = optimal_family(5)
    q = detector_probabilities(4, fam)
    assert q.q1 == pytest.approx(1 / SQRT5, abs=1e-12)
    assert q.q2 == pytest.approx(1 / SQRT5, abs=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [dict(shots_per_context=0), dict(repetitions=0), dict(loss_rate=1.5), dict(seed=-1)],
)
def test_shot_config_validation(kwargs):
    with pytest.raises(ValueError):
        ShotConfig(**kwargs)


def test_seed_determinism(family):
    cfg = ShotConfig(500, 10, seed=42)
    a = sample_experiment(cfg, family)
    b = sample_experiment(cfg, family)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.samples, y.samples)
    c = sample_experiment(ShotConfig(500, 10, seed=43), family)
    assert any(not np.array_equal(x.samples, y.samples) for x, y in zip(a, c))


def test_context_streams_are_order_independent(family):
    cfg = ShotConfig(300, 4, seed=9)
    alone = sample_context(cfg, 4, family)
    together = sample_experiment(cfg, family)[3]
    np.testing.assert_array_equal(alone.samples, together.samples)


def test_large_sample_converges(family):
    counts = sample_context(ShotConfig(10_000_000, 1, seed=3), 1, family)
    assert abs(counts.probabilities[1] - 1 / SQRT5) < 1e-3


def test_sigma_scales_with_shots(family):
    _, small = estimate_s(sample_experiment(ShotConfig(410, 100, seed=5), family))
    _, large = estimate_s(sample_experiment(ShotConfig(41_000, 100, seed=5), family))
    ratio = small / large
    assert 10 / 1.5 <= ratio <= 10 * 1.5


def test_each_shot_hits_one_detector(family):
    for monitor in (False, True):
        cfg = ShotConfig(777, 20, seed=11, loss_rate=0.3, monitor_loss=monitor)
        for c in sample_experiment(cfg, family):
            assert np.all(c.samples.sum(axis=1) == 777)
            assert c.samples.shape[1] == (5 if monitor else 4)


def test_estimate_s_near_ideal(family):
    s_hat, sigma = estimate_s(sample_experiment(ShotConfig(seed=0), family))
    assert abs(s_hat - SQRT5) < 3 * sigma + 1e-12
    assert 0 < sigma < 0.01


def test_estimate_s_needs_five_contexts(family):
    counts = sample_experiment(ShotConfig(100, 2, seed=0), family)
    with pytest.raises(ValueError):
        estimate_s(counts[:4])


def test_single_repetition_sigma_is_multinomial():
    c = ContextCounts(1, np.array([[25, 25, 25, 25]]))
    np.testing.assert_allclose(c.probabilities_sigma, np.full(4, math.sqrt(0.25 * 0.75 / 100)))
    np.testing.assert_array_equal(c.counts_sigma, np.zeros(4))


def test_empty_repetition_raises():
    with pytest.raises(NoCoincidences):
        ContextCounts(1, np.array([[0, 0, 0, 0], [1, 0, 0, 0]])).probabilities


def test_counts_rows_layout(family):
    counts = sample_experiment(ShotConfig(200, 3, seed=2), family)
    rows = counts_rows(counts)
    assert len(rows) == 5
    assert all(len(r) == len(COUNTS_HEADER) for r in rows)
    assert [r[0] for r in rows] == ["A1A2", "A2A3", "A3A4", "A4A5", "A5A1"]
    assert set(counts[0].to_json()) == {"context", "counts", "counts_sigma", "probabilities", "probabilities_sigma"}


def test_loss_sweep_ideal_values(family):
    grid = [0.0, 1 - 2 / SQRT5, 0.5, 1.0]
    points = loss_sweep(grid, ShotConfig(1000, 5, seed=8), family)
    expected = [SQRT5, 2.0, SQRT5 / 2, 0.0]
    for pt, e in zip(points, expected):
        assert pt.s_ideal == pytest.approx(e, abs=1e-12)
    assert points[-1].s_sampled == 0.0 and points[-1].sigma == 0.0


def test_loss_sweep_rejects_bad_grid(family):
    with pytest.raises(ValueError):
        loss_sweep([0.2, 1.2], ShotConfig(10, 2, seed=0), family)
