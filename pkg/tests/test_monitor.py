"""Unit tests for the channel-monitoring verdicts."""

import numpy as np
import pytest

from vsue import monitor
from vsue.monitor import (ConfigurationError, TestRecord, check_a, check_b,
                          compute_deltas, default_delta, monitor_verdict,
                          sample_record)


def record_with_flips(test_count, flips1=None, flips2=None):
    """Noise-free record with explicit flip positions injected."""
    bases1, bases2 = monitor.round_robin_bases(test_count)
    xi = np.zeros(test_count, dtype=np.uint8)
    eta = np.zeros(test_count, dtype=np.uint8)
    xi_p, eta_p = xi.copy(), eta.copy()
    for pos in flips1 or []:
        xi_p[pos] ^= 1
    for pos in flips2 or []:
        eta_p[pos] ^= 1
    return TestRecord(bases1=bases1, bases2=bases2, xi=xi, xi_prime=xi_p,
                      eta=eta, eta_prime=eta_p)


def deltas_from_rates(rates1, rates2=(0, 0, 0), joint=None, cell=60):
    """Synthetic DeltaCounts with given per-basis rates (counts out of `cell`)."""
    test_count = 9 * cell
    bases1, bases2 = monitor.round_robin_bases(test_count)
    err1 = np.zeros(test_count, dtype=np.uint8)
    err2 = np.zeros(test_count, dtype=np.uint8)
    for b in range(3):
        idx1 = np.flatnonzero(bases1 == b)
        err1[idx1[:int(round(rates1[b] * len(idx1)))]] = 1
        idx2 = np.flatnonzero(bases2 == b)
        err2[idx2[:int(round(rates2[b] * len(idx2)))]] = 1
    xi = np.zeros(test_count, dtype=np.uint8)
    rec = TestRecord(bases1=bases1, bases2=bases2, xi=xi, xi_prime=err1,
                     eta=xi, eta_prime=err2)
    return compute_deltas(rec)


class TestComputeDeltas:
    def test_no_errors(self):
        deltas = compute_deltas(record_with_flips(90))
        assert all(deltas.delta1[b].sum() == 0 for b in range(3))
        assert all(deltas.delta2[b].sum() == 0 for b in range(3))

    def test_single_flip_partitions_correctly(self):
        rec = record_with_flips(90)
        # find a position with basis pair (1, 2)
        pos = int(np.flatnonzero((rec.bases1 == 1) & (rec.bases2 == 2))[0])
        rec = record_with_flips(90, flips1=[pos])
        deltas = compute_deltas(rec)
        assert deltas.delta1[1].sum() == 1
        assert deltas.delta1[0].sum() == deltas.delta1[2].sum() == 0
        assert deltas.d1[1][2].sum() == 1
        assert sum(deltas.d1[b][bp].sum() for b in range(3)
                   for bp in range(3)) == 1

    def test_partition_sum_identity(self):
        rng = np.random.default_rng(0)
        bases1, bases2 = monitor.round_robin_bases(180)
        xi = rng.integers(0, 2, 180).astype(np.uint8)
        xi_p = rng.integers(0, 2, 180).astype(np.uint8)
        eta = rng.integers(0, 2, 180).astype(np.uint8)
        eta_p = rng.integers(0, 2, 180).astype(np.uint8)
        rec = TestRecord(bases1=bases1, bases2=bases2, xi=xi, xi_prime=xi_p,
                         eta=eta, eta_prime=eta_p)
        deltas = compute_deltas(rec)
        assert sum(int(deltas.delta1[b].sum()) for b in range(3)) == \
            int((xi ^ xi_p).sum())
        assert sum(int(deltas.delta2[b].sum()) for b in range(3)) == \
            int((eta ^ eta_p).sum())

    def test_epr_correction_flips_y_basis(self):
        rec = record_with_flips(90)
        plain = compute_deltas(rec)
        corrected = compute_deltas(rec, epr=True)
        # all zeros without correction; with it, exactly the y-basis cells flip
        assert plain.delta1[2].sum() == 0
        assert corrected.delta1[2].sum() == len(corrected.delta1[2])
        assert corrected.delta1[0].sum() == corrected.delta1[1].sum() == 0

    def test_length_mismatch(self):
        with pytest.raises(ConfigurationError):
            TestRecord(bases1=np.zeros(9, dtype=np.uint8),
                       bases2=np.zeros(9, dtype=np.uint8),
                       xi=np.zeros(8, dtype=np.uint8),
                       xi_prime=np.zeros(9, dtype=np.uint8),
                       eta=np.zeros(9, dtype=np.uint8),
                       eta_prime=np.zeros(9, dtype=np.uint8))

    def test_empty_cell_rejected(self):
        bases = np.zeros(18, dtype=np.uint8)  # only basis 0 present
        with pytest.raises(ConfigurationError):
            compute_deltas(TestRecord(
                bases1=bases, bases2=bases,
                xi=np.zeros(18, dtype=np.uint8),
                xi_prime=np.zeros(18, dtype=np.uint8),
                eta=np.zeros(18, dtype=np.uint8),
                eta_prime=np.zeros(18, dtype=np.uint8)))


class TestCheckA:
    def test_all_zero_accepts(self):
        deltas = compute_deltas(record_with_flips(90))
        assert check_a(deltas, beta_star=0.05, delta=0.3) == 1

    def test_uniform_rates_below_threshold(self):
        deltas = deltas_from_rates((0.05, 0.05, 0.05))
        assert check_a(deltas, beta_star=0.06, delta=0.1) == 1

    def test_non_uniform_rates_rejected(self):
        deltas = deltas_from_rates((0.02, 0.10, 0.02))
        assert check_a(deltas, beta_star=0.2, delta=0.1) == 0

    def test_threshold_binds(self):
        deltas = deltas_from_rates((0.10, 0.10, 0.10))
        assert check_a(deltas, beta_star=0.05, delta=0.1) == 0
        assert check_a(deltas, beta_star=0.15, delta=0.1) == 1


class TestCheckB:
    def test_noiseless_accepts(self):
        deltas = compute_deltas(record_with_flips(90))
        assert check_b(deltas, 0.05, 0.05, delta=0.3) == 1

    def test_monte_carlo_acceptance(self):
        """Independent flips at the agreed rate pass at least 90% of the time."""
        rng = np.random.default_rng(1)
        accepted = 0
        for _ in range(200):
            rec = sample_record(9000, 0.05, 0.05, rng)
            deltas = compute_deltas(rec)
            accepted += check_b(deltas, 0.07, 0.07, delta=0.2)
        assert accepted >= 180

    def test_monte_carlo_correlated_rejection(self):
        """Fully correlated flips break the product structure and are caught."""
        rng = np.random.default_rng(2)
        rejected = 0
        for _ in range(200):
            rec = sample_record(9000, 0.05, 0.05, rng, correlated=True)
            deltas = compute_deltas(rec)
            rejected += 1 - check_b(deltas, 0.07, 0.07, delta=0.2)
        assert rejected >= 180

    def test_implies_check_a(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            beta = float(rng.uniform(0, 0.12))
            gamma = float(rng.uniform(0, 0.12))
            rec = sample_record(90, beta, gamma, rng,
                                correlated=bool(rng.integers(2)))
            deltas = compute_deltas(rec)
            b_bit = check_b(deltas, 0.08, 0.08, delta=0.5)
            a_bit = check_a(deltas, 0.08, delta=0.5)
            assert b_bit <= a_bit


class TestVerdict:
    def test_verdict_consistency(self):
        rng = np.random.default_rng(4)
        rec = sample_record(900, 0.02, 0.02, rng)
        v = monitor_verdict(rec, 0.05, 0.05, delta=default_delta(900))
        assert v.check_b <= v.check_a
        assert v.counts1.shape == (3,) and v.joint_counts.shape == (3, 3)
        assert 0 <= v.beta_hat <= 1

    def test_permutation_invariance(self):
        """Verdicts depend only on per-cell counts, not position order."""
        rng = np.random.default_rng(5)
        rec = sample_record(900, 0.04, 0.04, rng)
        perm = rng.permutation(900)
        permuted = TestRecord(
            bases1=rec.bases1[perm], bases2=rec.bases2[perm],
            xi=rec.xi[perm], xi_prime=rec.xi_prime[perm],
            eta=rec.eta[perm], eta_prime=rec.eta_prime[perm])
        v1 = monitor_verdict(rec, 0.05, 0.05, delta=0.3)
        v2 = monitor_verdict(permuted, 0.05, 0.05, delta=0.3)
        assert (v1.check_a, v1.check_b) == (v2.check_a, v2.check_b)
        assert np.array_equal(np.sort(v1.counts1), np.sort(v2.counts1))

    def test_default_delta(self):
        assert default_delta(900) == pytest.approx(0.3)
        with pytest.raises(ConfigurationError):
            default_delta(10)

    def test_verdict_invariant_guard(self):
        with pytest.raises(ValueError):
            monitor.MonitorVerdict(check_a=0, check_b=1, beta_hat=0,
                                   gamma_hat=0, counts1=np.zeros(3),
                                   counts2=np.zeros(3),
                                   joint_counts=np.zeros((3, 3)))
