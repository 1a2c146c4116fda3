"""Unit tests for entropies, bounds, rates and the reject-case optimizer."""

import mpmath
import numpy as np
import pytest

from vsue import attack, qmath, security
from vsue.security import (binary_entropy, entropy_vec, j_entropy, lm05_rate,
                           max_message_length, postselection_penalty,
                           qkd_rate, rate_qkd_refresh, rate_vsue_refresh,
                           reject_case_max, star, theorem_bounds)

GRID = np.arange(0.0, 0.0401, 0.002)


class TestEntropyHelpers:
    def test_binary_entropy_values(self):
        assert binary_entropy(0.5) == 1.0
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_entropy_vec_uniform(self):
        assert entropy_vec([0.25] * 4) == pytest.approx(2.0)

    def test_entropy_vec_subnormalized_allowed(self):
        assert entropy_vec([0.25, 0.25]) == pytest.approx(1.0)

    def test_entropy_vec_rejects_bad_input(self):
        with pytest.raises(ValueError):
            entropy_vec([0.7, 0.7])
        with pytest.raises(ValueError):
            entropy_vec([-0.1, 0.5])

    def test_star(self):
        assert star(0.5, 0.37) == pytest.approx(0.5)
        assert star(0.0, 0.2) == pytest.approx(0.2)
        assert star(0.05, 0.05) == pytest.approx(0.095)
        assert star(0.1, 0.2) == pytest.approx(star(0.2, 0.1))

    def test_j_entropy_endpoints(self):
        assert j_entropy(0.0) == 0.0
        # uniform four-outcome point sits at beta = 1/2
        assert j_entropy(0.5) == pytest.approx(2.0)
        assert j_entropy(2 / 3) == pytest.approx(np.log2(3))

    def test_j_entropy_matches_entropy_vec(self):
        for beta in (0.01, 0.05, 0.3):
            assert j_entropy(beta) == pytest.approx(
                entropy_vec([1 - 1.5 * beta] + [beta / 2] * 3), abs=1e-14)

    def test_j_entropy_domain(self):
        with pytest.raises(ValueError):
            j_entropy(0.8)


class TestTheoremBounds:
    def test_zero_thresholds_full_length(self):
        acc, rej = theorem_bounds(100, 100, 0.0, 0.0, pr_accept=0.37)
        assert acc.value == pytest.approx(0.37)
        assert rej.value == pytest.approx(0.63)

    def test_twenty_bit_slack(self):
        n = 1000
        l_max = max_message_length(n, 0.02, 0.02).l_max
        acc, rej = theorem_bounds(n, l_max - 20, 0.02, 0.02, pr_accept=0.5)
        assert acc.value <= 2 ** -10
        assert rej.value <= 2 ** -10

    def test_exponent_exact_under_underflow(self):
        acc, _ = theorem_bounds(10**6, 100, 0.0, 0.0, pr_accept=1.0)
        assert acc.value == 0.0  # 2^(-~500k) underflows
        assert acc.exponent_bits == pytest.approx(100 - 10**6)

    def test_log_space_against_mpmath(self):
        """High-precision oracle for the bound exponents at large n."""
        n, beta = 10**4, 0.01
        msg_len = n // 2
        acc, rej = theorem_bounds(n, msg_len, beta, beta, pr_accept=1.0)
        with mpmath.workdps(60):
            b = mpmath.mpf(beta)
            terms = [1 - 3 * b / 2, b / 2, b / 2, b / 2]
            j = -sum(p * mpmath.log(p, 2) for p in terms)
            sg = 2 * b * (1 - b)
            h = -(sg * mpmath.log(sg, 2) + (1 - sg) * mpmath.log(1 - sg, 2))
            acc_exp = msg_len - n + n * j + n * j
            rej_exp = msg_len - n + n * j + n * h
            assert abs(acc.exponent_bits - float(acc_exp)) \
                <= 1e-12 * abs(float(acc_exp))
            assert abs(rej.exponent_bits - float(rej_exp)) \
                <= 1e-12 * abs(float(rej_exp))

    def test_pr_accept_range(self):
        with pytest.raises(ValueError):
            theorem_bounds(10, 5, 0.0, 0.0, pr_accept=1.5)

    def test_strictly_below_one_under_length_bound(self):
        n = 400
        for beta, gamma in ((0.01, 0.02), (0.03, 0.03)):
            l_max = max_message_length(n, beta, gamma).l_max
            acc, rej = theorem_bounds(n, l_max - 2, beta, gamma, pr_accept=1.0)
            assert acc.value < 1.0
            assert acc.exponent_bits < 0.0
            assert rej.exponent_bits < 0.0


class TestMessageLength:
    def test_noiseless_full_length(self):
        assert max_message_length(100, 0.0, 0.0).l_max == pytest.approx(100)

    def test_equal_thresholds_reduction(self):
        n, beta = 1000, 0.03
        assert max_message_length(n, beta, beta).l_max == pytest.approx(
            n * (1 - 2 * j_entropy(beta)))

    def test_general_max_branches(self):
        n, beta, gamma = 500, 0.02, 0.05
        bound = max_message_length(n, beta, gamma)
        want = n - n * j_entropy(beta) - n * max(
            binary_entropy(star(beta, gamma)), j_entropy(gamma))
        assert bound.l_max == pytest.approx(want, abs=1e-9)
        assert bound.l_max == pytest.approx(
            min(bound.accept_threshold, bound.reject_threshold))


class TestRates:
    def test_all_rates_one_at_zero(self):
        assert rate_vsue_refresh(0.0) == pytest.approx(1.0)
        assert rate_qkd_refresh(0.0) == pytest.approx(1.0)
        assert qkd_rate(0.0, 0.0) == pytest.approx(1.0)
        assert lm05_rate(0.0, 0.0) == pytest.approx(1.0)

    def test_refresh_ordering(self):
        for beta in GRID:
            assert rate_qkd_refresh(beta) >= rate_vsue_refresh(beta) - 1e-12

    def test_two_way_beats_comparator(self):
        for beta in GRID:
            assert qkd_rate(beta, beta) >= lm05_rate(beta, beta) - 1e-12

    @pytest.mark.parametrize("fn", [
        rate_vsue_refresh, rate_qkd_refresh,
        lambda b: qkd_rate(b, b), lambda b: lm05_rate(b, b)])
    def test_monotone_nonincreasing(self, fn):
        values = [fn(beta) for beta in GRID]
        assert all(values[i + 1] <= values[i] + 1e-12
                   for i in range(len(values) - 1))

    def test_zero_crossings_located(self):
        c_vsue = security.zero_crossing(rate_vsue_refresh, 1e-9, 0.2)
        c_qkd = security.zero_crossing(rate_qkd_refresh, 1e-9, 0.2)
        assert 0.0 < c_vsue < c_qkd < 0.2
        assert abs(rate_vsue_refresh(c_vsue)) < 1e-4

    def test_clamped(self):
        assert security.clamped(-0.3) == 0.0
        assert security.clamped(0.3) == 0.3

    def test_qkd_rate_via_spectral_route(self):
        """Cross-module identity: the rate formula equals
        1 - h(star) - S(full adversary state) + S((x,y)-averaged state)."""
        for beta, gamma in ((0.01, 0.03), (0.02, 0.02)):
            st = attack.solve_check_b(attack.NoiseParams(beta, gamma))
            s_full = qmath.von_neumann_entropy(np.diag(st.as_vector()))
            lam_cap = attack.lambda_capital(st)
            s_at = entropy_vec(lam_cap.reshape(4))
            route = 1 - binary_entropy(star(beta, gamma)) - s_full + s_at
            assert qkd_rate(beta, gamma) == pytest.approx(route, abs=1e-10)

    def test_qkd_bound_exponent_zero_at_rate(self):
        n, beta, gamma = 10_000, 0.02, 0.03
        msg_len = n * qkd_rate(beta, gamma)
        assert security.qkd_bound_exponent(n, msg_len, beta, gamma) == \
            pytest.approx(0.0, abs=1e-6)


class TestRejectCaseMax:
    def test_maximum_equals_four_outcome_entropy(self):
        res = reject_case_max(0.05, starts=8)
        assert res.converged
        assert abs(res.value - j_entropy(0.05)) <= 1e-6
        assert res.family_residual <= 1e-5

    def test_small_beta_limit(self):
        res = reject_case_max(0.001, starts=4)
        assert res.value == pytest.approx(j_entropy(0.001), abs=1e-6)
        assert res.value < 0.02

    def test_large_beta(self):
        # still exact near the domain edge, where the dominant row shrinks
        for beta in (0.5, 0.65):
            res = reject_case_max(beta, starts=6)
            assert res.value == pytest.approx(j_entropy(beta), abs=1e-6)

    def test_optimizer_satisfies_marginals(self):
        beta = 0.07
        res = reject_case_max(beta, starts=4)
        marginals = res.maximizer.coeffs.sum(axis=(2, 3))
        assert np.allclose(marginals, attack.pair_marginal_coeffs(beta),
                           atol=1e-9)

    def test_flat_direction_relation(self):
        beta = 0.04
        res = reject_case_max(beta, starts=8)
        lam_cap = attack.lambda_capital(res.maximizer)
        assert np.max(np.abs(lam_cap * (1 - 1.5 * beta)
                             - res.maximizer.coeffs[0, 0])) <= 1e-5

    def test_objective_via_matrix_entropies(self):
        """The optimizer's objective value equals the difference of generic
        matrix entropies of the two adversary states at the optimum."""
        res = reject_case_max(0.06, starts=6)
        st = res.maximizer
        s_full = qmath.von_neumann_entropy(np.diag(st.as_vector()))
        dec = attack.eve_avg_xy_state(st, 0, 0, 0)
        s_bat = qmath.von_neumann_entropy(dec.reconstruct())
        assert res.value == pytest.approx(s_full - s_bat, abs=1e-8)

    def test_domain(self):
        with pytest.raises(ValueError):
            reject_case_max(0.0)


class TestPostselection:
    def test_d16_at_n1(self):
        assert postselection_penalty(1, d=16) == pytest.approx(510.0)

    def test_vanishes_relative_to_n(self):
        previous = float("inf")
        for n in (10**3, 10**6, 10**9):
            ratio = postselection_penalty(n) / n
            assert ratio < previous
            previous = ratio
        assert previous < 1e-4

    def test_qubit_variant(self):
        for n in (1, 10, 100):
            assert postselection_penalty(n, d=2) == pytest.approx(
                6 * np.log2(n + 1))


class TestEntropyInputs:
    def test_accept_state_entropies(self):
        beta, gamma = 0.02, 0.04
        st = attack.solve_check_b(attack.NoiseParams(beta, gamma))
        inputs = security.entropy_inputs(st)
        assert inputs.s_full == pytest.approx(
            j_entropy(beta) + j_entropy(gamma), abs=1e-10)
        assert inputs.s_conditional == pytest.approx(
            binary_entropy(star(beta, gamma)), abs=1e-10)
        assert inputs.s_outcome_averaged == pytest.approx(
            entropy_vec(attack.lambda_capital(st).reshape(4)), abs=1e-10)

    def test_range_invariant(self):
        rng = np.random.default_rng(77)
        for _ in range(5):
            inputs = security.entropy_inputs(
                attack.BellDiagonalState.random(rng))
            for v in (inputs.s_full, inputs.s_conditional,
                      inputs.s_outcome_averaged):
                assert 0.0 <= v <= 4.0


class TestSecurityReport:
    def test_report_coherent(self):
        rep = security.security_report(1000, 0.02, 0.02, pr_accept=0.9,
                                       finite_size=True)
        assert rep.s_accept == pytest.approx(2 * j_entropy(0.02))
        assert rep.s_conditional == pytest.approx(binary_entropy(star(0.02, 0.02)))
        assert 0 <= rep.eps_acc.value <= 1 and 0 <= rep.eps_rej.value <= 1
        assert rep.rates["via_qkd"] >= rep.rates["via_vsue"]
        assert rep.rates_clamped["via_vsue"] >= 0.0
        assert rep.postselection_bits == pytest.approx(510 * np.log2(1001))
        assert rep.length_bound.l_max <= 1000
