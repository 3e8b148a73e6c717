import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wrenyi import closedforms as cf
from wrenyi import distributions as dist
from wrenyi import inequalities as iq
from wrenyi import specfun, weightfn
from wrenyi.entropy import EstimatorConfig, weighted_renyi_entropy
from wrenyi.errors import DegenerateInput, ParameterError, RankError
from wrenyi.reports import HOLDS, INCONCLUSIVE

MC = EstimatorConfig(samples=200_000, seed=31, method="monte_carlo")
ONE = weightfn.constant(1.0)
QUAD = weightfn.quadratic(1)


def spd(seed, n):
    return dist.random_spd(np.random.default_rng(seed), n)


class TestPartition:
    def test_blocks(self):
        part = iq.BlockPartition(1, 2)
        C = np.arange(9.0).reshape(3, 3)
        c11, c12, c21, c22 = part.blocks(C)
        assert c11.shape == (1, 1) and c22.shape == (2, 2)
        assert c12.shape == (1, 2) and c21.shape == (2, 1)
        a, b = part.split(np.arange(3.0))
        np.testing.assert_array_equal(b, [1.0, 2.0])

    def test_empty_block(self):
        with pytest.raises(ParameterError):
            iq.BlockPartition(0, 2)

    def test_shape_checked(self):
        with pytest.raises(ParameterError):
            iq.BlockPartition(1, 1).blocks(np.eye(3))


class TestHadamard:
    @pytest.mark.parametrize("p", [0.85, 0.9, 1.5, 3.0])
    def test_diagonal_margin_is_constant_gap(self, p):
        # alpha and the determinant terms cancel on diagonal C, leaving the gamma-ratio gap
        C = np.diag([2.0, 0.7])
        rep = iq.check_hadamard(C, [ONE, ONE], p)
        gap = rep.details["constant_gap"]
        np.testing.assert_allclose(rep.lhs, gap, atol=1e-13)
        assert rep.uncertainty == 0.0
        lv = cf.log_varpi_star if p < 1 else cf.log_varpi
        np.testing.assert_allclose(gap, 2 * lv(p, p, 1) - lv(p, p, 2), rtol=1e-13)

    def test_terms_add_up(self):
        rep = iq.check_hadamard(spd(1, 3), [QUAD, ONE, QUAD], 1.5)
        np.testing.assert_allclose(math.fsum(rep.terms.values()), rep.lhs, rtol=1e-14)
        np.testing.assert_allclose(rep.margin, -rep.lhs)
        assert set(rep.to_dict()["terms"]) == {"log_diagonal", "marginal_terms", "log_det", "joint_term"}

    def test_det_terms_cancel_with_hadamard_ratio(self):
        C = spd(2, 2)
        t = iq.hadamard_terms(C, [ONE, ONE], 0.9)[0]
        ratio = np.prod(np.diag(C)) / np.linalg.det(C)
        np.testing.assert_allclose(t["log_diagonal"] + t["log_det"], 0.05 * math.log(ratio), rtol=1e-12)

    def test_monte_carlo_weight_carries_uncertainty(self):
        w = weightfn.custom(lambda x: 1 + x[:, 0] ** 2, 1, degree=2)
        rep = iq.check_hadamard(spd(3, 2), [w, w], 2.0, MC)
        assert rep.uncertainty > 0

    def test_branch_limits(self):
        with pytest.raises(ParameterError):
            iq.check_hadamard(np.eye(2), [ONE, ONE], 1.0)
        with pytest.raises(ParameterError):
            iq.check_hadamard(np.eye(2), [ONE, ONE], 0.4)
        with pytest.raises(ParameterError):
            iq.check_hadamard(np.eye(2), [weightfn.quadratic(2)], 1.5)


class TestHadamardBessel:
    @pytest.mark.parametrize("p", [0.9, 2.0])
    def test_matches_generic_phase_weights(self, p):
        C = spd(4, 2)
        t = np.array([0.4, -0.3])
        bessel = iq.check_hadamard_bessel(C, t, p)
        generic = iq.check_hadamard(C, [weightfn.exp_phase([t[0]]), weightfn.exp_phase([t[1]])], p)
        np.testing.assert_allclose(bessel.lhs, generic.lhs, rtol=1e-10, atol=1e-12)

    def test_zero_frequency_is_constant_weight(self):
        C = spd(5, 2)
        a = iq.check_hadamard_bessel(C, [0.0, 0.0], 0.9)
        b = iq.check_hadamard(C, [ONE, ONE], 0.9)
        np.testing.assert_allclose(a.lhs, b.lhs, rtol=1e-12)

    def test_bad_t(self):
        with pytest.raises(ParameterError):
            iq.check_hadamard_bessel(np.eye(2), [1.0], 0.9)

    def test_constant(self):
        np.testing.assert_allclose(iq.BESSEL_2X2_CONSTANT, math.log(3 * math.pi ** (2 / 3) / 4), rtol=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000))
    def test_2x2_assembly_matches_general_form(self, seed):
        rng = np.random.default_rng(seed)
        rep = iq.bessel_2x2_inequality(dist.random_spd(rng, 2), rng.normal(size=2))
        assert abs(rep.details["assembly_gap"]) < 1e-10

    def test_2x2_orders(self):
        # p = 2/3 gives K_{3/2} marginally and K_1 jointly
        assert cf.epsilon_n(2 / 3, 1) / 2 == pytest.approx(1.5)
        assert cf.epsilon_n(2 / 3, 2) / 2 == pytest.approx(1.0)
        z = 0.8
        np.testing.assert_allclose(
            specfun.bessel_k_scaled_power(1.5, z), math.sqrt(math.pi / 2) * (1 + z) * math.exp(-z), rtol=1e-12
        )


class TestSubadditivity:
    def test_product_density_is_equality(self):
        parts = [dist.MaximizerDensity(0.8, np.eye(1)), dist.MaximizerDensity(0.8, 2 * np.eye(1))]
        f = dist.ProductDensity(tuple(parts))
        w = weightfn.product([QUAD, ONE])
        rep = iq.check_subadditivity(f, parts, w, 0.8, MC)
        assert rep.verdict == INCONCLUSIVE
        assert [c.verdict for c in rep.clauses] == [INCONCLUSIVE, INCONCLUSIVE]

    def test_gaussian_joint_with_numerical_marginals(self):
        f = dist.gaussian(np.array([[1.0, 0.6], [0.6, 1.0]]))
        w = weightfn.product([ONE, ONE])
        rep = iq.check_subadditivity(f, None, w, 2.0, EstimatorConfig(samples=100_000, seed=3, method="monte_carlo"))
        # Renyi entropy of a correlated Gaussian is strictly below the sum of its marginals
        assert rep.verdict == HOLDS
        np.testing.assert_allclose(rep.margin, -0.5 * math.log(1 - 0.36), atol=5 * rep.uncertainty + 1e-6)

    def test_requires_product_weight(self):
        f = dist.gaussian(np.eye(2))
        with pytest.raises(ParameterError):
            iq.check_subadditivity(f, None, weightfn.quadratic(2), 2.0, MC)


class TestBlockSubadditivity:
    def test_block_entropies_match_marginals(self):
        C = spd(6, 3)
        part = iq.BlockPartition(1, 2)
        rep = iq.check_block_subadditivity(C, part, ONE, weightfn.constant(1.0, 2), 0.9, MC)
        p1, p2 = rep.details["block_exponents"]
        g = dist.MaximizerDensity(0.9, C)
        m1 = g.marginal([0])
        np.testing.assert_allclose(m1.p, p1, rtol=1e-14)
        direct = weighted_renyi_entropy(m1, ONE, 0.9, EstimatorConfig(method="quadrature"))
        np.testing.assert_allclose(rep.details["block_entropies"][0], direct.value, rtol=1e-7)

    @pytest.mark.parametrize("p", [0.7, 2.0])
    def test_block_diagonal_is_strict(self, p):
        # blocks of a Student or type II law stay dependent under block-diagonal C
        rep = iq.check_block_subadditivity(np.eye(2), iq.BlockPartition(1, 1), ONE, ONE, p)
        assert rep.uncertainty == 0.0
        assert rep.margin < -0.01

    def test_gaussian_rejected(self):
        with pytest.raises(ParameterError):
            iq.check_block_subadditivity(np.eye(2), iq.BlockPartition(1, 1), ONE, ONE, 1.0)


class TestBlockMatrix:
    def test_zeta_positive(self):
        z, p1, p2 = iq.zeta(0.8, 1, 1)
        assert z > 0
        assert 1 / 3 < p1 < 1 and p1 == p2

    def test_zeta_domain(self):
        with pytest.raises(ParameterError):
            iq.zeta(0.5, 1, 1)

    def test_block_diagonal_identity(self):
        C = np.diag([1.3, 0.4])
        rep = iq.check_block_matrix_bound(np.eye(2), C, iq.BlockPartition(1, 1), ONE, ONE, 0.8)
        np.testing.assert_allclose(rep.lhs, 0.0, atol=1e-13)
        np.testing.assert_allclose(rep.margin, 2 * math.log(rep.details["zeta"]), rtol=1e-13)

    def test_non_pd_image(self):
        B = np.array([[1.0, 0.0], [1.0, 0.0]])
        with pytest.raises(ParameterError):
            iq.check_block_matrix_bound(B, np.eye(2), iq.BlockPartition(1, 1), ONE, ONE, 0.8)


class TestCorollaryAbs:
    def test_reports_conclusion_only(self):
        rep = iq.check_corollary_abs([1.0, 2.0], iq.BlockPartition(1, 1), 0.8, MC)
        assert rep.notes
        assert len(rep.details["moments"]) == 3
        assert rep.uncertainty > 0

    def test_zero_block(self):
        with pytest.raises(DegenerateInput):
            iq.check_corollary_abs([0.0, 1.0], iq.BlockPartition(1, 1), 0.8, MC)

    def test_negative_lambda(self):
        with pytest.raises(ParameterError):
            iq.check_corollary_abs([-1.0, 1.0], iq.BlockPartition(1, 1), 0.8, MC)


class TestMatrixSum:
    @pytest.mark.parametrize("p", [0.8, 2.0])
    def test_zero_perturbation_is_equality(self, p):
        A = spd(7, 2)
        rep = iq.check_matrix_sum(A, np.zeros((2, 2)), weightfn.constant(1.0, 2), p, MC)
        assert rep.verdict == INCONCLUSIVE
        assert rep.margin == 0.0

    def test_constant_weight_psd_growth(self):
        # alpha = 1, so the entropy gap is half the log-det ratio
        A = spd(8, 2)
        v = np.array([0.3, 1.0])
        rep = iq.check_matrix_sum(A, np.outer(v, v), weightfn.constant(1.0, 2), 0.8, MC)
        half = 0.5 * math.log(np.linalg.det(A + np.outer(v, v)) / np.linalg.det(A))
        np.testing.assert_allclose(rep.margin, half, rtol=1e-12)
        assert rep.verdict == HOLDS

    def test_validation(self):
        with pytest.raises(ParameterError):
            iq.check_matrix_sum(np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]), weightfn.constant(1.0, 2), 0.8)
        with pytest.raises(ParameterError):
            iq.check_matrix_sum(np.eye(2), -2 * np.eye(2), weightfn.constant(1.0, 2), 0.8)


class TestShermanMorrison:
    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10_000), st.sampled_from([0.8, 2.0]))
    def test_rewrite_equals_direct(self, seed, p):
        rng = np.random.default_rng(seed)
        A = dist.random_spd(rng, 2)
        v = rng.normal(size=2)
        cfg = EstimatorConfig(samples=20_000, seed=seed, method="monte_carlo")
        rep = iq.sherman_morrison_condition(A, np.outer(v, v), weightfn.quadratic(2), p, cfg)
        assert rep.details["equivalence_gap"] < 1e-8

    def test_rank_two_rejected(self):
        with pytest.raises(RankError):
            iq.sherman_morrison_condition(np.eye(2), np.eye(2), weightfn.constant(1.0, 2), 0.8, MC)

    def test_matches_matrix_sum_hypothesis(self):
        A = spd(9, 2)
        v = np.array([0.5, -0.2])
        w = weightfn.quadratic(2)
        sm = iq.sherman_morrison_condition(A, np.outer(v, v), w, 0.8, MC)
        ms = iq.check_matrix_sum(A, np.outer(v, v), w, 0.8, MC)
        np.testing.assert_allclose(sm.details["direct_margin"], ms.clauses[0].margin, rtol=1e-10)
