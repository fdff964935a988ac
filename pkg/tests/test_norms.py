"""
Tests for the dyadic cutoffs and the mu multiplier norms
"""
import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from src.models.cutoffs import DyadicCutoffs, bump_psi, dyadic_phi
from src.models.multiplier import MultiplierFn
from src.services.norm_service import PARTITION_TOLERANCE


class TestCutoffs:

    def test_self_test_passes(self, norms):
        cutoffs = norms.make_cutoffs()
        defects = cutoffs.partition_defects(cutoffs.verification_samples())
        assert len(cutoffs.verification_samples()) == 10_000
        assert max(defects.values()) <= PARTITION_TOLERANCE

    def test_psi_is_one_near_origin(self):
        assert np.all(bump_psi(np.linspace(-1.0, 1.0, 101)) == 1.0)
        assert np.all(bump_psi(np.array([-3.0, -2.0, 2.0, 5.0])) == 0.0)

    @given(st.floats(min_value=-10.0, max_value=10.0, allow_nan=False))
    def test_psi_between_zero_and_one(self, s):
        value = float(bump_psi(np.array([s]))[0])
        assert 0.0 <= value <= 1.0

    @given(st.floats(min_value=2.0, max_value=1e6, allow_nan=False))
    def test_phi_vanishes_above_two(self, s):
        assert dyadic_phi(np.array([s]))[0] == 0.0

    @given(st.floats(min_value=-1e3, max_value=0.5, allow_nan=False))
    def test_phi_vanishes_below_half(self, s):
        assert dyadic_phi(np.array([s]))[0] == 0.0

    @hypothesis_settings(max_examples=50)
    @given(st.floats(min_value=1e-3, max_value=1e3, allow_nan=False))
    def test_dyadic_pieces_sum_to_one(self, s):
        total = sum(dyadic_phi(np.array([2.0 ** k * s]))[0] for k in range(-15, 15))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_sample_rate_floor(self):
        with pytest.raises(ValueError):
            DyadicCutoffs(sample_rate=8)


class TestMuNorms:

    def test_heat_norm_is_finite(self, norms):
        estimate = norms.mu_norm(MultiplierFn.heat(1.0), 2.0)
        assert np.isfinite(estimate.value)
        assert estimate.value > 0
        assert estimate.value == max(estimate.per_lambda)

    def test_norm_grows_with_smoothness_order(self, norms):
        g = MultiplierFn.smoothed_indicator(1.0)
        lambdas = [0.5, 1.0, 2.0]
        low = norms.mu_norm(g, 1.0, lambda_grid=lambdas).value
        high = norms.mu_norm(g, 2.0, lambda_grid=lambdas).value
        assert low <= high

    def test_negative_order_rejected(self, norms):
        with pytest.raises(ValueError):
            norms.mu_norm(MultiplierFn.heat(1.0), -0.5)

    def test_imaginary_power_norm_does_not_depend_on_lambda(self, norms):
        estimate = norms.mu_norm(MultiplierFn.imaginary_power(2.0), 1.0, lambda_grid=[0.25, 1.0, 4.0])
        assert np.ptp(estimate.per_lambda) <= 1e-8 * estimate.value

    def test_primed_norm_within_factor_four(self, norms):
        g = MultiplierFn.imaginary_power(1.0)
        mu = norms.mu_norm(g, 1.0, lambda_grid=[1.0]).value
        mu_prime = norms.mu_prime_norm(g, 1.0, lambda_grid=[1.0]).value
        assert np.isfinite(mu_prime)
        assert mu / 4.0 <= mu_prime <= 4.0 * mu

    def test_imaginary_power_growth_is_increasing(self, norms):
        beta, constant, values = norms.imaginary_power_growth(1.0, [1.0, 2.0, 4.0, 8.0, 16.0])
        assert np.all(np.diff(values) > 0)
        assert beta > 0
        assert np.isfinite(constant)

    def test_sobolev_majorant_dominates(self, norms):
        g = MultiplierFn.smoothed_indicator(1.0)
        epsilon = 0.5
        mu = norms.mu_norm(g, 1.0, lambda_grid=[1.0]).value
        majorant = norms.sobolev_majorant(g, 1.0, epsilon, t_grid=[1.0]).value
        assert mu <= 1.1 * norms.majorant_constant(epsilon) * majorant

    def test_subadditive(self, norms):
        g1, g2 = MultiplierFn.heat(1.0), MultiplierFn.imaginary_power(1.0)
        total = MultiplierFn.from_function(lambda s: g1(s) + g2(s), label="heat+s^2i")
        lambdas = norms.default_lambda_grid()
        for a in (0.0, 1.0, 2.0):
            combined = norms.mu_norm(total, a, lambda_grid=lambdas).value
            separate = norms.mu_norm(g1, a, lambda_grid=lambdas).value + norms.mu_norm(g2, a, lambda_grid=lambdas).value
            assert combined <= separate * (1.0 + 1e-12)

    @pytest.mark.parametrize("g", [MultiplierFn.heat(1.0), MultiplierFn.imaginary_power(2.0),
                                   MultiplierFn.smoothed_indicator(1.0)], ids=lambda g: g.label)
    def test_modulus_bounded_by_order_zero_norm(self, norms, g):
        lambdas = [0.25, 0.5, 1.0, 2.0, 4.0]
        mu_0 = norms.mu_norm(g, 0.0, lambda_grid=lambdas).value
        s = np.linspace(0.5, 2.0, 301)
        phi = norms.cutoffs.phi(s)
        modulus = max(np.max(np.abs(phi * g(lam * s))) for lam in lambdas)
        assert modulus <= 1.02 * mu_0 / (2.0 * np.pi)

    @pytest.mark.parametrize("g", [MultiplierFn.heat(1.0), MultiplierFn.heat(0.3),
                                   MultiplierFn.imaginary_power(2.0), MultiplierFn.smoothed_indicator(1.0)],
                             ids=lambda g: g.label)
    def test_quarter_octave_grid_suffices(self, norms, g):
        full = norms.default_lambda_grid()
        quarter = full[::2]
        assert np.isclose(np.log2(quarter) * 4, np.round(np.log2(quarter) * 4)).all()
        for a in (1.0, 2.0):
            dense = norms.mu_norm(g, a, lambda_grid=full).value
            coarse = norms.mu_norm(g, a, lambda_grid=quarter).value
            assert coarse <= dense * (1.0 + 1e-12)
            assert coarse >= 0.95 * dense

    def test_json_record(self, norms):
        record = norms.mu_norm(MultiplierFn.heat(1.0), 1.0, lambda_grid=[1.0, 2.0]).to_json_record()
        assert record["a"] == 1.0
        assert [pair[0] for pair in record["per_lambda"]] == [1.0, 2.0]


class TestPredictedConstants:

    def test_lp_shape(self, norms):
        predicted = norms.predicted_constants(K0=2.0, mu=3.0, sup_norm=1.0, n=1, sigma=2.0, p=2.0)
        assert predicted.weak_11 == pytest.approx(16.0 * 5.0)
        assert predicted.lp_factor == pytest.approx(18.0)
        assert predicted.lp_bound == pytest.approx(18.0 * 80.0)
        assert predicted.sigma_valid

    def test_weighted_shape(self, norms):
        predicted = norms.predicted_constants(K0=1.0, mu=1.0, sup_norm=1.0, n=1, sigma=2.0, p=2.0, q=4.0)
        assert predicted.weighted_bound == pytest.approx(3.0 * 4.0)
        assert predicted.weighted_valid
        assert not norms.predicted_constants(1.0, 1.0, 1.0, 1, 2.0, p=2.0, q=2.0).weighted_valid

    def test_vacuous_sigma_flagged(self, norms):
        predicted = norms.predicted_constants(K0=1.0, mu=1.0, sup_norm=1.0, n=3, sigma=1.0)
        assert not predicted.sigma_valid
        assert predicted.lp_bound is None
