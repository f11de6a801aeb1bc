"""Generation-model tests.

Oracles: scipy.stats.truncnorm for the truncated-normal CDF/quantile,
analytic integrals for the uniform distribution, hand-computed
piecewise-linear inverses for small empirical models, and Monte Carlo for
expected shortfall.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from vremarket import EmpiricalModel, TruncatedNormalModel, UniformModel

# frozen with scipy.stats.truncnorm(-1.5, 1.5, loc=1.5, scale=1).cdf(1.0)
TN_CDF_AT_1 = 0.2790101060834537


def tn_oracle(mu, sigma, hi):
    return stats.truncnorm((0.0 - mu) / sigma, (hi - mu) / sigma,
                           loc=mu, scale=sigma)


@pytest.fixture(scope="module")
def models(tn_model, uniform_model):
    empirical = EmpiricalModel([0.3, 0.8, 1.1, 1.6, 2.2, 2.9], scale=1.0)
    return {"tn": tn_model, "uniform": uniform_model, "empirical": empirical}


class TestCdf:
    def test_symmetric_midpoint(self, tn_model):
        assert tn_model.cdf(1.5) == pytest.approx(0.5, abs=1e-12)

    def test_support_boundaries(self, models):
        for m in models.values():
            assert m.cdf(m.support[0]) == pytest.approx(0.0, abs=1e-12)
            assert m.cdf(m.support_hi) == pytest.approx(1.0, abs=1e-12)

    def test_frozen_value(self, tn_model):
        assert tn_model.cdf(1.0) == pytest.approx(TN_CDF_AT_1, abs=1e-12)

    @pytest.mark.parametrize("mu,sigma,hi", [
        (1.5, 1.0, 3.0), (0.8, 0.4, 2.0), (2.5, 1.8, 4.0), (0.2, 1.0, 1.0),
    ])
    def test_matches_scipy_oracle(self, mu, sigma, hi):
        model = TruncatedNormalModel(mu, sigma, hi=hi)
        oracle = tn_oracle(mu, sigma, hi)
        xs = np.linspace(0.0, hi, 37)
        np.testing.assert_allclose(model.cdf(xs), oracle.cdf(xs), atol=1e-12)
        assert model.cdf(0.3 * hi) == pytest.approx(oracle.cdf(0.3 * hi),
                                                    abs=1e-13)

    def test_clamps_outside_support(self, models):
        for m in models.values():
            assert m.cdf(-1.0) == 0.0
            assert m.cdf(m.support_hi + 5.0) == 1.0

    def test_non_decreasing(self, models):
        xs = np.linspace(-0.5, 3.5, 400)
        for m in models.values():
            vals = m.cdf(xs)
            assert np.all(np.diff(vals) >= -1e-14)

    def test_scalar_and_vector_paths_agree(self, models):
        xs = np.linspace(0.0, 3.0, 23)
        for m in models.values():
            vec = m.cdf(xs)
            scal = np.array([m.cdf(float(x)) for x in xs])
            np.testing.assert_allclose(vec, scal, atol=1e-14)


class TestQuantile:
    def test_zero_maps_to_support_start(self, models):
        for m in models.values():
            assert m.quantile(0.0) == 0.0

    def test_one_maps_to_support_end(self, models):
        for m in models.values():
            assert m.quantile(1.0) == pytest.approx(m.support_hi, abs=1e-12)

    def test_symmetry(self, tn_model):
        assert tn_model.quantile(0.5) == pytest.approx(1.5, abs=1e-9)

    def test_empirical_piecewise_inverse(self):
        # anchors (0,0),(0.5,.2),(1.0,.4),(1.5,.6),(2.0,1): u=0.5 lands on
        # the midpoint of the [1.0, 1.5] segment
        model = EmpiricalModel([0.5, 1.0, 1.5, 2.0])
        assert model.quantile(0.5) == pytest.approx(1.25, abs=1e-12)

    def test_matches_scipy_oracle(self, tn_model):
        oracle = tn_oracle(1.5, 1.0, 3.0)
        for u in (0.05, 0.25, 0.5, 0.75, 0.95):
            assert tn_model.quantile(u) == pytest.approx(oracle.ppf(u),
                                                         abs=1e-8)

    def test_roundtrip_inside_support(self, models):
        for m in models.values():
            for x in np.linspace(0.05, 0.95, 13) * m.support_hi:
                assert m.quantile(m.cdf(float(x))) == pytest.approx(x,
                                                                    abs=1e-8)

    def test_domain_errors(self, tn_model):
        with pytest.raises(ValueError):
            tn_model.quantile(-0.1)
        with pytest.raises(ValueError):
            tn_model.quantile(1.1)
        with pytest.raises(ValueError):
            tn_model.quantile(np.array([0.5, 2.0]))

    @given(u=st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=80, deadline=None)
    def test_galois_cdf_of_quantile(self, u):
        model = TruncatedNormalModel(1.5, 1.0, hi=3.0)
        assert model.cdf(model.quantile(u)) >= u - 1e-9

    @given(x=st.floats(min_value=0.0, max_value=3.0))
    @settings(max_examples=80, deadline=None)
    def test_galois_quantile_of_cdf(self, x):
        model = TruncatedNormalModel(1.5, 1.0, hi=3.0)
        assert model.quantile(model.cdf(x)) <= x + 1e-9


class TestExpectedShortfall:
    def test_zero_commitment(self, models):
        for m in models.values():
            assert m.expected_shortfall(0.0) == 0.0

    def test_uniform_analytic(self, uniform_model):
        # int_0^1 t/2 dt = 0.25
        assert uniform_model.expected_shortfall(1.0) == pytest.approx(
            0.25, abs=1e-10)

    def test_full_support_equals_commitment_minus_mean(self, tn_model):
        # symmetric truncation about 1.5 -> mean 1.5
        assert tn_model.expected_shortfall(3.0) == pytest.approx(1.5,
                                                                 abs=1e-9)

    def test_linear_beyond_support(self, models):
        for m in models.values():
            hi = m.support_hi
            base = m.expected_shortfall(hi)
            assert m.expected_shortfall(hi + 0.7) == pytest.approx(
                base + 0.7, abs=1e-9)

    @pytest.mark.parametrize("kind", ["tn", "uniform", "empirical"])
    def test_monte_carlo_oracle(self, models, kind):
        model = models[kind]
        rng = np.random.default_rng(42)
        if kind == "tn":
            draws = tn_oracle(1.5, 1.0, 3.0).rvs(size=1_000_000,
                                                 random_state=rng)
        elif kind == "uniform":
            draws = rng.uniform(0.0, 2.0, 1_000_000)
        else:
            # independent inverse-transform through numpy's interpolation
            kx = np.concatenate(([0.0], np.sort(model.samples)))
            n = len(kx) - 1
            ky = np.concatenate(([0.0], np.arange(1, n + 1) / (n + 1)))
            ky[-1] = 1.0
            draws = np.interp(rng.uniform(0, 1, 1_000_000), ky, kx)
        for x in (0.4 * model.support_hi, 0.8 * model.support_hi):
            sample = np.clip(x - draws, 0.0, None)
            se = sample.std() / np.sqrt(sample.size)
            assert model.expected_shortfall(float(x)) == pytest.approx(
                sample.mean(), abs=3 * se)

    def test_convexity(self, models):
        xs = np.linspace(0.0, 3.2, 60)
        for m in models.values():
            vals = m.shortfall_curve(xs)
            slopes = np.diff(vals) / np.diff(xs)
            assert np.all(np.diff(slopes) >= -1e-9)

    def test_curve_matches_scalar(self, models):
        rng = np.random.default_rng(3)
        xs = rng.uniform(0.0, 3.5, 25)
        for m in models.values():
            np.testing.assert_allclose(
                m.shortfall_curve(xs),
                [m.expected_shortfall(float(x)) for x in xs], atol=1e-9)

    def test_negative_commitment_rejected(self, tn_model):
        with pytest.raises(ValueError):
            tn_model.expected_shortfall(-0.1)


class TestOptimalCommitment:
    def test_zero_price_commits_nothing(self, models):
        for m in models.values():
            assert m.optimal_commitment(0.0, 1.5) == 0.0

    def test_price_at_penalty_commits_everything(self, models):
        for m in models.values():
            assert m.optimal_commitment(1.5, 1.5) == pytest.approx(
                m.support_hi, abs=1e-9)
            assert m.optimal_commitment(2.0, 1.5) == pytest.approx(
                m.support_hi, abs=1e-9)

    def test_symmetric_half_fractile(self, tn_model):
        assert tn_model.optimal_commitment(0.75, 1.5) == pytest.approx(
            1.5, abs=1e-9)

    def test_non_decreasing_in_price(self, models):
        prices = np.linspace(0.0, 2.0, 50)
        for m in models.values():
            vals = m.optimal_commitment(prices, 1.5)
            assert np.all(np.diff(vals) >= -1e-12)

    def test_invalid_penalty(self, tn_model):
        with pytest.raises(ValueError):
            tn_model.optimal_commitment(0.5, 0.0)
        with pytest.raises(ValueError):
            tn_model.optimal_commitment(0.5, -1.0)

    @pytest.mark.parametrize("case", range(12))
    def test_maximizes_profit_on_grid(self, case):
        """Grid search never beats the critical-fractile commitment."""
        rng = np.random.default_rng(100 + case)
        kind = case % 3
        if kind == 0:
            hi = rng.uniform(1.0, 4.0)
            model = TruncatedNormalModel(rng.uniform(0.3, 0.9) * hi,
                                         rng.uniform(0.2, 1.5), hi=hi)
        elif kind == 1:
            model = UniformModel(hi=rng.uniform(0.5, 4.0))
        else:
            model = EmpiricalModel(rng.uniform(0.1, 3.0, rng.integers(5, 40)))
        penalty = rng.uniform(0.5, 3.0)
        price = rng.uniform(0.0, penalty * 1.2)
        hi = model.support_hi
        grid = np.arange(0.0, hi * (1 + 1e-12), 1e-3 * hi)
        profits = price * grid - penalty * model.shortfall_curve(grid)
        star = model.optimal_commitment(price, penalty)
        star_profit = price * star - penalty * model.expected_shortfall(star)
        best = profits.max()
        scale = max(abs(best), 1e-12)
        assert star_profit >= best - 1e-9 * scale
        assert abs(grid[int(np.argmax(profits))] - star) <= 1e-3 * hi + 1e-12


class TestCommitmentWeightedIntegral:
    def test_uniform_analytic(self):
        # 2 * int_0^1 t * (1/2) dt = 0.5
        model = UniformModel(hi=2.0)
        assert model.commitment_weighted_integral(1.0, 2.0) == pytest.approx(
            0.5, abs=1e-10)

    def test_vanishes_with_price(self, tn_model):
        small = tn_model.commitment_weighted_integral(1e-6, 1.5)
        assert 0.0 <= small < 1e-6

    def test_positive(self, models):
        for m in models.values():
            assert m.commitment_weighted_integral(0.75, 1.5) > 0.0

    def test_profit_identity(self, models):
        """Equals price * commitment - penalty * shortfall at the optimum."""
        for m in models.values():
            for price, penalty in ((0.4, 1.5), (0.9, 1.1), (1.5, 1.5)):
                x = m.optimal_commitment(price, penalty)
                direct = price * x - penalty * m.expected_shortfall(x)
                assert m.commitment_weighted_integral(
                    price, penalty) == pytest.approx(direct, abs=5e-7)

    def test_domain_errors(self, tn_model):
        with pytest.raises(ValueError):
            tn_model.commitment_weighted_integral(0.0, 1.5)
        with pytest.raises(ValueError):
            tn_model.commitment_weighted_integral(-0.5, 1.5)
        with pytest.raises(ValueError):
            tn_model.commitment_weighted_integral(2.0, 1.5)


class TestConstruction:
    def test_sigma_must_be_positive(self):
        with pytest.raises(ValueError):
            TruncatedNormalModel(1.0, 0.0, hi=2.0)

    def test_support_must_start_at_zero(self):
        with pytest.raises(ValueError):
            TruncatedNormalModel(1.0, 1.0, lo=0.5, hi=2.0)

    def test_upper_bound_required(self):
        with pytest.raises(ValueError):
            TruncatedNormalModel(1.0, 1.0)

    def test_empirical_needs_two_samples(self):
        with pytest.raises(ValueError):
            EmpiricalModel([1.0])
        with pytest.raises(ValueError):
            EmpiricalModel([])

    def test_empirical_rejects_negative_and_nonfinite(self):
        with pytest.raises(ValueError):
            EmpiricalModel([1.0, -0.2])
        with pytest.raises(ValueError):
            EmpiricalModel([1.0, np.inf])

    def test_scale_positive(self):
        with pytest.raises(ValueError):
            EmpiricalModel([1.0, 2.0], scale=0.0)

    def test_uniform_positive_support(self):
        with pytest.raises(ValueError):
            UniformModel(hi=0.0)


class TestEmpiricalConventions:
    def test_plotting_positions_at_order_statistics(self):
        samples = [0.4, 0.9, 1.7, 2.3, 3.1]
        model = EmpiricalModel(samples)
        n = len(samples)
        for k, v in enumerate(samples[:-1], start=1):
            assert model.cdf(v) == pytest.approx(k / (n + 1), abs=1e-12)
        assert model.cdf(samples[-1]) == pytest.approx(1.0, abs=1e-12)

    def test_scaling_equivariance_exact(self):
        samples = [0.4, 0.9, 1.7, 2.3, 3.1]
        unit = EmpiricalModel(samples)
        scaled = EmpiricalModel(samples, scale=2.5)
        for u in np.linspace(0.0, 1.0, 21):
            assert scaled.quantile(float(u)) == 2.5 * unit.quantile(float(u))

    def test_tied_samples_form_near_step(self):
        model = EmpiricalModel([0.8, 0.8, 0.8, 0.8])
        # CDF ramps to 1/(n+1) just below the tie, jumps to 1 at it
        assert model.cdf(0.8) == pytest.approx(1.0)
        assert model.cdf(0.8 - 1e-9) == pytest.approx(0.2, abs=1e-6)
        # flat-region quantile convention: everything above the ramp maps to
        # the atom
        assert model.quantile(0.5) == pytest.approx(0.8, abs=1e-12)
        assert model.quantile(1.0) == pytest.approx(0.8, abs=1e-12)
        # below the atom the ramp inverts linearly: u=0.1 is half the ramp
        assert model.quantile(0.1) == pytest.approx(0.4, abs=1e-12)

    def test_pdf_piecewise_constant(self):
        model = EmpiricalModel([1.0, 2.0, 4.0])
        # slope of the first segment: (1/4) / 1.0
        assert model.pdf(0.5) == pytest.approx(0.25, abs=1e-12)
        assert model.pdf(1.5) == pytest.approx(0.25, abs=1e-12)
        assert model.pdf(4.5) == 0.0

    def test_sample_within_support(self, solar_model):
        draws = solar_model.sample(np.random.default_rng(0), 1000)
        assert draws.min() >= 0.0
        assert draws.max() <= solar_model.support_hi + 1e-12


class TestMean:
    def test_symmetric_truncation(self, tn_model):
        assert tn_model.mean() == pytest.approx(1.5, abs=1e-9)

    def test_uniform(self, uniform_model):
        assert uniform_model.mean() == pytest.approx(1.0, abs=1e-10)

    def test_matches_sample_mean(self, solar_model):
        draws = solar_model.sample(np.random.default_rng(5), 400_000)
        se = draws.std() / np.sqrt(draws.size)
        assert solar_model.mean() == pytest.approx(draws.mean(), abs=4 * se)
