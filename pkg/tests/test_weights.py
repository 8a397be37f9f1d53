import math

import numpy as np
import pytest
from scipy import stats

from jurylab.measure import MeasureSpec, affine, dirac, lebesgue, moment, sample
from jurylab.streams import generator
from jurylab.weights import (
    BoundedPoly,
    ExpertRule,
    LogOdds,
    StochasticPoly,
    TruncatedGaussianSpec,
    UnitWeights,
    deterministic_weight,
    drift,
    f_function,
    find_k,
    moment_criterion,
    sample_weight,
    truncated_normal_mean,
)

DOWN = affine(-2.0)  # density 2(1-x)
T43 = StochasticPoly(W=100.0, k=2, sigma_w=99.0 / 50.0)


class TestDeterministicWeight:
    def test_unit(self):
        assert deterministic_weight(UnitWeights(), 0.37) == 1.0

    def test_log_odds_even(self):
        assert deterministic_weight(LogOdds(), 0.5) == 0.0

    def test_log_odds_point_nine(self):
        assert deterministic_weight(LogOdds(), 0.9) == pytest.approx(math.log(9.0), abs=1e-12)

    def test_log_odds_clamp(self):
        w = deterministic_weight(LogOdds(clamp=1e-6), 1.0)
        assert math.isfinite(w)
        assert w == pytest.approx(math.log((1 - 1e-6) / 1e-6), abs=1e-9)

    def test_bounded_poly_endpoints(self):
        scheme = BoundedPoly(W=10.0, k=2)
        assert deterministic_weight(scheme, 0.0) == 1.0
        assert deterministic_weight(scheme, 1.0) == 10.0

    def test_expert_indicator(self):
        scheme = ExpertRule(threshold=0.8)
        assert deterministic_weight(scheme, 0.9) == 1.0
        assert deterministic_weight(scheme, 0.6) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            ExpertRule(threshold=0.5)
        with pytest.raises(ValueError):
            BoundedPoly(W=1.0, k=1)
        with pytest.raises(ValueError):
            StochasticPoly(W=10.0, k=1, sigma_w=0.0)


class TestTruncatedNormalMean:
    def test_symmetric_is_zero(self):
        assert truncated_normal_mean(TruncatedGaussianSpec(1.7, -2.3, 2.3)) == 0.0

    def test_half_normal(self):
        v = truncated_normal_mean(TruncatedGaussianSpec(1.0, 0.0, math.inf))
        assert v == pytest.approx(math.sqrt(2.0 / math.pi), abs=1e-12)

    def test_direct_formula_case(self):
        # sigma=1, (a,b)=(-1,2): (phi(1)-phi(2)) / (Phi(2)-Phi(-1))
        v = truncated_normal_mean(TruncatedGaussianSpec(1.0, -1.0, 2.0))
        phi = lambda z: math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        expected = (phi(1.0) - phi(2.0)) / (stats.norm.cdf(2.0) - stats.norm.cdf(-1.0))
        assert v == pytest.approx(expected, abs=1e-12)
        assert v == pytest.approx(0.2296371790913290, abs=1e-12)

    @pytest.mark.parametrize(
        "a,b", [(30.0, 38.0), (-38.0, -30.0), (35.0, 36.0), (0.0, 1e-9), (-38.0, 38.0)]
    )
    def test_extreme_intervals_finite(self, a, b):
        v = truncated_normal_mean(TruncatedGaussianSpec(1.0, a, b))
        assert math.isfinite(v)
        assert a - 1e-7 <= v <= b + 1e-7

    def test_far_tail_value(self):
        # conditioned far right tail behaves like a + 1/a
        v = truncated_normal_mean(TruncatedGaussianSpec(1.0, 30.0, 38.0))
        assert v == pytest.approx(30.0 + 1.0 / 30.0, abs=1e-3)

    def test_matches_monte_carlo(self):
        rng = np.random.default_rng(8)
        cases = [(1.0, -1.0, 1.0), (1.0, 0.0, math.inf), (0.5, -0.3, 2.0)]
        for _ in range(47):
            sigma = float(rng.uniform(0.1, 5.0))
            a = float(rng.uniform(-6.0, 4.0)) * sigma
            b = a + float(rng.uniform(0.1, 8.0)) * sigma
            cases.append((sigma, a, b))
        for sigma, a, b in cases:
            analytic = truncated_normal_mean(TruncatedGaussianSpec(sigma, a, b))
            u = generator(hash((sigma, a, b)) & 0xFFFF).random(1_000_000)
            draws = sigma * stats.truncnorm.ppf(u, a / sigma, b / sigma)
            se = draws.std() / 1000.0
            assert abs(draws.mean() - analytic) <= 3.0 * se + 1e-12


class TestFFunction:
    def test_even_odds_zero(self):
        for x in (0.5, 3.0, 50.0):
            assert f_function(x, 0.5) == 0.0

    def test_identity_with_truncated_mean(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            x = float(rng.uniform(0.5, 60.0))
            p = float(rng.uniform(0.0, 1.0))
            sigma = float(rng.uniform(0.2, 3.0))
            w_range = sigma * x  # W - 1
            lhs = w_range * f_function(x, p)
            rhs = truncated_normal_mean(
                TruncatedGaussianSpec(sigma, -p * x * sigma, (1.0 - p) * x * sigma)
            )
            assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_deep_tail_no_nan(self):
        v = f_function(50.0, 0.25)
        assert math.isfinite(v)
        assert abs(v) <= 1e-30

    def test_requires_positive_x(self):
        with pytest.raises(ValueError):
            f_function(0.0, 0.3)


class TestMomentCriterion:
    def test_uniform(self):
        assert moment_criterion(lebesgue(), 1) == pytest.approx(1.0 / 6.0, abs=1e-14)

    def test_decreasing_density(self):
        assert abs(moment_criterion(DOWN, 1)) < 1e-14
        assert moment_criterion(DOWN, 2) == pytest.approx(1.0 / 30.0, abs=1e-14)

    def test_point_mass_at_one(self):
        for k in (1, 3, 10):
            assert moment_criterion(dirac(1.0), k) == pytest.approx(1.0, abs=1e-15)

    def test_find_k(self):
        assert find_k(lebesgue()) == 1
        assert find_k(DOWN) == 2
        coin = MeasureSpec(atoms=((0.0, 0.5), (1.0, 0.5)))
        assert find_k(coin) == 1

    def test_find_k_none_when_no_upper_mass(self):
        low = MeasureSpec(pieces=((0.0, 0.5, 2.0, 0.0),))
        assert find_k(low, k_max=40) is None

    def test_scaled_criterion_dominated_by_mass_at_one(self):
        mix = MeasureSpec(atoms=((0.3, 0.7), (1.0, 0.3)))
        ratios = []
        for k in (5, 10, 20):
            ratios.append(2.0**k * moment_criterion(mix, k) / (0.3 * 2.0**k))
        deviations = [abs(r - 1.0) for r in ratios]
        assert deviations[0] > deviations[1] > deviations[2]
        assert deviations[-1] < 1e-8


class TestSampleWeight:
    def test_bounds_one_million(self):
        rng = generator(4)
        p = rng.random(1_000_000)
        w = sample_weight(T43, p, rng)
        assert w.min() >= 1.0
        assert w.max() <= T43.W

    def test_vanishing_noise(self):
        scheme = StochasticPoly(W=10.0, k=1, sigma_w=1e-9)
        w = sample_weight(scheme, 0.3, generator(1), size=200)
        assert np.max(np.abs(w - 3.7)) < 1e-6

    def test_floor_at_p_zero(self):
        scheme = StochasticPoly(W=10.0, k=1, sigma_w=2.0)
        w = sample_weight(scheme, 0.0, generator(2), size=100_000)
        assert w.min() >= 1.0

    def test_symmetric_truncation_mean(self):
        scheme = StochasticPoly(W=10.0, k=1, sigma_w=2.0)
        w = sample_weight(scheme, 0.5, generator(3), size=1_000_000)
        se = w.std() / 1000.0
        assert abs(w.mean() - 5.5) <= 3.0 * se

    def test_requires_stochastic_scheme(self):
        with pytest.raises(TypeError):
            sample_weight(BoundedPoly(W=10.0, k=1), 0.5, generator(0))


class TestDrift:
    def test_perfect_voters_limit(self):
        scheme = StochasticPoly(W=1.0 + 1e-9, k=1, sigma_w=1.0)
        assert drift(dirac(1.0), scheme) == pytest.approx(1.0, abs=1e-6)

    def test_reference_config(self):
        # frozen after cross-checking against a 10M-draw sampled-weight
        # average on two seeds (agreement within 0.0015)
        assert drift(DOWN, T43) == pytest.approx(2.660822974575, abs=1e-9)

    def test_matches_sampled_weights(self):
        rng = generator(11)
        value = drift(DOWN, T43)
        p = sample(DOWN, rng, 2_000_000)
        v = sample_weight(T43, p, rng) * (2.0 * p - 1.0)
        se = v.std() / math.sqrt(len(v))
        assert abs(v.mean() - value) <= 3.0 * se

    def test_large_x_reaches_moment_limit(self):
        closed = 2.0 * moment(DOWN, 1) - 1.0 + 99.0 * moment_criterion(DOWN, 2)
        deltas = []
        for x in (1e3, 1e4, 1e5):
            scheme = StochasticPoly(W=100.0, k=2, sigma_w=99.0 / x)
            deltas.append(abs(drift(DOWN, scheme) - closed))
        assert deltas[0] > deltas[1] > deltas[2]
        assert deltas[-1] < 1e-5

    def test_increasing_in_w_when_criterion_positive(self):
        assert moment_criterion(DOWN, 2) > 0.0
        values = [
            drift(DOWN, StochasticPoly(W=w, k=2, sigma_w=2.0)) for w in (5.0, 10.0, 25.0, 100.0)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_quadrature_order_stability(self):
        assert drift(DOWN, T43, order=64) == pytest.approx(
            drift(DOWN, T43, order=128), abs=1e-9
        )

    def test_atoms_integrated_exactly(self):
        coin = MeasureSpec(atoms=((0.0, 0.5), (1.0, 0.5)))
        scheme = StochasticPoly(W=10.0, k=1, sigma_w=1e-6)
        # (1/2)(-1)(w=1 ... error ~ half-normal at the boundary) ~ base term
        base = 2.0 * moment(coin, 1) - 1.0 + 9.0 * moment_criterion(coin, 1)
        assert drift(coin, scheme) == pytest.approx(base, abs=1e-5)
