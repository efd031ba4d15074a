import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammainc, gammaincc

from coopcast.numerics import (
    binary_relative_entropy,
    clamp_probability,
    log1mexp,
    log_binomial_pmf,
    log_erlang_cdf_table,
    log_regularized_gamma,
    regularized_lower_gamma,
)


class TestRegularizedLowerGamma:
    def test_zero_shape_is_certain(self):
        assert regularized_lower_gamma(0, 5.0) == 1.0

    def test_exponential_cdf(self):
        assert regularized_lower_gamma(1, 5.0) == pytest.approx(-math.expm1(-5.0), rel=1e-13)
        assert regularized_lower_gamma(1, 5.0) == pytest.approx(0.993262, abs=1e-6)

    def test_exponential_cdf_against_simulation(self):
        rng = np.random.default_rng(11)
        n = 10**7
        emp = np.mean(rng.exponential(size=n) <= 5.0)
        p = regularized_lower_gamma(1, 5.0)
        assert abs(emp - p) < 3 * math.sqrt(p * (1 - p) / n)

    def test_cdf_at_zero(self):
        assert regularized_lower_gamma(2, 0.0) == 0.0

    @pytest.mark.parametrize("k, x", [(-1, 1.0), (2, -0.5)])
    def test_domain_errors(self, k, x):
        with pytest.raises(ValueError):
            regularized_lower_gamma(k, x)

    @pytest.mark.parametrize("k", [1, 2, 5, 17, 50, 300, 2000])
    @pytest.mark.parametrize("ratio", [0.01, 0.3, 0.9, 1.0, 1.1, 2.0, 10.0])
    def test_matches_scipy(self, k, ratio):
        x = ratio * k
        log_p, log_q = log_regularized_gamma(k, x)
        ref_p, ref_q = gammainc(k, x), gammaincc(k, x)
        assert math.exp(log_p) == pytest.approx(ref_p, rel=1e-11, abs=1e-300)
        assert math.exp(log_q) == pytest.approx(ref_q, rel=1e-11, abs=1e-300)

    def test_deep_tail_in_log_domain(self):
        # far below the mean: log P matches mpmath to 1e-12 relative
        k, x = 400, 40.0
        mpmath.mp.dps = 50
        ref = float(mpmath.log(mpmath.gammainc(k, 0, x, regularized=True)))
        assert log_regularized_gamma(k, x)[0] == pytest.approx(ref, rel=1e-12)

    def test_monotone_grid(self):
        xs = np.linspace(0, 60, 121)
        table = np.array([[regularized_lower_gamma(k, x) for x in xs] for k in range(1, 41)])
        assert np.all(np.diff(table, axis=1) >= -1e-15)  # nondecreasing in x
        assert np.all(np.diff(table, axis=0) <= 1e-15)  # nonincreasing in k

    @pytest.mark.parametrize("k", [1, 5, 50])
    def test_matches_simulated_erlang(self, k):
        rng = np.random.default_rng(100 + k)
        n = 10**6
        sums = rng.gamma(k, size=n) if k > 1 else rng.exponential(size=n)
        for x in (0.5 * k, k, 1.5 * k):
            p = regularized_lower_gamma(k, x)
            emp = np.mean(sums <= x)
            assert abs(emp - p) <= 3 * math.sqrt(p * (1 - p) / n)

    def test_summed_exponentials(self):
        # Erlang via literal sums rather than a gamma sampler
        rng = np.random.default_rng(5)
        n = 10**6
        sums = rng.exponential(size=(n, 5)).sum(axis=1)
        p = regularized_lower_gamma(5, 4.0)
        assert abs(np.mean(sums <= 4.0) - p) <= 3 * math.sqrt(p * (1 - p) / n)


class TestErlangTable:
    @pytest.mark.parametrize("x", [0.3, 7.5, 60.0, 606.5])
    def test_agrees_with_scalar(self, x):
        kmax = 1000
        log_p, log_q = log_erlang_cdf_table(kmax, x)
        for k in [0, 1, 2, 5, 30, 59, 60, 61, 200, 600, 607, 800, 1000]:
            sp, sq = log_regularized_gamma(k, x)
            for a, b in ((log_p[k], sp), (log_q[k], sq)):
                if math.isinf(b):
                    assert a == b
                elif b > -700:
                    assert a == pytest.approx(b, rel=1e-9, abs=1e-13)

    def test_complement_precision_when_small(self):
        # log(1 - P) for tiny P must resolve -P, not round to 0 or to noise
        log_p, log_q = log_erlang_cdf_table(400, 50.0)
        p = math.exp(log_p[300])
        assert p < 1e-100
        assert log_q[300] == -p or log_q[300] == pytest.approx(-p, rel=1e-12)

    def test_zero_argument(self):
        log_p, log_q = log_erlang_cdf_table(3, 0.0)
        assert list(np.exp(log_p)) == [1.0, 0.0, 0.0, 0.0]
        assert list(np.exp(log_q)) == [0.0, 1.0, 1.0, 1.0]


class TestLogBinomialPmf:
    def test_symmetric_coin(self):
        assert log_binomial_pmf(2, 1, 0.5) == pytest.approx(math.log(0.5), abs=1e-15)

    def test_all_fail_by_enumeration(self):
        a = 0.606531
        enum = sum(
            math.prod(a if b else 1 - a for b in bits)
            for bits in ((0, 0), (0, 1), (1, 0), (1, 1))
            if sum(bits) == 0
        )
        assert math.exp(log_binomial_pmf(2, 0, a)) == pytest.approx(enum, rel=1e-13)
        assert enum == pytest.approx(0.154818, abs=1e-6)

    def test_no_overflow_corner(self):
        assert log_binomial_pmf(1000, 1000, 0.5) == pytest.approx(1000 * math.log(0.5), rel=1e-14)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            log_binomial_pmf(5, 6, 0.3)
        with pytest.raises(ValueError):
            log_binomial_pmf(5, -1, 0.3)

    @pytest.mark.parametrize("K", [1, 7, 100, 1000, 10**4])
    @pytest.mark.parametrize("alpha", [0.01, 0.37, 0.5, 0.93])
    def test_sums_to_one(self, K, alpha):
        total = np.exp(log_binomial_pmf(K, np.arange(K + 1), alpha)).sum()
        assert abs(total - 1.0) < 1e-12

    def test_matches_exact_integer_arithmetic(self):
        K, a = 30, 0.3
        for k in range(K + 1):
            ref = math.comb(K, k) * a**k * (1 - a) ** (K - k)
            assert math.exp(log_binomial_pmf(K, k, a)) == pytest.approx(ref, rel=1e-12)


class TestRelativeEntropy:
    def test_identical(self):
        assert binary_relative_entropy(0.5, 0.5) == 0.0

    def test_quarter(self):
        assert binary_relative_entropy(0.5, 0.25) == pytest.approx(0.5 * math.log(4 / 3), rel=1e-14)
        assert binary_relative_entropy(0.5, 0.25) == pytest.approx(0.143841, abs=1e-6)

    def test_operating_point_against_mpmath(self):
        mpmath.mp.dps = 40
        p, q = mpmath.mpf("0.488836"), mpmath.mpf("0.606531")
        ref = float(p * mpmath.log(p / q) + (1 - p) * mpmath.log((1 - p) / (1 - q)))
        assert binary_relative_entropy(0.488836, 0.606531) == pytest.approx(ref, rel=1e-12)
        assert ref == pytest.approx(0.0283096, abs=1e-7)

    @pytest.mark.parametrize("p, q", [(0.0, 0.5), (0.5, 1.0), (1.0, 0.2)])
    def test_boundaries_rejected(self, p, q):
        with pytest.raises(ValueError):
            binary_relative_entropy(p, q)

    def test_nonnegative_random_pairs(self):
        rng = np.random.default_rng(3)
        p, q = rng.uniform(size=(2, 10**5))
        p, q = clamp_probability(p), clamp_probability(q)
        d = binary_relative_entropy(p, q)
        assert np.all(d >= 0)
        assert np.all(binary_relative_entropy(p, p) == 0.0)

    @given(st.floats(1e-12, 1 - 1e-12), st.floats(1e-12, 1 - 1e-12))
    @settings(max_examples=300)
    def test_nonnegative_property(self, p, q):
        assert binary_relative_entropy(p, q) >= 0.0


def test_log1mexp_branches():
    a = np.array([-1e-20, -0.1, -1.0, -50.0])
    ref = [math.log(-math.expm1(v)) for v in a]
    assert np.allclose(log1mexp(a), ref, rtol=1e-14)
    assert log1mexp(0.0) == -math.inf
    assert log1mexp(-math.inf) == 0.0
