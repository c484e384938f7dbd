import numpy as np
import pytest

from signavg.comparators import (
    ComparatorKind,
    Method,
    compare_average,
    compare_batch,
    compare_median,
    compare_sign_average,
    estimate_oep,
    sign_of_median,
    sign_of_sign_average,
)
from signavg.problems import custom_problem, make_additive_ellipsoid
from signavg.stable import StableParams


def noiseless(dimension=2):
    return custom_problem(dimension, lambda x: float(np.sum(x)), [(lambda x: 0.0, StableParams(1.5))])


X1, X2 = np.zeros(2), np.array([1.0, 0.0])


class TestSingleComparisons:
    @pytest.mark.parametrize("K", [1, 2, 7])
    def test_noiseless(self, K, rng):
        p = noiseless()
        assert compare_average(p, X1, X2, K, rng) == -1
        assert compare_sign_average(p, X2, X1, K, rng) == 1
        assert compare_median(p, X1, X2, K, rng) == -1

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_k1_all_methods_agree_bitwise(self, alpha):
        p = make_additive_ellipsoid(2, StableParams(alpha))
        out = [compare_batch(ComparatorKind(m, 1), p, X1, X2, 5000, np.random.default_rng(3)) for m in Method]
        assert np.array_equal(out[0], out[1]) and np.array_equal(out[0], out[2])

    def test_equal_points_unbiased(self):
        p = make_additive_ellipsoid(2, StableParams(1.0))
        out = compare_batch(ComparatorKind("AVE", 3), p, X1, X1, 10**5, np.random.default_rng(0))
        assert abs(out.mean()) <= 0.01
        assert set(np.unique(out)) <= {-1, 1}

    def test_invalid_k(self):
        with pytest.raises(ValueError):
            ComparatorKind("SA", 0)


class TestStatistics:
    def test_median_odd(self):
        d = np.array([-3.0, -1.0, 5.0])
        assert sign_of_median(d, np.zeros(3)) == -1

    def test_median_even_midpoint(self):
        assert sign_of_median(np.array([-2.0, 2.0]), np.zeros(2)) == 0

    def test_sign_average_balanced(self):
        assert sign_of_sign_average(np.array([1.0, -1.0, 2.0, -2.0]), np.zeros(4)) == 0

    @pytest.mark.parametrize("K", [1, 3, 4, 9])
    def test_monotone_transform_invariance(self, K):
        p = make_additive_ellipsoid(2, StableParams(0.8))
        g = p.with_transform(lambda y: y**3 + y)
        for method in (Method.SA, Method.MED):
            kind = ComparatorKind(method, K)
            a = compare_batch(kind, p, X1, X2, 2000, np.random.default_rng(11))
            b = compare_batch(kind, g, X1, X2, 2000, np.random.default_rng(11))
            if method is Method.SA or K % 2:
                assert np.array_equal(a, b)
            else:
                # even-K midpoints can move, but only where the two middle differences straddle 0
                assert np.mean(a == b) > 0.95


class TestEstimateOep:
    def test_noiseless_is_one(self, rng):
        est = estimate_oep(ComparatorKind("SA", 5), noiseless(), X1, X2, 1000, -1, rng)
        assert est.p == 1.0 and est.stderr == 0.0

    def test_zero_reference(self, rng):
        p = make_additive_ellipsoid(2, StableParams(1.5))
        est = estimate_oep(ComparatorKind("AVE", 4), p, X1, X1, 5000, 0, rng)
        assert est.p == 0.0 and est.stderr == 0.0

    def test_cauchy_flat_in_k(self):
        p = make_additive_ellipsoid(2, StableParams(1.0))
        rng = np.random.default_rng(21)
        est = [estimate_oep(ComparatorKind("AVE", K), p, X1, X2, 40_000, -1, rng) for K in (1, 10, 50)]
        for a in est:
            for b in est:
                assert abs(a.p - b.p) <= 3 * np.hypot(a.stderr, b.stderr)

    def test_stderr_binomial(self, rng):
        p = make_additive_ellipsoid(2, StableParams(2.0))
        est = estimate_oep(ComparatorKind("AVE", 1), p, X1, X2, 10_000, -1, rng)
        assert est.stderr == pytest.approx(np.sqrt(est.p * (1 - est.p) / 10_000))
