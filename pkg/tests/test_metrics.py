import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from signavg.metrics import UndefinedCorrelationError, kendall_tau_b, moving_average
from signavg.validation import brute_force_tau_b

series = st.integers(2, 20).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 5), min_size=n, max_size=n),
                        st.lists(st.integers(0, 5), min_size=n, max_size=n))
).filter(lambda p: len(set(p[0])) > 1 and len(set(p[1])) > 1)


class TestTauB:
    def test_identical_order(self):
        assert kendall_tau_b([1, 2, 3], [10, 20, 30]) == 1.0

    def test_reversed(self):
        assert kendall_tau_b([1, 2, 3], [3, 2, 1]) == -1.0

    def test_ties_match_brute_force(self):
        xs, ys = [1, 1, 2, 3], [1, 2, 2, 3]
        assert kendall_tau_b(xs, ys) == pytest.approx(brute_force_tau_b(xs, ys), abs=1e-15)
        assert kendall_tau_b(xs, ys) == pytest.approx(4 / 5)

    def test_all_tied_is_undefined(self):
        with pytest.raises(UndefinedCorrelationError):
            kendall_tau_b([1, 1, 1], [1, 2, 3])

    def test_rejects_short_or_ragged(self):
        with pytest.raises(ValueError):
            kendall_tau_b([1], [1])
        with pytest.raises(ValueError):
            kendall_tau_b([1, 2], [1, 2, 3])

    @given(series)
    def test_symmetry_and_oracle(self, pair):
        xs, ys = pair
        t = kendall_tau_b(xs, ys)
        assert t == kendall_tau_b(ys, xs)
        assert abs(t - brute_force_tau_b(xs, ys)) <= 1e-12
        assert -1.0 <= t <= 1.0

    @given(series)
    def test_monotone_invariance(self, pair):
        xs, ys = pair
        gx = [math.exp(v) for v in xs]
        gy = [v**3 + 2 * v for v in ys]
        assert kendall_tau_b(gx, gy) == pytest.approx(kendall_tau_b(xs, ys), abs=1e-15)

    def test_thousand_random_inputs(self):
        rng = np.random.default_rng(0)
        for i in range(1000):
            if i % 2:
                xs, ys = rng.integers(0, 6, 20), rng.integers(0, 6, 20)
            else:
                xs, ys = rng.normal(size=20), rng.normal(size=20)
            assert abs(kendall_tau_b(xs, ys) - brute_force_tau_b(xs.tolist(), ys.tolist())) <= 1e-12


class TestMovingAverage:
    def test_span_one_identity(self):
        s = [3.0, -1.0, 2.5]
        assert moving_average(s, 1).tolist() == s

    def test_constant(self):
        assert moving_average([2.0] * 7, 3).tolist() == [2.0] * 7

    def test_example(self):
        assert moving_average([1, 2, 3, 4], 2).tolist() == [1, 1.5, 2.5, 3.5]

    def test_nan_skipped(self):
        out = moving_average([math.nan, 1.0, math.nan, 3.0], 2)
        assert math.isnan(out[0]) and out[1:].tolist() == [1.0, 1.0, 3.0]

    def test_invalid_span(self):
        with pytest.raises(ValueError):
            moving_average([1.0], 0)
