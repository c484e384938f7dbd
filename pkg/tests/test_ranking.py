import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from signavg.problems import custom_problem, make_additive_ellipsoid
from signavg.ranking import (
    WeightScheme,
    conventional_weights,
    is_transitive,
    pairwise_sign_matrix,
    scores,
    sign_matrix_from_samples,
    tie_aware_weights,
)
from signavg.stable import StableParams, sample


def noiseless():
    return custom_problem(1, lambda x: float(x[0]), [(lambda x: 0.0, StableParams(1.0))])


@st.composite
def keys_and_scheme(draw):
    lam = draw(st.integers(1, 20))
    w = sorted(draw(st.lists(st.floats(-10, 10), min_size=lam, max_size=lam)), reverse=True)
    keys = draw(st.lists(st.integers(0, 5), min_size=lam, max_size=lam))
    return np.array(keys), WeightScheme(tuple(w))


class TestWeightScheme:
    def test_rejects_increasing(self):
        with pytest.raises(ValueError):
            WeightScheme((0.1, 0.5))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            WeightScheme(())


class TestSignMatrix:
    def test_noiseless_order(self, rng):
        pop = [np.array([v]) for v in (3.0, 1.0, 4.0, 2.0)]
        m = pairwise_sign_matrix(noiseless(), pop, 3, rng)
        expected = np.sign(np.subtract.outer([3, 1, 4, 2], [3, 1, 4, 2]))
        assert np.array_equal(m, expected)
        assert is_transitive(m)

    @pytest.mark.parametrize("independent", [False, True])
    def test_antisymmetric_zero_diagonal(self, independent, rng):
        p = make_additive_ellipsoid(2, StableParams(0.7))
        pop = rng.normal(size=(6, 2))
        m = pairwise_sign_matrix(p, pop, 4, rng, independent=independent)
        assert np.array_equal(m, -m.T) and np.all(np.diag(m) == 0)

    def test_pair_with_k1_is_one_difference(self):
        p = make_additive_ellipsoid(2, StableParams(1.0))
        pop = [np.zeros(2), np.ones(2)]
        m = pairwise_sign_matrix(p, pop, 1, np.random.default_rng(4))
        rng = np.random.default_rng(4)
        noise = p.channels[0].params
        f0 = p.h(pop[0]) + sample(noise, rng)
        f1 = p.h(pop[1]) + sample(noise, rng)
        assert m[0, 1] == np.sign(f0 - f1)

    def test_monotone_transform_invariance(self):
        p = make_additive_ellipsoid(3, StableParams(0.6))
        pop = np.random.default_rng(1).normal(size=(8, 3))
        a = pairwise_sign_matrix(p, pop, 5, np.random.default_rng(2))
        b = pairwise_sign_matrix(p.with_transform(lambda y: np.arctan(y) + y**3), pop, 5, np.random.default_rng(2))
        assert np.array_equal(a, b)

    def test_intransitive_tables_exist_and_keep_weight_sum(self):
        w = WeightScheme((0.5, 0.3, 0.2, 0.0))
        for seed in range(200):
            table = np.random.default_rng(seed).normal(size=(4, 3))
            m = sign_matrix_from_samples(table)
            if not is_transitive(m):
                wbar = tie_aware_weights(scores(m), w)
                assert wbar.sum() == pytest.approx(1.0, abs=1e-12)
                return
        pytest.fail("no intransitive sign matrix in 200 seeds")


class TestScores:
    def test_ordered(self):
        m = np.sign(np.subtract.outer([1, 2, 3, 4], [1, 2, 3, 4]))
        assert scores(m).tolist() == [1, 2, 3, 4]

    def test_all_tied(self):
        assert scores(np.zeros((5, 5), dtype=np.int8)).tolist() == [5] * 5

    def test_singleton(self):
        assert scores(np.zeros((1, 1))).tolist() == [1]


class TestTieAwareWeights:
    def test_distinct_keys_conventional(self):
        w = WeightScheme((0.5, 0.3, 0.2))
        keys = np.array([2.0, 0.5, 1.0])
        assert np.array_equal(tie_aware_weights(keys, w), conventional_weights(keys, w))
        assert tie_aware_weights(keys, w).tolist() == [0.2, 0.5, 0.3]

    def test_all_equal(self):
        wbar = tie_aware_weights([7, 7, 7], WeightScheme((0.6, 0.3, 0.1)))
        assert wbar == pytest.approx([1 / 3] * 3, abs=1e-15)

    def test_two_blocks(self):
        wbar = tie_aware_weights([0, 0, 5, 5], WeightScheme((4, 3, 2, 1)))
        assert wbar.tolist() == [3.5, 3.5, 1.5, 1.5]

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            tie_aware_weights([1, 2], WeightScheme((1.0,)))

    @given(keys_and_scheme())
    def test_sum_preserved(self, ks):
        keys, scheme = ks
        scale = max(1.0, float(np.abs(scheme.w).sum()))
        assert abs(tie_aware_weights(keys, scheme).sum() - sum(scheme.w)) <= 1e-12 * scale

    @given(keys_and_scheme())
    def test_ties_share_weight(self, ks):
        keys, scheme = ks
        wbar = tie_aware_weights(keys, scheme)
        for k in np.unique(keys):
            assert len(set(wbar[keys == k].tolist())) == 1

    @given(keys_and_scheme(), st.randoms())
    def test_permutation_equivariance(self, ks, rnd):
        keys, scheme = ks
        perm = list(range(len(keys)))
        rnd.shuffle(perm)
        assert np.array_equal(tie_aware_weights(keys[perm], scheme), tie_aware_weights(keys, scheme)[perm])

    @given(st.permutations(list(range(8))))
    def test_transitive_matrix_gives_conventional(self, order):
        values = np.array(order, dtype=float)
        m = np.sign(np.subtract.outer(values, values)).astype(np.int8)
        scheme = WeightScheme(tuple(np.linspace(1.0, 0.0, 8)))
        assert np.array_equal(tie_aware_weights(scores(m), scheme), conventional_weights(values, scheme))
