"""Population ranking from pairwise sign averaging, with tie-aware weights."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .problems import NoisyProblem, evaluate_many


@dataclass(frozen=True)
class WeightScheme:
    w: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.w)
        if len(w) < 1:
            raise ValueError("a weight scheme needs at least one weight")
        if any(a < b for a, b in zip(w, w[1:])):
            raise ValueError("weights must be non-increasing")
        object.__setattr__(self, "w", w)

    def __len__(self):
        return len(self.w)


def sample_table(problem: NoisyProblem, population: Sequence, K: int, rng: np.random.Generator) -> np.ndarray:
    """lambda x K table of noisy evaluations, one row per point, drawn row by row."""
    if K < 1:
        raise ValueError("K must be at least 1")
    return np.stack([evaluate_many(problem, x, K, rng) for x in population])


def sign_matrix_from_samples(samples: np.ndarray) -> np.ndarray:
    """Entry (i, j) = sign(sum_k sign(f_ik - f_jk)) with index-aligned reuse."""
    diff = np.sign(samples[:, None, :] - samples[None, :, :])
    return np.sign(diff.sum(axis=-1)).astype(np.int8)


def pairwise_sign_matrix(problem: NoisyProblem, population: Sequence, K: int, rng: np.random.Generator,
                         independent: bool = False) -> np.ndarray:
    """Sign-averaging comparison matrix for a population.

    By default every point is evaluated K times and the samples are shared by
    all pairs (lambda * K calls).  With ``independent=True`` each unordered
    pair draws fresh samples (lambda (lambda - 1) K calls), which matches the
    i.i.d. setting of the single-pair analysis.
    """
    lam = len(population)
    if lam < 2:
        raise ValueError("need at least two points")
    if not independent:
        return sign_matrix_from_samples(sample_table(problem, population, K, rng))
    matrix = np.zeros((lam, lam), dtype=np.int8)
    for i in range(lam):
        for j in range(i + 1, lam):
            fi = evaluate_many(problem, population[i], K, rng)
            fj = evaluate_many(problem, population[j], K, rng)
            s = np.sign(np.sign(fi - fj).sum())
            matrix[i, j] = s
            matrix[j, i] = -s
    return matrix


def scores(matrix: np.ndarray) -> np.ndarray:
    """R_i = #{j : eta(x_j, x_i) <= 0}, diagonal included."""
    matrix = np.asarray(matrix)
    return np.count_nonzero(matrix <= 0, axis=0)


def tie_aware_weights(keys: Sequence, scheme: WeightScheme) -> np.ndarray:
    """Weights for ascending keys where tied keys share the mean of their rank block.

    With r_lt = #{key_j < key_i} and r_le = #{key_j <= key_i}, point i gets
    mean(w[r_lt:r_le]).  Computed once per distinct key, so ties get
    bitwise-equal weights.
    """
    keys = np.asarray(keys)
    w = np.asarray(scheme.w)
    if keys.shape != (len(w),):
        raise ValueError(f"expected {len(w)} keys, got shape {keys.shape}")
    distinct, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    upper = np.cumsum(counts)
    lower = upper - counts
    block_mean = np.array([w[lo:hi].mean() for lo, hi in zip(lower, upper)])
    return block_mean[inverse.reshape(-1)]


def conventional_weights(keys: Sequence, scheme: WeightScheme) -> np.ndarray:
    """Plain rank weighting: the i-th smallest key gets w_i (ties broken by index)."""
    order = np.argsort(np.asarray(keys), kind="stable")
    out = np.empty(len(order))
    out[order] = scheme.w
    return out


def is_transitive(matrix: np.ndarray) -> bool:
    """True if the strict relation matrix[i, j] < 0 is a strict total order."""
    matrix = np.asarray(matrix)
    lam = len(matrix)
    if np.any((matrix == 0) & ~np.eye(lam, dtype=bool)):
        return False
    wins = np.count_nonzero(matrix < 0, axis=1)
    return sorted(wins.tolist()) == list(range(lam))
