"""Pairwise order estimators: explicit averaging, sign averaging, sample median."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .problems import NoisyProblem, evaluate_many

# bound on trials * K evaluations held in memory per point at once
_CHUNK_EVALS = 1 << 21


class Method(str, enum.Enum):
    AVE = "AVE"
    SA = "SA"
    MED = "MED"


@dataclass(frozen=True)
class ComparatorKind:
    method: Method
    K: int

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")


@dataclass(frozen=True)
class OEPEstimate:
    p: float
    stderr: float
    trials: int


def sign_of_average(f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    """sign(mean(f1) - mean(f2)) along the last axis."""
    return np.sign(f1.mean(axis=-1) - f2.mean(axis=-1)).astype(np.int8)


def sign_of_sign_average(f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    """sign(sum_k sign(f1_k - f2_k)); the 1/K factor cannot change the sign."""
    return np.sign(np.sign(f1 - f2).sum(axis=-1)).astype(np.int8)


def sign_of_median(f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    """Sign of the sample median of the paired differences (midpoint for even K)."""
    return np.sign(np.median(f1 - f2, axis=-1)).astype(np.int8)


STATISTICS = {
    Method.AVE: sign_of_average,
    Method.SA: sign_of_sign_average,
    Method.MED: sign_of_median,
}


def paired_samples(problem: NoisyProblem, x1, x2, K: int, trials: int, rng: np.random.Generator):
    """Draw ``trials x K`` evaluations at x1, then the same at x2."""
    f1 = evaluate_many(problem, x1, (trials, K), rng)
    f2 = evaluate_many(problem, x2, (trials, K), rng)
    return f1, f2


def compare_batch(kind: ComparatorKind, problem: NoisyProblem, x1, x2, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Run ``trials`` independent comparisons; returns an int8 array of signs."""
    stat = STATISTICS[kind.method]
    chunk = max(1, _CHUNK_EVALS // kind.K)
    out = np.empty(trials, dtype=np.int8)
    start = 0
    while start < trials:
        n = min(chunk, trials - start)
        f1, f2 = paired_samples(problem, x1, x2, kind.K, n, rng)
        out[start:start + n] = stat(f1, f2)
        start += n
    return out


def _compare_once(method: Method, problem, x1, x2, K, rng) -> int:
    return int(compare_batch(ComparatorKind(method, K), problem, x1, x2, 1, rng)[0])


def compare_average(problem: NoisyProblem, x1, x2, K: int, rng: np.random.Generator) -> int:
    """Explicit-averaging order estimate from 2K fresh evaluations."""
    return _compare_once(Method.AVE, problem, x1, x2, K, rng)


def compare_sign_average(problem: NoisyProblem, x1, x2, K: int, rng: np.random.Generator) -> int:
    """Sign-averaging order estimate with index-aligned pairs."""
    return _compare_once(Method.SA, problem, x1, x2, K, rng)


def compare_median(problem: NoisyProblem, x1, x2, K: int, rng: np.random.Generator) -> int:
    """Sign of the sample median of K paired differences."""
    return _compare_once(Method.MED, problem, x1, x2, K, rng)


def estimate_oep(kind: ComparatorKind, problem: NoisyProblem, x1, x2, trials: int, reference: int,
                 rng: np.random.Generator) -> OEPEstimate:
    """Fraction of comparator runs whose output equals ``reference``.

    A zero output against a nonzero reference counts as a miss.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if reference not in (-1, 0, 1):
        raise ValueError(f"reference must be -1, 0 or 1, got {reference}")
    signs = compare_batch(kind, problem, x1, x2, trials, rng)
    p = float(np.count_nonzero(signs == reference)) / trials
    return OEPEstimate(p, math.sqrt(p * (1.0 - p) / trials), trials)
