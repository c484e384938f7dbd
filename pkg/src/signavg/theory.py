"""Closed-form predictions for the three comparators on stable-noise problems.

Notation follows the usual one for a linear-in-noise objective: for a point
x with noise gradient g(x) and channel scales gamma_m,

    gamma'(x) = (sum_m |gamma_m g_m(x)|^alpha)^(1/alpha)

and the difference of two K-sample averages is stable with scale
K^(1/alpha - 1) * gamma''(x1, x2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .comparators import Method
from .problems import NoisyProblem, evaluate_many, ground_truth
from .stable import (
    StableParams,
    cdf_symmetric_standard,
    linear_transform,
    mc_probability_below,
    sum_many,
    sum_params,
    symmetric_density_at_zero,
)


class DegenerateNoiseError(ValueError):
    """Raised when a point carries no noise (all g_m(x) = 0)."""


class NoFiniteSampleSizeError(ValueError):
    """Raised when E[sign] = 0, so no K reaches a target OEP."""


@dataclass(frozen=True)
class PairDerivedParams:
    beta1: float
    beta2: float
    gamma1: float
    gamma2: float
    delta1: float
    delta2: float
    beta_pp: float
    gamma_pp: float
    delta_pp: float


def _point_params(problem: NoisyProblem, x):
    alpha = problem.alpha
    g = problem.coefficients(x)
    gammas = np.array([c.params.gamma for c in problem.channels])
    betas = np.array([c.params.beta for c in problem.channels])
    scaled = np.abs(g * gammas) ** alpha
    scale_pow = math.fsum(scaled)
    if scale_pow == 0.0:
        raise DegenerateNoiseError("all noise coefficients vanish at this point")
    gamma = scale_pow ** (1.0 / alpha)
    beta = math.fsum(betas * np.sign(g) * scaled) / scale_pow
    nonzero = g != 0.0
    # 0 * log 0 := 0
    delta = -(2.0 / math.pi) * math.fsum(
        betas[nonzero] * gammas[nonzero] * g[nonzero] * np.log(np.abs(g[nonzero]))
    )
    return beta, gamma, delta


def derive_pair_params(problem: NoisyProblem, x1, x2) -> PairDerivedParams:
    """beta', gamma', delta' at both points and their difference combinations."""
    alpha = problem.alpha
    b1, g1, d1 = _point_params(problem, x1)
    b2, g2, d2 = _point_params(problem, x2)
    s1, s2 = g1**alpha, g2**alpha
    beta_pp = (b1 * s1 - b2 * s2) / (s1 + s2)
    return PairDerivedParams(
        beta1=b1, beta2=b2,
        gamma1=g1, gamma2=g2,
        delta1=d1, delta2=d2,
        beta_pp=min(1.0, max(-1.0, beta_pp)),
        gamma_pp=(s1 + s2) ** (1.0 / alpha),
        delta_pp=d1 - d2,
    )


def order_sign(problem: NoisyProblem, x1, x2) -> int:
    """Ground-truth order sign(f(x1; Delta) - f(x2; Delta))."""
    return int(np.sign(ground_truth(problem, x1) - ground_truth(problem, x2)))


def evaluation_params(problem: NoisyProblem, x) -> StableParams:
    """Law of a single noisy evaluation f(x; eps), built from the stable algebra."""
    x = problem.check(x)
    terms = [
        linear_transform(c.params, float(c.g(x)), 0.0)
        for c in problem.channels
        if float(c.g(x)) != 0.0
    ]
    if not terms:
        raise DegenerateNoiseError("all noise coefficients vanish at this point")
    law = sum_many(terms)
    return StableParams(law.alpha, law.beta, law.gamma, law.delta + float(problem.h(x)))


def averaged_difference_params(problem: NoisyProblem, x1, x2, K: int) -> StableParams:
    """Law of mean_K f(x1) - mean_K f(x2) with 2K independent evaluations.

    Derived purely by composing linear maps and sums, so the alpha = 1
    skewed case picks up the location shift produced by the 1/K scaling.
    """
    law1 = evaluation_params(problem, x1)
    law2 = evaluation_params(problem, x2)
    diff = sum_params(law1, linear_transform(law2, -1.0, 0.0))
    alpha = diff.alpha
    total = StableParams(alpha, diff.beta, K ** (1.0 / alpha) * diff.gamma, K * diff.delta)
    return linear_transform(total, 1.0 / K, 0.0)


def epsilon_ave_params(pair: PairDerivedParams, alpha: float) -> StableParams:
    """Standardized noise term of the averaging OEP, taken literally.

    S(alpha, beta'', 1, (delta''/gamma'' + (2/pi) beta'' log gamma'') [alpha = 1]).
    This form omits the (2/pi) beta'' log K shift that appears for skewed
    noise at alpha = 1; :func:`oep_average_analytic` uses the exact law.
    """
    loc = 0.0
    if alpha == 1.0:
        loc = pair.delta_pp / pair.gamma_pp + (2.0 / math.pi) * pair.beta_pp * math.log(pair.gamma_pp)
    return StableParams(alpha, pair.beta_pp, 1.0, loc)


def oep_average_analytic(problem: NoisyProblem, x1, x2, K: int, rng: np.random.Generator = None,
                         n: int = 10**6) -> float:
    """Probability that explicit averaging with K samples recovers the ground-truth order.

    Symmetric noise: phi_alpha(K^(1 - 1/alpha) |f(x1; Delta) - f(x2; Delta)| / gamma'').
    Skewed noise: Monte Carlo (``n`` draws from ``rng``) on the exact law
    of the averaged difference, with standard error at most 0.5 / sqrt(n).
    """
    eta = order_sign(problem, x1, x2)
    if eta == 0:
        return 0.0
    alpha = problem.alpha
    if alpha == 2.0 or problem.symmetric:
        pair = derive_pair_params(problem, x1, x2)
        gap = abs(ground_truth(problem, x1) - ground_truth(problem, x2))
        return cdf_symmetric_standard(alpha, K ** (1.0 - 1.0 / alpha) * gap / pair.gamma_pp)
    if rng is None:
        rng = np.random.default_rng(0)
    law = averaged_difference_params(problem, x1, x2, K)
    # P[eta * D > 0] = P[-eta * D < 0]
    return mc_probability_below(linear_transform(law, -float(eta), 0.0), 0.0, n, rng)


def expected_sign(problem: NoisyProblem, x1, x2, n: int, rng: np.random.Generator):
    """Monte-Carlo E[sign(f(x1; eps1) - f(x2; eps2))] and its standard error.

    Equals P[f(x1) > f(x2)] - P[f(x1) < f(x2)].
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    f1 = evaluate_many(problem, x1, n, rng)
    f2 = evaluate_many(problem, x2, n, rng)
    s = np.sign(f1 - f2)
    mean = float(s.mean())
    if n == 1:
        return mean, 0.0
    return mean, float(s.std(ddof=1) / math.sqrt(n))


def expected_sign_symmetric(problem: NoisyProblem, x1, x2) -> float:
    """Exact E[sign] under symmetric noise: 2 phi_alpha(gap / gamma'') - 1."""
    if not (problem.symmetric or problem.alpha == 2.0):
        raise ValueError("closed form needs symmetric noise")
    pair = derive_pair_params(problem, x1, x2)
    gap = ground_truth(problem, x1) - ground_truth(problem, x2)
    return 2.0 * cdf_symmetric_standard(problem.alpha, gap / pair.gamma_pp) - 1.0


def hoeffding_lower_bound(expected_sign: float, K: int) -> float:
    """Lower bound 1 - exp(-K e^2 / 2) on the sign-averaging OEP."""
    if abs(expected_sign) > 1.0:
        raise ValueError("expected sign must lie in [-1, 1]")
    if K < 1:
        raise ValueError("K must be at least 1")
    return -math.expm1(-K * expected_sign * expected_sign / 2.0)


def sufficient_k(expected_sign: float, p: float) -> int:
    """Smallest K with K >= (2 / e^2) log(1 / (1 - p))."""
    if expected_sign == 0.0:
        raise NoFiniteSampleSizeError("E[sign] = 0: no finite K reaches a positive OEP bound")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    e2 = expected_sign * expected_sign
    K = max(1, math.ceil(2.0 / e2 * -math.log1p(-p)))
    # guard the ceil against round-off in the log
    while hoeffding_lower_bound(expected_sign, K) < p:
        K += 1
    return K


def normal_cdf(z: float) -> float:
    return 0.5 * special.erfc(-z / math.sqrt(2.0))


def asymptotic_oep(kind, mu: float, sigma: float, K: int) -> float:
    """Large-K approximation Phi(sqrt(K) |mu| / sigma).

    ``kind`` selects nothing numerically; the caller supplies (mu, sigma)
    appropriate to it (see :func:`asymptotic_moments`).
    """
    Method(kind)
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    return normal_cdf(math.sqrt(K) * abs(mu) / sigma)


def asymptotic_moments(kind, problem: NoisyProblem, x1, x2):
    """(mu, sigma) for the large-K approximation on a symmetric stable problem.

    AVE needs finite variance (alpha = 2): mu = gap, sigma^2 = Var f(x1) + Var f(x2).
    SA: mu = E[sign], sigma = sqrt(1 - mu^2) (no ties under continuous noise).
    MED: mu = gap, sigma = 1 / (2 xi) with xi the difference density at its median.
    """
    method = Method(kind)
    pair = derive_pair_params(problem, x1, x2)
    gap = ground_truth(problem, x1) - ground_truth(problem, x2)
    alpha = problem.alpha
    if method is Method.AVE:
        if alpha != 2.0:
            raise ValueError("explicit averaging has no finite variance for alpha < 2")
        return gap, math.sqrt(2.0) * pair.gamma_pp
    if method is Method.SA:
        mu = expected_sign_symmetric(problem, x1, x2)
        return mu, math.sqrt(1.0 - mu * mu)
    xi = symmetric_density_at_zero(alpha, pair.gamma_pp)
    return gap, 1.0 / (2.0 * xi)
