"""Alpha-stable laws: sampling, parameter algebra and the symmetric CDF.

All parameters use the characteristic function

    alpha != 1:  exp(-g^a |t|^a (1 - i b tan(pi a / 2) sign t) + i d t)
    alpha == 1:  exp(-g |t| (1 + i b (2/pi) sign t log|t|) + i d t)

(Nolan's "1-parameterization").  Any shift the sampler needs is internal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np
from scipy import integrate, optimize, special


class StableParamError(ValueError):
    """Raised for parameters outside the stable family."""


class IncompatibleStabilityError(ValueError):
    """Raised when combining stable laws with different alpha."""


class DegenerateTransformError(ValueError):
    """Raised for a linear map with zero slope."""


@dataclass(frozen=True)
class StableParams:
    alpha: float
    beta: float = 0.0
    gamma: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise StableParamError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not -1.0 <= self.beta <= 1.0:
            raise StableParamError(f"beta must lie in [-1, 1], got {self.beta}")
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise StableParamError(f"gamma must be positive and finite, got {self.gamma}")
        if not math.isfinite(self.delta):
            raise StableParamError(f"delta must be finite, got {self.delta}")

    @property
    def symmetric(self) -> bool:
        return self.beta == 0.0 or self.alpha == 2.0


def _standard_variates(alpha: float, beta: float, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Chambers-Mallows-Stuck transform of U(-pi/2, pi/2) and Exp(1) draws into S(alpha, beta, 1, 0)."""
    if alpha == 1.0:
        half_pi_bu = 0.5 * np.pi + beta * u
        return (2.0 / np.pi) * (
            half_pi_bu * np.tan(u)
            - beta * np.log((0.5 * np.pi * w * np.cos(u)) / half_pi_bu)
        )
    if alpha == 2.0:
        # beta has no effect; avoids the tan(pi) round-off in the general branch
        return 2.0 * np.sqrt(w) * np.sin(u)
    zeta = beta * math.tan(0.5 * np.pi * alpha)
    b = math.atan(zeta) / alpha
    s = (1.0 + zeta * zeta) ** (0.5 / alpha)
    cos_u = np.cos(u)
    return (
        s
        * np.sin(alpha * (u + b))
        / cos_u ** (1.0 / alpha)
        * (np.cos(u - alpha * (u + b)) / w) ** ((1.0 - alpha) / alpha)
    )


def sample(params: StableParams, rng: np.random.Generator, size=None):
    """Draw variates from ``params``.

    Uses two uniforms/exponentials per variate, drawn in that order, so a
    given generator state always yields the same sequence.  Returns a float
    when ``size`` is None, otherwise an array of shape ``size``.
    """
    shape = () if size is None else size
    u = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, size=shape)
    w = rng.standard_exponential(size=shape)
    x = _standard_variates(params.alpha, params.beta, u, w)
    if params.alpha == 1.0:
        shift = params.delta + (2.0 / np.pi) * params.beta * params.gamma * math.log(params.gamma)
    else:
        shift = params.delta
    out = params.gamma * x + shift
    if size is None:
        return float(out)
    return out


def linear_transform(params: StableParams, a: float, b: float) -> StableParams:
    """Parameters of ``a * X + b`` for ``X ~ params``."""
    if a == 0:
        raise DegenerateTransformError("a = 0 maps a stable law to a point mass")
    delta = a * params.delta + b
    if params.alpha == 1.0:
        delta -= (2.0 / np.pi) * params.beta * params.gamma * a * math.log(abs(a))
    return StableParams(
        params.alpha,
        math.copysign(1.0, a) * params.beta,
        abs(a) * params.gamma,
        delta,
    )


def _check_alpha(params: Sequence[StableParams]) -> float:
    alpha = params[0].alpha
    for p in params[1:]:
        if p.alpha != alpha:
            raise IncompatibleStabilityError(
                f"cannot add stable laws with alpha={alpha} and alpha={p.alpha}"
            )
    return alpha


def sum_params(p1: StableParams, p2: StableParams) -> StableParams:
    """Parameters of ``X1 + X2`` for independent ``X1 ~ p1``, ``X2 ~ p2``."""
    alpha = _check_alpha([p1, p2])
    s1, s2 = p1.gamma**alpha, p2.gamma**alpha
    beta = (p1.beta * s1 + p2.beta * s2) / (s1 + s2)
    return StableParams(alpha, _clip_beta(beta), (s1 + s2) ** (1.0 / alpha), p1.delta + p2.delta)


def sum_many(params: Sequence[StableParams]) -> StableParams:
    """Closed form for the sum of independent stable variates sharing one alpha."""
    params = list(params)
    if not params:
        raise ValueError("sum_many needs at least one term")
    if len(params) == 1:
        return params[0]
    alpha = _check_alpha(params)
    scales = np.array([p.gamma**alpha for p in params])
    betas = np.array([p.beta for p in params])
    total = math.fsum(scales)
    beta = math.fsum(betas * scales) / total
    delta = math.fsum(p.delta for p in params)
    return StableParams(alpha, _clip_beta(beta), total ** (1.0 / alpha), delta)


def fold_sum(params: Sequence[StableParams]) -> StableParams:
    """Left fold of :func:`sum_params`; reference path for :func:`sum_many`."""
    return reduce(sum_params, params)


def _clip_beta(beta: float) -> float:
    # weighted means of values in [-1, 1] can drift past the bound by an ulp
    return min(1.0, max(-1.0, beta))


def _cdf_integral_positive(alpha: float, x: float) -> float:
    """Integral term of the Zolotarev/Nolan representation for S(alpha, 0, 1, 0), x > 0."""
    ratio = alpha / (alpha - 1.0)
    log_x_term = ratio * math.log(x)
    # integrand limits at theta -> 0 and theta -> pi/2
    at_zero, at_half_pi = (0.0, 1.0) if alpha > 1.0 else (1.0, 0.0)

    def exponent(theta):
        c = math.cos(theta)
        return (
            log_x_term
            + (ratio - 1.0) * math.log(c)
            - ratio * math.log(math.sin(alpha * theta))
            + math.log(math.cos((alpha - 1.0) * theta))
        )

    def integrand(theta):
        if math.sin(alpha * theta) <= 0.0:
            return at_zero
        if math.cos(theta) <= 0.0:
            return at_half_pi
        z = exponent(theta)
        if z > 700.0:
            return 0.0
        return math.exp(-math.exp(z))

    # exponent is monotone in theta; the integrand drops from ~1 to ~0 around
    # its zero, which can sit arbitrarily close to an endpoint
    lo, hi = 1e-12, 0.5 * math.pi - 1e-12
    breaks = [0.0, 0.5 * math.pi]
    if exponent(lo) * exponent(hi) < 0.0:
        mid = optimize.brentq(exponent, lo, hi, xtol=1e-15)
        # geometric grid so quad cannot step over the transition
        left = [mid - mid * 10.0**-k for k in range(1, 15)]
        right = [mid + (0.5 * math.pi - mid) * 10.0**-k for k in range(1, 15)]
        breaks = sorted({0.0, *left, mid, *right, 0.5 * math.pi})
    value = 0.0
    with warnings.catch_warnings():
        # quad flags the near-step integrand close to alpha = 1 even when converged
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(breaks[:-1], breaks[1:]):
            part, _err = integrate.quad(integrand, a, b, epsabs=1e-12, epsrel=1e-10, limit=200)
            value += part
    return value


def cdf_symmetric_standard(alpha: float, x: float) -> float:
    """CDF of S(alpha, 0, 1, 0) at ``x``.

    Closed forms at alpha = 1 (Cauchy) and alpha = 2 (normal with variance 2);
    otherwise a single non-oscillatory integral over (0, pi/2) evaluated by
    adaptive quadrature.  Falls back to Monte Carlo only if quadrature
    produces a non-finite value.
    """
    if not 0.0 < alpha <= 2.0:
        raise StableParamError(f"alpha must lie in (0, 2], got {alpha}")
    x = float(x)
    if math.isnan(x):
        return math.nan
    if x == math.inf:
        return 1.0
    if x == -math.inf:
        return 0.0
    if x == 0.0:
        return 0.5
    if x < 0.0:
        return 1.0 - cdf_symmetric_standard(alpha, -x)
    if alpha == 2.0:
        return 0.5 * special.erfc(-x / 2.0)
    if alpha == 1.0:
        return 0.5 + math.atan(x) / math.pi
    integral = _cdf_integral_positive(alpha, x)
    if alpha < 1.0:
        value = 0.5 + integral / math.pi
    else:
        value = 1.0 - integral / math.pi
    if not math.isfinite(value):
        rng = np.random.default_rng(0)
        return mc_probability_below(StableParams(alpha), x, 10**6, rng)
    return min(1.0, max(0.5, value))


def symmetric_density_at_zero(alpha: float, gamma: float = 1.0) -> float:
    """Density of S(alpha, 0, gamma, 0) at its median: Gamma(1 + 1/alpha) / (pi gamma)."""
    return math.gamma(1.0 + 1.0 / alpha) / (math.pi * gamma)


def mc_probability_below(params: StableParams, threshold: float, n: int, rng: np.random.Generator) -> float:
    """Fraction of ``n`` draws from ``params`` strictly below ``threshold``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    hits = 0
    chunk = 1 << 20
    remaining = n
    while remaining > 0:
        m = min(chunk, remaining)
        hits += int(np.count_nonzero(sample(params, rng, size=m) < threshold))
        remaining -= m
    return hits / n
