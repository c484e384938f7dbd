"""Noisy objectives of the form h(x) + sum_m g_m(x) * eps_m with stable eps_m."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .stable import IncompatibleStabilityError, StableParams, sample


class DimensionError(ValueError):
    """Raised when a design vector has the wrong length."""


@dataclass(frozen=True)
class NoiseChannel:
    g: Callable[[np.ndarray], float]
    params: StableParams


@dataclass(frozen=True)
class NoisyProblem:
    """A noisy objective with a known ground truth f(x; Delta).

    ``output_transform`` is applied to every noisy evaluation and nothing
    else; it exists to compose the problem with a strictly increasing map
    when checking invariance.  The ground truth stays untransformed.
    """

    dimension: int
    h: Callable[[np.ndarray], float]
    channels: tuple
    name: str = "custom"
    output_transform: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if len(self.channels) < 1:
            raise ValueError("a noisy problem needs at least one noise channel")
        alphas = {c.params.alpha for c in self.channels}
        if len(alphas) != 1:
            raise IncompatibleStabilityError(f"noise channels must share one alpha, got {sorted(alphas)}")
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def alpha(self) -> float:
        return self.channels[0].params.alpha

    @property
    def symmetric(self) -> bool:
        return all(c.params.symmetric for c in self.channels)

    def check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise DimensionError(f"expected a vector of length {self.dimension}, got shape {x.shape}")
        return x

    def coefficients(self, x) -> np.ndarray:
        """Noise gradient [g_1(x), ..., g_M(x)]."""
        x = self.check(x)
        return np.array([float(c.g(x)) for c in self.channels])

    def with_transform(self, transform: Callable[[np.ndarray], np.ndarray]) -> "NoisyProblem":
        return replace(self, output_transform=transform)


def evaluate_many(problem: NoisyProblem, x, size, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent noisy evaluations at ``x``; draws channel by channel."""
    x = problem.check(x)
    out = np.full(size, float(problem.h(x)))
    for channel in problem.channels:
        eps = sample(channel.params, rng, size=size)
        gm = float(channel.g(x))
        if gm != 0.0:
            out += gm * eps
    if problem.output_transform is not None:
        out = problem.output_transform(out)
    return out


def evaluate(problem: NoisyProblem, x, rng: np.random.Generator) -> float:
    """One noisy query f(x; eps) with fresh noise."""
    return float(evaluate_many(problem, x, 1, rng)[0])


def ground_truth(problem: NoisyProblem, x) -> float:
    """f(x; Delta) = h(x) + sum_m g_m(x) * delta_m."""
    x = problem.check(x)
    total = float(problem.h(x))
    for channel in problem.channels:
        total += float(channel.g(x)) * channel.params.delta
    return total


def ellipsoid_eigenvalues(dimension: int) -> np.ndarray:
    if dimension < 2:
        raise ValueError("ellipsoid test functions need D >= 2")
    i = np.arange(dimension)
    return 10.0 ** (2.0 * i / (dimension - 1))


def _quadratic(diag: np.ndarray) -> Callable[[np.ndarray], float]:
    def f(x):
        return float(np.dot(diag * x, x))

    return f


def _one(x) -> float:
    return 1.0


def _zero(x) -> float:
    return 0.0


def make_additive_ellipsoid(dimension: int, noise: StableParams) -> NoisyProblem:
    """x^T H x + eps."""
    quad = _quadratic(ellipsoid_eigenvalues(dimension))
    return NoisyProblem(dimension, quad, (NoiseChannel(_one, noise),), name="additive")


def make_multiplicative_ellipsoid(dimension: int, noise: StableParams) -> NoisyProblem:
    """x^T H x * eps, written as h = 0 and g_1 = x^T H x."""
    quad = _quadratic(ellipsoid_eigenvalues(dimension))
    return NoisyProblem(dimension, _zero, (NoiseChannel(quad, noise),), name="multiplicative")


def _coordinate(m: int) -> Callable[[np.ndarray], float]:
    def g(x):
        return float(x[m])

    return g


def linear_noise_scales(dimension: int, a: float, b: float) -> np.ndarray:
    if dimension < 2:
        raise ValueError("ellipsoid test functions need D >= 2")
    m = np.arange(dimension)
    return 10.0 ** (a + m * (b - a) / (dimension - 1))


def make_linear_noise_ellipsoid(dimension: int, alpha: float, beta: float, a: float, b: float) -> NoisyProblem:
    """x^T H x + eps^T x with eps_m ~ S(alpha, beta, 10^(a + (m-1)(b-a)/(D-1)), 0)."""
    quad = _quadratic(ellipsoid_eigenvalues(dimension))
    scales = linear_noise_scales(dimension, a, b)
    channels = tuple(
        NoiseChannel(_coordinate(m), StableParams(alpha, beta, float(scales[m]), 0.0))
        for m in range(dimension)
    )
    return NoisyProblem(dimension, quad, channels, name="linear")


def make_problem(spec: dict) -> NoisyProblem:
    """Build a test function from a config mapping.

    ``{"kind": "additive"|"multiplicative"|"linear", "D": int, "alpha": float,
    "beta": float, "gamma": float or [a, b], "delta": float}``.  For the
    linear kind ``gamma`` holds the exponents ``[a, b]`` and delta must be 0.
    """
    kind = spec["kind"]
    dimension = int(spec["D"])
    alpha = float(spec["alpha"])
    beta = float(spec.get("beta", 0.0))
    delta = float(spec.get("delta", 0.0))
    gamma = spec.get("gamma", 1.0)
    if kind == "linear":
        if isinstance(gamma, (int, float)):
            raise ValueError("linear kind needs gamma = [a, b] exponents")
        a, b = (float(v) for v in gamma)
        if delta != 0.0:
            raise ValueError("linear-noise ellipsoid has delta_m = 0")
        return make_linear_noise_ellipsoid(dimension, alpha, beta, a, b)
    if not isinstance(gamma, (int, float)):
        raise ValueError(f"{kind} kind needs a scalar gamma")
    noise = StableParams(alpha, beta, float(gamma), delta)
    if kind == "additive":
        return make_additive_ellipsoid(dimension, noise)
    if kind == "multiplicative":
        return make_multiplicative_ellipsoid(dimension, noise)
    raise ValueError(f"unknown problem kind {kind!r}")


def custom_problem(dimension: int, h, channels: Sequence[tuple]) -> NoisyProblem:
    """Convenience constructor from ``(g, params)`` pairs."""
    return NoisyProblem(dimension, h, tuple(NoiseChannel(g, p) for g, p in channels))
