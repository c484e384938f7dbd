"""(mu/mu_w, lambda)-CMA-ES with pluggable noise handling.

Rank-one and rank-mu covariance updates with cumulative step-size
adaptation; default strategy parameters from Hansen's CMA-ES tutorial.
No restarts, no active (negative-weight) update.  ``tell`` accepts any
weight vector aligned with the population, which is what tie-averaged
weights need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .comparators import Method
from .metrics import UndefinedCorrelationError, kendall_tau_b
from .problems import NoisyProblem, ground_truth
from .ranking import WeightScheme, sample_table, scores, sign_matrix_from_samples, tie_aware_weights


class NumericalDegeneracyError(ArithmeticError):
    """Raised when the search distribution becomes numerically unusable."""


@dataclass(frozen=True)
class StrategyParams:
    dimension: int
    lam: int
    mu: int
    scheme: WeightScheme
    mueff: float
    cs: float
    ds: float
    cc: float
    c1: float
    cmu: float
    chi_n: float


def default_scheme(lam: int) -> WeightScheme:
    """log-linear positive weights on the best floor(lam/2), zeros after."""
    mu = lam // 2
    raw = np.log((lam + 1) / 2.0) - np.log(np.arange(1, mu + 1))
    w = np.zeros(lam)
    w[:mu] = raw / raw.sum()
    return WeightScheme(tuple(w))


def default_strategy(dimension: int, lam: Optional[int] = None, scheme: Optional[WeightScheme] = None) -> StrategyParams:
    n = dimension
    if lam is None:
        lam = 4 + int(math.floor(3.0 * math.log(n)))
    if scheme is None:
        scheme = default_scheme(lam)
    if len(scheme) != lam:
        raise ValueError("weight scheme length must equal lambda")
    w = np.asarray(scheme.w)
    pos = w[w > 0]
    mueff = pos.sum() ** 2 / (pos**2).sum()
    cs = (mueff + 2.0) / (n + mueff + 5.0)
    ds = 1.0 + 2.0 * max(0.0, math.sqrt((mueff - 1.0) / (n + 1.0)) - 1.0) + cs
    cc = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n)
    c1 = 2.0 / ((n + 1.3) ** 2 + mueff)
    cmu = min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0) ** 2 + mueff))
    chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
    return StrategyParams(n, lam, int(np.count_nonzero(w > 0)), scheme, mueff, cs, ds, cc, c1, cmu, chi_n)


@dataclass(frozen=True)
class CmaState:
    mean: np.ndarray
    sigma: float
    C: np.ndarray
    ps: np.ndarray
    pc: np.ndarray
    t: int
    strategy: StrategyParams
    # eigendecomposition C = B diag(d^2) B^T
    B: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)


def initial_state(m0, sigma0: float = 1.0, strategy: Optional[StrategyParams] = None) -> CmaState:
    m0 = np.array(m0, dtype=float)
    n = len(m0)
    if strategy is None:
        strategy = default_strategy(n)
    if not sigma0 > 0:
        raise ValueError("sigma0 must be positive")
    eye = np.eye(n)
    return CmaState(m0, float(sigma0), eye.copy(), np.zeros(n), np.zeros(n), 0, strategy, eye.copy(), np.ones(n))


def ask(state: CmaState, rng: np.random.Generator) -> np.ndarray:
    """lambda candidates m + sigma * B diag(d) z, one per row."""
    s = state.strategy
    z = rng.standard_normal((s.lam, s.dimension))
    y = (z * state.d) @ state.B.T
    return state.mean + state.sigma * y


@dataclass(frozen=True)
class Handler:
    method: Method
    K: int

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if int(self.K) != self.K or self.K < 1:
            raise ValueError("K must be a positive integer")


@dataclass(frozen=True)
class Evaluation:
    weights: np.ndarray
    keys: np.ndarray
    evals: int


def evaluate_and_weight(state: CmaState, population: np.ndarray, problem: NoisyProblem, handler: Handler,
                        scheme: WeightScheme, rng: np.random.Generator) -> Evaluation:
    """Evaluate every candidate K times and turn the samples into weights.

    AVE ranks per-point sample means, MED per-point sample medians, SA the
    scores R from the reused-sample sign matrix.  lambda * K calls in all modes.
    """
    table = sample_table(problem, population, handler.K, rng)
    if handler.method is Method.AVE:
        keys = table.mean(axis=1)
    elif handler.method is Method.MED:
        keys = np.median(table, axis=1)
    else:
        keys = scores(sign_matrix_from_samples(table))
    return Evaluation(tie_aware_weights(keys, scheme), keys, table.size)


def tell(state: CmaState, population: np.ndarray, weights) -> CmaState:
    """One CMA-ES update from population rows and their aligned weights."""
    s = state.strategy
    w = np.asarray(weights, dtype=float)
    population = np.asarray(population, dtype=float)
    if w.shape != (s.lam,):
        raise ValueError(f"expected {s.lam} weights, got shape {w.shape}")
    n = s.dimension
    with np.errstate(all="ignore"):
        y = (population - state.mean) / state.sigma
        yw = w @ y
        mean = state.mean + state.sigma * yw

        inv_sqrt_c = (state.B / state.d) @ state.B.T
        ps = (1.0 - s.cs) * state.ps + math.sqrt(s.cs * (2.0 - s.cs) * s.mueff) * (inv_sqrt_c @ yw)
        t = state.t + 1
        ps_norm = float(np.linalg.norm(ps))
        hsig = ps_norm / math.sqrt(1.0 - (1.0 - s.cs) ** (2 * t)) < (1.4 + 2.0 / (n + 1.0)) * s.chi_n
        pc = (1.0 - s.cc) * state.pc + hsig * math.sqrt(s.cc * (2.0 - s.cc) * s.mueff) * yw

        rank_mu = (y * w[:, None]).T @ y
        decay = 1.0 - s.c1 - s.cmu * w.sum() + (1.0 - hsig) * s.c1 * s.cc * (2.0 - s.cc)
        C = decay * state.C + s.c1 * np.outer(pc, pc) + s.cmu * rank_mu
        C = np.triu(C) + np.triu(C, 1).T

        exponent = (s.cs / s.ds) * (ps_norm / s.chi_n - 1.0)
        sigma = state.sigma * math.exp(exponent) if exponent < 700.0 else math.inf
    if not (np.all(np.isfinite(C)) and np.all(np.isfinite(mean)) and math.isfinite(sigma) and sigma > 0):
        raise NumericalDegeneracyError("non-finite mean, covariance or step size")
    eigvals, B = np.linalg.eigh(C)
    if eigvals.min() <= 0.0:
        raise NumericalDegeneracyError(f"covariance lost positive definiteness (min eigenvalue {eigvals.min()})")
    return replace(state, mean=mean, sigma=sigma, C=C, ps=ps, pc=pc, t=t, B=B, d=np.sqrt(eigvals))


@dataclass(frozen=True)
class TrialRecord:
    t: int
    evals: int
    tau_b: float
    f_delta: float
    sigma: float


@dataclass
class RunResult:
    records: List[TrialRecord]
    stop_reason: Optional[str] = None
    final_state: Optional[CmaState] = None


def population_tau(keys, population, problem: NoisyProblem) -> float:
    truth = [ground_truth(problem, x) for x in population]
    try:
        return kendall_tau_b(keys, truth)
    except UndefinedCorrelationError:
        return math.nan


def run(problem: NoisyProblem, handler: Handler, scheme: Optional[WeightScheme], iterations: int, m0,
        sigma0: float, rng: np.random.Generator) -> RunResult:
    """Run CMA-ES for ``iterations`` generations and log one record per generation.

    ``f_delta`` is the ground truth at the updated mean.  A numerical
    breakdown ends the run early and is reported in ``stop_reason``.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    strategy = default_strategy(problem.dimension, None if scheme is None else len(scheme), scheme)
    state = initial_state(m0, sigma0, strategy)
    records: List[TrialRecord] = []
    evals = 0
    stop_reason = None
    for _ in range(iterations):
        population = ask(state, rng)
        result = evaluate_and_weight(state, population, problem, handler, strategy.scheme, rng)
        evals += result.evals
        tau = population_tau(result.keys, population, problem)
        try:
            state = tell(state, population, result.weights)
        except NumericalDegeneracyError as exc:
            stop_reason = f"numerical degeneracy at t={state.t + 1}: {exc}"
            break
        records.append(TrialRecord(state.t, evals, tau, ground_truth(problem, state.mean), state.sigma))
    return RunResult(records, stop_reason, state)
