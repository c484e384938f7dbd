"""Named self-checks run by ``signavg validate``.

Each check is a function of a random generator returning (passed, detail).
Library functions are looked up through their modules at call time so a
patched implementation is what gets checked.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, Tuple

import numpy as np

from . import comparators, metrics, ranking, stable, theory
from .problems import make_additive_ellipsoid, make_linear_noise_ellipsoid

CheckResult = Tuple[bool, str]

QUANTILE_GRID = np.linspace(0.01, 0.99, 99)


def quantile_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Max |ECDF_b(q_a(p)) - p| over the 1%-99% grid; finite even without moments."""
    qa = np.quantile(a, QUANTILE_GRID)
    b_sorted = np.sort(b)
    ecdf = np.searchsorted(b_sorted, qa, side="right") / len(b_sorted)
    return float(np.max(np.abs(ecdf - QUANTILE_GRID)))


def random_params(rng: np.random.Generator, alpha=None) -> stable.StableParams:
    if alpha is None:
        alpha = float(rng.choice([0.5, 0.8, 1.0, 1.3, 1.7, 2.0]))
    return stable.StableParams(alpha, float(rng.uniform(-1, 1)), float(rng.uniform(0.3, 3)), float(rng.uniform(-2, 2)))


def check_stable_closure(rng, n=200_000, cases=6) -> CheckResult:
    worst = 0.0
    for _ in range(cases):
        p = random_params(rng)
        a = float(rng.choice([-1, 1])) * float(rng.uniform(0.2, 4))
        b = float(rng.uniform(-3, 3))
        lhs = a * stable.sample(p, rng, size=n) + b
        rhs = stable.sample(stable.linear_transform(p, a, b), rng, size=n)
        worst = max(worst, quantile_gap(lhs, rhs))
        q = random_params(rng, alpha=p.alpha)
        lhs = stable.sample(p, rng, size=n) + stable.sample(q, rng, size=n)
        rhs = stable.sample(stable.sum_params(p, q), rng, size=n)
        worst = max(worst, quantile_gap(lhs, rhs))
    return worst < 0.02, f"max quantile gap {worst:.4f} (limit 0.02)"


def check_cdf_vs_monte_carlo(rng, n=200_000) -> CheckResult:
    worst = 0.0
    for alpha in (0.5, 1.0, 1.5, 2.0):
        draws = stable.sample(stable.StableParams(alpha), rng, size=n)
        for x in (-3.0, -0.5, 0.3, 1.0, 4.0):
            worst = max(worst, abs(theory.cdf_symmetric_standard(alpha, x) - float(np.mean(draws < x))))
    return worst < 0.005, f"max |phi - MC| {worst:.4f} (limit 0.005)"


def check_averaging_oep_agreement(rng, trials=40_000) -> CheckResult:
    worst_excess = -math.inf
    details = []
    x1, x2 = np.zeros(2), np.array([1.0, 0.0])
    for alpha in (0.5, 1.0, 1.5, 2.0):
        problem = make_additive_ellipsoid(2, stable.StableParams(alpha))
        eta = theory.order_sign(problem, x1, x2)
        for K in (1, 10):
            est = comparators.estimate_oep(comparators.ComparatorKind("AVE", K), problem, x1, x2, trials, eta, rng)
            predicted = theory.oep_average_analytic(problem, x1, x2, K)
            gap = abs(est.p - predicted)
            tol = max(0.01, 4.0 * est.stderr)
            worst_excess = max(worst_excess, gap - tol)
            details.append(f"a={alpha},K={K}:{gap:.4f}")
    return worst_excess <= 0.0, "; ".join(details)


def check_sign_average_bound(rng, trials=20_000) -> CheckResult:
    failures = []
    for alpha in (0.5, 1.0, 2.0):
        cases = (
            (make_additive_ellipsoid(2, stable.StableParams(alpha)), np.zeros(2), np.array([0.5, 0.0])),
            (make_linear_noise_ellipsoid(2, alpha, 0.0, -1.0, 1.0), np.array([0.3, 0.1]), np.array([0.6, 0.05])),
        )
        for problem, x1, x2 in cases:
            e, _ = theory.expected_sign(problem, x1, x2, 200_000, rng)
            eta = theory.order_sign(problem, x1, x2)
            for K in (1, 10, 50):
                est = comparators.estimate_oep(comparators.ComparatorKind("SA", K), problem, x1, x2, trials, eta, rng)
                bound = theory.hoeffding_lower_bound(e, K)
                if est.p < bound - 3.0 * est.stderr:
                    failures.append(f"{problem.name} a={alpha} K={K}: {est.p:.4f} < {bound:.4f}")
    return not failures, "; ".join(failures) or "all SA estimates above the bound"


def check_weight_sum(rng, instances=2_000) -> CheckResult:
    worst = 0.0
    for _ in range(instances):
        lam = int(rng.integers(1, 21))
        w = np.sort(rng.normal(size=lam))[::-1]
        keys = rng.integers(0, max(1, lam // 2), size=lam)
        wbar = ranking.tie_aware_weights(keys, ranking.WeightScheme(tuple(w)))
        scale = max(1.0, float(np.abs(w).sum()))
        worst = max(worst, abs(float(wbar.sum()) - float(w.sum())) / scale)
    return worst <= 1e-12, f"max relative weight-sum error {worst:.2e}"


def check_tie_equality(rng, instances=2_000) -> CheckResult:
    for _ in range(instances):
        lam = int(rng.integers(2, 21))
        w = np.sort(rng.uniform(size=lam))[::-1]
        keys = rng.integers(0, 4, size=lam)
        wbar = ranking.tie_aware_weights(keys, ranking.WeightScheme(tuple(w)))
        for k in np.unique(keys):
            if len(set(wbar[keys == k].tolist())) != 1:
                return False, f"tied keys received different weights: {keys}, {wbar}"
    return True, "tied keys always share one weight"


def brute_force_tau_b(xs, ys) -> float:
    n = len(xs)
    concordant = discordant = tied_x = tied_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            if dx == 0:
                tied_x += 1
            if dy == 0:
                tied_y += 1
            if dx * dy > 0:
                concordant += 1
            elif dx * dy < 0:
                discordant += 1
    n0 = n * (n - 1) // 2
    return (concordant - discordant) / math.sqrt((n0 - tied_x) * (n0 - tied_y))


def check_tau_b_oracle(rng, instances=300) -> CheckResult:
    worst = 0.0
    for _ in range(instances):
        xs = rng.integers(0, 8, size=20).tolist()
        ys = rng.integers(0, 8, size=20).tolist()
        worst = max(worst, abs(metrics.kendall_tau_b(xs, ys) - brute_force_tau_b(xs, ys)))
    return worst <= 1e-12, f"max |tau_b - brute force| {worst:.2e}"


CHECKS: Dict[str, Callable[[np.random.Generator], CheckResult]] = {
    "stable_closure": check_stable_closure,
    "cdf_vs_monte_carlo": check_cdf_vs_monte_carlo,
    "averaging_oep_agreement": check_averaging_oep_agreement,
    "sign_average_bound": check_sign_average_bound,
    "weight_sum": check_weight_sum,
    "tie_equality": check_tie_equality,
    "tau_b_oracle": check_tau_b_oracle,
}


def run_checks(seed: int = 0, names=None) -> Dict[str, dict]:
    """Run the named checks (all by default), each on its own substream of ``seed``."""
    names = list(CHECKS) if names is None else list(names)
    report = {}
    order = list(CHECKS)
    for name in names:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(order.index(name),)))
        passed, detail = CHECKS[name](rng)
        report[name] = {"passed": bool(passed), "detail": detail}
    return report
