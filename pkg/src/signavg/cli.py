"""Batch driver: OEP sweeps, CMA-ES campaigns and self-validation.

Every run is determined by the JSON config plus one master seed.  Random
streams are split by counter: the stream for a grid cell is
``SeedSequence(master_seed, spawn_key=cell_key)`` where ``cell_key`` is the
tuple of grid indices (and the run seed for CMA-ES campaigns), so serial and
parallel execution produce the same bytes.

Exit codes: 0 success, 1 check failure, 2 configuration or output error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__, validation
from .cmaes import Handler, run
from .comparators import ComparatorKind, Method, estimate_oep
from .metrics import moving_average
from .problems import evaluate_many, make_problem
from .theory import (
    DegenerateNoiseError,
    asymptotic_moments,
    asymptotic_oep,
    expected_sign,
    hoeffding_lower_bound,
    oep_average_analytic,
    order_sign,
    sufficient_k,
)

log = logging.getLogger("signavg")

RUN_COLUMNS = ("t", "evals", "tau_b", "f_delta", "sigma")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    problem: dict = field(default_factory=lambda: {"kind": "additive", "D": 2, "alpha": 2.0, "beta": 0.0,
                                                   "gamma": 1.0, "delta": 0.0})
    functions: Optional[List[dict]] = None
    pair: object = "canonical"
    methods: List[str] = field(default_factory=lambda: ["AVE", "SA", "MED"])
    K: List[int] = field(default_factory=lambda: [1, 10, 50])
    alphas: Optional[List[float]] = None
    betas: Optional[List[float]] = None
    trials: int = 10_000
    sign_samples: int = 100_000
    iterations: int = 300
    sigma0: float = 1.0
    m0: object = 10.0
    span: int = 10
    seeds: List[int] = field(default_factory=lambda: list(range(10)))
    seed: int = 0
    out: str = "results"
    jobs: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        try:
            for spec in self.function_specs():
                make_problem(spec)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid problem spec: {exc}") from exc
        for m in self.methods:
            if m not in Method.__members__:
                raise ConfigError(f"unknown method {m!r}")
        if not self.K or any(int(k) != k or k < 1 for k in self.K):
            raise ConfigError("K must be a non-empty list of positive integers")
        for name in ("trials", "sign_samples", "iterations", "span", "jobs"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if not self.sigma0 > 0:
            raise ConfigError("sigma0 must be positive")
        if len(set(self.seeds)) != len(self.seeds) or not self.seeds:
            raise ConfigError("seeds must be a non-empty list of distinct integers")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    def function_specs(self) -> List[dict]:
        return list(self.functions) if self.functions else [dict(self.problem)]

    def noise_grid(self, spec: dict):
        alphas = self.alphas if self.alphas is not None else [spec["alpha"]]
        betas = self.betas if self.betas is not None else [spec.get("beta", 0.0)]
        return [(float(a), float(b)) for a in alphas for b in betas]


def load_config(path: Optional[str], overrides: dict) -> ExperimentConfig:
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def fmt(value) -> str:
    """17 significant digits so every float round-trips."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def write_csv(path: Path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue())


def substream(master: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key)))


def resolve_pair(cfg: ExperimentConfig, dimension: int):
    if cfg.pair == "canonical":
        x1 = np.zeros(dimension)
        x2 = np.zeros(dimension)
        x2[0] = 1.0
        return x1, x2
    if isinstance(cfg.pair, dict) and {"x1", "x2"} <= set(cfg.pair):
        x1 = np.asarray(cfg.pair["x1"], dtype=float)
        x2 = np.asarray(cfg.pair["x2"], dtype=float)
        if x1.shape != (dimension,) or x2.shape != (dimension,):
            raise ConfigError(f"pair points must have length {dimension}")
        return x1, x2
    raise ConfigError('pair must be "canonical" or {"x1": [...], "x2": [...]}')


def median_order(problem, x1, x2, n, rng) -> int:
    """sign(m_f(x1) - m_f(x2)); exact under symmetric noise, sampled otherwise."""
    if problem.symmetric:
        return order_sign(problem, x1, x2)
    m1 = float(np.median(evaluate_many(problem, x1, n, rng)))
    m2 = float(np.median(evaluate_many(problem, x2, n, rng)))
    return int(np.sign(m1 - m2))


OEP_COLUMNS = ("function", "alpha", "beta", "K", "method", "reference", "oep", "stderr", "analytic",
               "expected_sign", "expected_sign_stderr", "hoeffding_bound", "sufficient_k_p90",
               "sufficient_k_p99", "asymptotic")


def cmd_oep(cfg: ExperimentConfig) -> dict:
    """Empirical and predicted OEP over the (alpha, beta, K, method) grid."""
    rows = []
    for fi, spec in enumerate(cfg.function_specs()):
        for ci, (alpha, beta) in enumerate(cfg.noise_grid(spec)):
            problem = make_problem({**spec, "alpha": alpha, "beta": beta})
            x1, x2 = resolve_pair(cfg, problem.dimension)
            rng = substream(cfg.seed, fi, ci, 0)
            eta_delta = order_sign(problem, x1, x2)
            eta_med = median_order(problem, x1, x2, cfg.sign_samples, rng)
            e, e_err = expected_sign(problem, x1, x2, cfg.sign_samples, rng)
            for ki, K in enumerate(cfg.K):
                for mi, method in enumerate(cfg.methods):
                    method = Method(method)
                    reference = eta_delta if method is Method.AVE else eta_med
                    est = estimate_oep(ComparatorKind(method, K), problem, x1, x2, cfg.trials, reference,
                                       substream(cfg.seed, fi, ci, 1 + ki, mi))
                    row = dict.fromkeys(OEP_COLUMNS)
                    row.update(function=problem.name, alpha=alpha, beta=beta, K=K, method=method.value,
                               reference=reference, oep=est.p, stderr=est.stderr,
                               expected_sign=e, expected_sign_stderr=e_err)
                    if method is Method.AVE:
                        try:
                            row["analytic"] = oep_average_analytic(problem, x1, x2, K,
                                                                   substream(cfg.seed, fi, ci, 1 + ki, mi, 1))
                        except DegenerateNoiseError:
                            row["analytic"] = None
                    if method is Method.SA:
                        row["hoeffding_bound"] = hoeffding_lower_bound(e, K)
                        if e != 0.0:
                            row["sufficient_k_p90"] = sufficient_k(e, 0.9)
                            row["sufficient_k_p99"] = sufficient_k(e, 0.99)
                    if problem.symmetric or alpha == 2.0:
                        try:
                            mu, sigma = asymptotic_moments(method, problem, x1, x2)
                            row["asymptotic"] = asymptotic_oep(method, mu, sigma, K)
                        except (ValueError, DegenerateNoiseError):
                            pass
                    rows.append(row)
    return {"version": __version__, "config": asdict(cfg), "rows": rows}


def _run_task(task):
    spec, alpha, beta, method, K, seed_key, cfg_dict = task
    cfg = ExperimentConfig(**cfg_dict)
    problem = make_problem({**spec, "alpha": alpha, "beta": beta})
    m0 = np.asarray(cfg.m0, dtype=float)
    if m0.ndim == 0:
        m0 = np.full(problem.dimension, float(m0))
    result = run(problem, Handler(method, K), None, cfg.iterations, m0, cfg.sigma0, substream(cfg.seed, *seed_key))
    return [tuple(getattr(r, c) for c in RUN_COLUMNS) for r in result.records], result.stop_reason


def _quantiles(values: np.ndarray):
    finite = values[~np.isnan(values)]
    if len(finite) == 0:
        return math.nan, math.nan, math.nan
    q25, q50, q75 = np.percentile(finite, [25, 50, 75])
    return float(q50), float(q25), float(q75)


AGGREGATE_COLUMNS = ("function", "alpha", "beta", "method", "K", "t", "evals", "runs",
                     "tau_b_median", "tau_b_q25", "tau_b_q75",
                     "tau_b_ma_median", "tau_b_ma_q25", "tau_b_ma_q75",
                     "f_delta_median", "f_delta_q25", "f_delta_q75", "sigma_median")


def cmd_experiment(cfg: ExperimentConfig, out: Path) -> dict:
    """Run the CMA-ES campaign grid; write per-run CSVs, aggregate.csv and manifest.json."""
    out.mkdir(parents=True, exist_ok=True)
    tasks, labels = [], []
    cfg_dict = asdict(cfg)
    for fi, spec in enumerate(cfg.function_specs()):
        fname = f"{fi}-{spec['kind']}"
        for ci, (alpha, beta) in enumerate(cfg.noise_grid(spec)):
            for mi, method in enumerate(cfg.methods):
                for ki, K in enumerate(cfg.K):
                    for seed in cfg.seeds:
                        tasks.append((spec, alpha, beta, method, int(K), (fi, ci, mi, ki, seed), cfg_dict))
                        labels.append((fname, alpha, beta, method, int(K), seed))
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]

    runs = []
    groups = {}
    for (fname, alpha, beta, method, K, seed), (records, stop_reason) in zip(labels, results):
        filename = f"{fname}_a{alpha:g}_b{beta:g}_{method}_K{K}_s{seed}.csv"
        write_csv(out / filename, RUN_COLUMNS, records)
        runs.append({"file": filename, "function": fname, "alpha": alpha, "beta": beta, "method": method,
                     "K": K, "seed": seed, "iterations_completed": len(records), "stop_reason": stop_reason})
        groups.setdefault((fname, alpha, beta, method, K), []).append(records)

    aggregate_rows = []
    for (fname, alpha, beta, method, K), group in groups.items():
        horizon = max((len(r) for r in group), default=0)
        tau = np.full((len(group), horizon), np.nan)
        smoothed = np.full((len(group), horizon), np.nan)
        f_delta = np.full((len(group), horizon), np.nan)
        sigma = np.full((len(group), horizon), np.nan)
        for s, records in enumerate(group):
            n = len(records)
            if n == 0:
                continue
            arr = np.array(records, dtype=float)
            tau[s, :n] = arr[:, 2]
            smoothed[s, :n] = moving_average(arr[:, 2], cfg.span)
            f_delta[s, :n] = arr[:, 3]
            sigma[s, :n] = arr[:, 4]
        for t in range(horizon):
            alive = int(np.count_nonzero(~np.isnan(f_delta[:, t])))
            evals = next(r[t][1] for r in group if len(r) > t)
            aggregate_rows.append((fname, alpha, beta, method, K, t + 1, evals, alive,
                                   *_quantiles(tau[:, t]), *_quantiles(smoothed[:, t]),
                                   *_quantiles(f_delta[:, t]), _quantiles(sigma[:, t])[0]))
    write_csv(out / "aggregate.csv", AGGREGATE_COLUMNS, aggregate_rows)

    # execution details (output path, worker count) stay out so the bytes depend only on the experiment
    echo = {k: v for k, v in cfg_dict.items() if k not in ("out", "jobs")}
    manifest = {"version": __version__, "config": echo, "master_seed": cfg.seed, "seeds": list(cfg.seeds),
                "runs": runs}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def cmd_validate(seed: int = 0) -> dict:
    report = validation.run_checks(seed)
    return {"version": __version__, "seed": seed, "passed": all(v["passed"] for v in report.values()),
            "checks": report}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signavg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("oep", "order-estimation probability sweep"),
                            ("experiment", "CMA-ES campaign"),
                            ("validate", "run the invariant checks")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (overrides config 'out')")
        p.add_argument("--seed", type=int, help="master seed (overrides config 'seed')")
        if name != "validate":
            p.add_argument("--jobs", type=int, help="worker processes (overrides config 'jobs')")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    overrides = {"out": args.out, "seed": args.seed, "jobs": getattr(args, "jobs", None)}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg.out)
    try:
        if args.command == "validate":
            report = cmd_validate(cfg.seed)
            out.mkdir(parents=True, exist_ok=True)
            (out / "validate.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
            for name, result in report["checks"].items():
                print(f"{'PASS' if result['passed'] else 'FAIL'} {name}: {result['detail']}")
            return 0 if report["passed"] else 1
        if args.command == "oep":
            report = cmd_oep(cfg)
            out.mkdir(parents=True, exist_ok=True)
            (out / "oep.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
            write_csv(out / "oep.csv", OEP_COLUMNS, [[r[c] for c in OEP_COLUMNS] for r in report["rows"]])
            log.info("wrote %d rows to %s", len(report["rows"]), out)
            return 0
        manifest = cmd_experiment(cfg, out)
        log.info("wrote %d runs to %s", len(manifest["runs"]), out)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
