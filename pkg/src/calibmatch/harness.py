"""Config-driven experiment runner: calibrate, solve, report."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from calibmatch.calibrator import (
    CalibrationParams,
    audit,
    exact_correlations,
    iteration_bound,
    plan_sample_budget,
    weighted_mc,
)
from calibmatch.errors import CalibMatchError, ConfigurationError
from calibmatch.model import TabularPredictor, mse_potential, rule_value
from calibmatch.scenarios import Scenario, from_preset
from calibmatch.weights import build_weight_class

log = logging.getLogger(__name__)

SCHEMA = "calibmatch-report/1"
TOL = 1e-9
SWEEP_COLUMNS = ("epsilon", "max_before", "after", "iterations",
                 "potential_initial", "potential_final", "audit_final")


@dataclass
class ExperimentConfig:
    scenario: dict
    epsilon: float
    mode: str = "exact"
    delta: float | None = None
    seed: int = 0
    max_iter: int | None = None
    alpha_override: float | None = None
    out: str | None = None

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ConfigurationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.mode not in ("exact", "empirical"):
            raise ConfigurationError(f"mode must be exact or empirical, got {self.mode!r}")
        if self.mode == "empirical" and not (self.delta is not None and 0 < self.delta < 1):
            raise ConfigurationError("empirical mode needs delta in (0, 1)")
        if "preset" not in self.scenario and "inline" not in self.scenario:
            raise ConfigurationError("scenario needs a 'preset' name or an 'inline' scenario")

    def build_scenario(self) -> Scenario:
        if "inline" in self.scenario:
            return Scenario.from_dict(self.scenario["inline"])
        return from_preset(self.scenario["preset"], self.seed, **self.scenario.get("params", {}))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"scenario", "epsilon", "mode", "delta", "seed", "max_iter", "alpha_override", "out"}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        if "scenario" not in d or "epsilon" not in d:
            raise ConfigurationError("config needs 'scenario' and 'epsilon'")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc


def derive_alpha(scenario: Scenario, epsilon: float) -> float:
    """Calibration slack that makes the end-to-end loss at most ``epsilon``.

    The loss is bounded by twice the unnormalized audit bound, i.e.
    2 * scale * alpha, so alpha = epsilon / (2 * scale): epsilon / (2m) for
    matchings and actions, epsilon / (2 * rank) for matroids.
    """
    return epsilon / (2 * scenario.problem.calibration_scale)


@dataclass
class Report:
    config: dict
    scenario: str
    problem: dict
    m: int
    scale: int
    alpha: float
    alpha_overridden: bool
    eta: float
    values_before: dict
    max_before: float
    value_after: float
    iterations: int
    status: str
    iteration_bound: int
    potential_initial: float
    potential_final: float
    audit_initial: float
    audit_final: float
    budget: dict | None
    checks: dict
    trace: list = field(default_factory=list)
    schema: str = SCHEMA

    @property
    def failed_checks(self) -> list[str]:
        return [k for k, v in self.checks.items() if v is False]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(**d)


def run_experiment(config: ExperimentConfig) -> Report:
    scenario = config.build_scenario()
    problem, dist, gamma = scenario.problem, scenario.dist, scenario.gamma
    c_star = scenario.c_star
    W = build_weight_class(scenario.rules, c_star, gamma, problem)
    d = problem.calibration_scale
    alpha = config.alpha_override if config.alpha_override is not None else derive_alpha(
        scenario, config.epsilon)

    r = mse_potential(dist, gamma)
    bound = iteration_bound(r, d, alpha)
    budget = None
    if config.mode == "exact":
        params = CalibrationParams(alpha, max_iter=config.max_iter, mode="exact", seed=config.seed)
    else:
        plan = plan_sample_budget(r, d, alpha, config.delta, len(W))
        budget = {"T_max": plan.T_max, "N_per_call": plan.N_per_call,
                  "total_planned": plan.total, "delta0": plan.delta0}
        cap = config.max_iter if config.max_iter is not None else max(1, 2 * plan.T_max)
        params = CalibrationParams(alpha, max_iter=cap, mode="empirical",
                                   samples_per_call=plan.N_per_call, seed=config.seed)

    log.info("calibrating %s: alpha=%.6g mode=%s", scenario.label, alpha, config.mode)
    gamma_hat, trace = weighted_mc(gamma, W, params, dist)
    if budget is not None:
        budget.update(samples_used=trace.samples_used, check_calls=trace.check_calls)

    before = {c.id: rule_value(dist, gamma, c, problem) for c in scenario.rules}
    max_before = max(before.values()) if before else -math.inf
    after = rule_value(dist, gamma_hat, c_star, problem)
    audit_final = audit(dist, gamma_hat, W)
    exact = config.mode == "exact"
    checks = {
        "guarantee": after + config.epsilon >= max_before - TOL,
        "audit_within_alpha": audit_final <= alpha + TOL if exact else None,
        "mse_non_degradation": trace.final_potential <= trace.initial_potential + TOL if exact else None,
        "iteration_bound": trace.iterations <= bound if exact and config.alpha_override is None
        and config.max_iter is None else None,
    }
    return Report(
        config=config.to_dict(),
        scenario=scenario.label,
        problem=problem.to_dict(),
        m=problem.m,
        scale=d,
        alpha=alpha,
        alpha_overridden=config.alpha_override is not None,
        eta=params.step,
        values_before=before,
        max_before=max_before,
        value_after=after,
        iterations=trace.iterations,
        status=trace.status,
        iteration_bound=bound,
        potential_initial=trace.initial_potential,
        potential_final=trace.final_potential,
        audit_initial=audit(dist, gamma, W),
        audit_final=audit_final,
        budget=budget,
        checks=checks,
        trace=[asdict(row) for row in trace.rows],
    )


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def emit_report(report: Report, out_dir, formats=("json", "csv")) -> list[Path]:
    """Write report.json, values.csv and trace.csv into ``out_dir``."""
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        if "json" in formats:
            path = out / "report.json"
            path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
            written.append(path)
        if "csv" in formats:
            path = out / "values.csv"
            rows = [(rid, v, "") for rid, v in report.values_before.items()]
            rows.append(("cstar", "", report.value_after))
            _write_csv(path, ("rule", "value_before", "value_after"), rows)
            written.append(path)
            path = out / "trace.csv"
            write_trace_csv(report.trace, path)
            written.append(path)
    except OSError as exc:
        raise CalibMatchError(f"cannot write report to {out}: {exc}") from exc
    return written


def write_trace_csv(rows, path) -> None:
    rows = [r if isinstance(r, dict) else asdict(r) for r in rows]
    _write_csv(Path(path), ("iter", "weight_id", "b", "potential", "z"),
               [(r["iter"], r["weight_id"], r["sign"], r["potential"], r["z"]) for r in rows])


def load_report(path) -> Report:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("schema") != SCHEMA:
        raise ConfigurationError(f"unsupported report schema {data.get('schema')!r}")
    return Report.from_dict(data)


class SweepAborted(CalibMatchError):
    def __init__(self, message, rows):
        super().__init__(message)
        self.rows = rows


def sweep(base: ExperimentConfig, eps_list, out_dir=None) -> list[dict]:
    """One run per epsilon; rows follow ``eps_list`` order."""
    eps_list = list(eps_list)
    if not eps_list:
        raise ConfigurationError("eps_list must be nonempty")
    rows = []
    out = Path(out_dir) if out_dir is not None else None
    for i, eps in enumerate(eps_list):
        cfg = ExperimentConfig(**{**base.to_dict(), "epsilon": float(eps)})
        try:
            report = run_experiment(cfg)
        except CalibMatchError as exc:
            if out is not None:
                _write_sweep(out, rows, partial=True)
            raise SweepAborted(f"run for epsilon={eps} failed: {exc}", rows) from exc
        rows.append({
            "epsilon": float(eps),
            "max_before": report.max_before,
            "after": report.value_after,
            "iterations": report.iterations,
            "potential_initial": report.potential_initial,
            "potential_final": report.potential_final,
            "audit_final": report.audit_final,
        })
        if out is not None:
            emit_report(report, out / f"run_{i:03d}_eps_{eps:g}")
    if out is not None:
        _write_sweep(out, rows)
    return rows


def _write_sweep(out: Path, rows, partial=False) -> None:
    out.mkdir(parents=True, exist_ok=True)
    name = "sweep.partial.csv" if partial else "sweep.csv"
    _write_csv(out / name, SWEEP_COLUMNS, [[r[c] for c in SWEEP_COLUMNS] for r in rows])


def audit_predictor(config: ExperimentConfig, table=None) -> dict:
    """Audit ``table`` (default: the scenario's original predictor)."""
    scenario = config.build_scenario()
    W = build_weight_class(scenario.rules, scenario.c_star, scenario.gamma, scenario.problem)
    predictor = scenario.gamma if table is None else TabularPredictor(np.asarray(table, float))
    alpha = config.alpha_override if config.alpha_override is not None else derive_alpha(
        scenario, config.epsilon)
    z = exact_correlations(scenario.dist, predictor.table, W)
    value = audit(scenario.dist, predictor, W)
    return {
        "schema": SCHEMA,
        "scenario": scenario.label,
        "alpha": alpha,
        "audit": value,
        "calibrated": value <= alpha + TOL,
        "correlations": {w.id: float(zi) for w, zi in zip(W, z)},
        "mse": mse_potential(scenario.dist, predictor),
    }
