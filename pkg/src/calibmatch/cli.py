"""Command-line entry point: ``calibmatch run|sweep|audit``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from calibmatch.errors import CalibMatchError, ConvergenceError
from calibmatch.harness import (
    ExperimentConfig,
    SweepAborted,
    audit_predictor,
    emit_report,
    run_experiment,
    sweep,
    write_trace_csv,
)

log = logging.getLogger("calibmatch")


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.mode is not None:
        overrides["mode"] = args.mode
    if args.out is not None:
        overrides["out"] = args.out
    if overrides:
        cfg = ExperimentConfig(**{**cfg.to_dict(), **overrides})
    return cfg


def _out_dir(cfg: ExperimentConfig) -> Path:
    return Path(cfg.out or "runs/latest")


def cmd_run(args) -> int:
    cfg = _load(args)
    out = _out_dir(cfg)
    try:
        report = run_experiment(cfg)
    except ConvergenceError as exc:
        if exc.trace is not None:
            out.mkdir(parents=True, exist_ok=True)
            write_trace_csv(exc.trace.rows, out / "trace.csv")
        print(f"FAIL exact_convergence: {exc}", file=sys.stderr)
        return 3
    emit_report(report, out)
    print(f"max_before={report.max_before:.6g} after={report.value_after:.6g} "
          f"eps={cfg.epsilon:g} iterations={report.iterations} status={report.status}")
    failed = report.failed_checks
    for name in failed:
        print(f"FAIL {name}", file=sys.stderr)
    return 1 if failed else 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if not args.epsilons:
        print("sweep needs --epsilons", file=sys.stderr)
        return 2
    eps = [float(x) for x in args.epsilons.split(",") if x.strip()]
    out = _out_dir(cfg)
    try:
        rows = sweep(cfg, eps, out)
    except SweepAborted as exc:
        print(f"FAIL sweep: {exc} ({len(exc.rows)} rows kept)", file=sys.stderr)
        return 3
    failed = [r["epsilon"] for r in rows if r["after"] + r["epsilon"] < r["max_before"] - 1e-9]
    print(f"wrote {len(rows)} rows to {out / 'sweep.csv'}")
    for e in failed:
        print(f"FAIL guarantee at epsilon={e:g}", file=sys.stderr)
    return 1 if failed else 0


def cmd_audit(args) -> int:
    cfg = _load(args)
    table = None
    if args.predictor:
        data = json.loads(Path(args.predictor).read_text(encoding="utf-8"))
        table = data["table"] if isinstance(data, dict) else data
    result = audit_predictor(cfg, table)
    print(json.dumps(result, indent=2, sort_keys=True))
    if not result["calibrated"]:
        print(f"FAIL audit_within_alpha: {result['audit']:.6g} > {result['alpha']:.6g}",
              file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="calibmatch", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("sweep", cmd_sweep), ("audit", cmd_audit)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--mode", choices=("exact", "empirical"))
        if name == "sweep":
            p.add_argument("--epsilons", help="comma-separated epsilon values")
        if name == "audit":
            p.add_argument("--predictor", help="JSON file with a 'table' array (default: gamma)")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CalibMatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
