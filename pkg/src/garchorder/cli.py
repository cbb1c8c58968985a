"""``garchorder`` command line.

Exit codes: 0 when every gate passes, 2 for configuration or usage errors,
3 when a premise of the requested comparison is violated, 4 when a verdict
gate fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .core import AsymmetricInnovationError, DivergenceError
from .experiments import (
    ConfigError,
    ExperimentConfig,
    PremiseError,
    fig1_config,
    parse_innovation,
    run_compare_innovations,
    run_fig1,
    run_simulate,
    run_sweep,
)
from .oracle import THEOREMS, Scenario, builtin_suite, report_json, verify_theorem

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PREMISE = 3
EXIT_VERDICT = 4


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON experiment config")
    p.add_argument("--seed", type=int, help="master seed (required unless set in the config)")
    p.add_argument("--paths", type=int, help="number of simulated paths")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--allow-nonstationary", action="store_true",
                   help="accept alpha1 + beta1 >= 1")
    p.add_argument("--jobs", type=int, help="worker threads for simulation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="garchorder",
        description="Stochastic-order experiments for GARCH-like processes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fig1", help="baseline 0.2 coefficients vs one-at-a-time 0.5 variants")
    _add_common(p)

    p = sub.add_parser("verify", help="exact theorem checks by path enumeration")
    p.add_argument("theorem", help="theorem id or 'all'")
    p.add_argument("--scenario", type=Path,
                   help="JSON scenario (or list of scenarios) instead of the bundled suite")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--full", action="store_true", help="include order curves in the report")

    p = sub.add_parser("sweep", help="monotonicity in one GARCH(1,1) coefficient")
    _add_common(p)
    p.add_argument("--parameter", required=True, choices=("alpha0", "alpha1", "beta1"))
    p.add_argument("--values", required=True,
                   help="comma-separated, strictly increasing values")

    p = sub.add_parser("compare-innovations", help="same model under two innovation laws")
    _add_common(p)
    p.add_argument("--innov-a", required=True,
                   help="e.g. gaussian, student_t:df=5,normalized=true, or a JSON object")
    p.add_argument("--innov-b", required=True)

    p = sub.add_parser("simulate", help="simulate the baseline and write per-path output")
    _add_common(p)
    return parser


def _load_config(args, default: ExperimentConfig) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else default
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.paths is not None:
        changes["n_paths"] = args.paths
    if args.out is not None:
        changes["outputs"] = str(args.out)
    if args.allow_nonstationary:
        changes["allow_nonstationary"] = True
    if args.jobs is not None:
        changes["n_jobs"] = args.jobs
    return replace(cfg, **changes)


def _exit_for(report) -> int:
    return EXIT_OK if report.passed else EXIT_VERDICT


def _print_gates(report) -> None:
    for gate in report.gates:
        print(f"{'PASS' if gate['passed'] else 'FAIL'}  {gate['name']}")
    print(f"{report.experiment}: {'pass' if report.passed else 'FAIL'} "
          f"({len(report.manifest)} files in output directory)")


def _cmd_fig1(args) -> int:
    report = run_fig1(_load_config(args, fig1_config()))
    _print_gates(report)
    return _exit_for(report)


def _cmd_sweep(args) -> int:
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values must be comma-separated numbers: {exc}") from exc
    report = run_sweep(_load_config(args, ExperimentConfig()), args.parameter, values)
    _print_gates(report)
    return _exit_for(report)


def _cmd_compare(args) -> int:
    innov_a = parse_innovation(args.innov_a)
    innov_b = parse_innovation(args.innov_b)
    report = run_compare_innovations(_load_config(args, ExperimentConfig()), innov_a, innov_b)
    for v in report.verdicts:
        print(f"{v['name']:>10}: {v['direction']}  margin={v['margin']:.4g}")
    return _exit_for(report)


def _cmd_simulate(args) -> int:
    report = run_simulate(_load_config(args, ExperimentConfig()))
    print(f"wrote {', '.join(report.manifest)}")
    return EXIT_OK


def _load_scenarios(path: Path) -> list[Scenario]:
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file {path} is not valid JSON: {exc}") from exc
    items = data if isinstance(data, list) else [data]
    try:
        return [Scenario.from_dict(item) for item in items]
    except AsymmetricInnovationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario: {exc}") from exc


def _cmd_verify(args) -> int:
    if args.theorem != "all" and args.theorem not in THEOREMS:
        raise ConfigError(f"unknown theorem {args.theorem!r}; valid ids: all, "
                          + ", ".join(THEOREMS))
    ids = list(THEOREMS) if args.theorem == "all" else [args.theorem]
    if args.scenario:
        scenarios = _load_scenarios(args.scenario)
        jobs = [(tid, s) for tid in ids for s in scenarios]
    else:
        suite = builtin_suite()
        jobs = [(tid, s) for tid in ids for s in suite[tid]]
    reports = [verify_theorem(tid, s) for tid, s in jobs]
    for r in reports:
        slack = "-" if r.slack is None else f"{r.slack:.3g}"
        print(f"{r.status.upper():>15}  {r.theorem:<17} {r.scenario.name}  slack={slack}"
              + (f"  ({r.message})" if r.message else ""))
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"verify__{args.theorem}__exact.json").write_text(
            report_json(reports, curves=args.full) + "\n")
    if any(r.status == "fail" for r in reports):
        return EXIT_VERDICT
    if any(r.status == "premise_failure" for r in reports):
        return EXIT_PREMISE
    return EXIT_OK


_COMMANDS = {
    "fig1": _cmd_fig1,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "compare-innovations": _cmd_compare,
    "simulate": _cmd_simulate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (AsymmetricInnovationError, PremiseError) as exc:
        print(f"premise violated: {exc}", file=sys.stderr)
        return EXIT_PREMISE
    except (ConfigError, DivergenceError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
