"""Seeded Monte Carlo experiments that write CSV curves and JSON reports.

Every experiment simulates all of its variants from one master seed, so
variants share uniforms (common random numbers) and repeated runs produce
byte-identical files.  Output files are named
``<experiment>__<variant>__<seed>.<ext>``.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import (
    AsymmetricInnovationError,
    GarchParams,
    InitialStateSpec,
    InnovationSpec,
    garch11_m1,
    garch11_m2,
    logreturn_sums,
    recursion_from_label,
    simulate_paths,
)
from .distributions import EmpiricalDist, kurtosis_beta2
from .orders import (
    Direction,
    binned_kde,
    check_cx,
    check_icx,
    check_st,
    silverman_bandwidth,
)

__all__ = [
    "SCHEMA_VERSION",
    "MIN_PATHS",
    "ConfigError",
    "PremiseError",
    "ExperimentConfig",
    "ExperimentReport",
    "fig1_config",
    "run_fig1",
    "run_sweep",
    "run_compare_innovations",
    "run_simulate",
    "output_name",
]

SCHEMA_VERSION = 1
MIN_PATHS = 1000
CURVE_HEADER = ("grid_point", "value_baseline", "value_variant")
GATE_SE = 4.0
DENSITY_POINTS = 401

_MODELS = ("garch11", "m1_custom", "m2_custom")
_GARCH_NAMES = ("alpha0", "alpha1", "beta1")


class ConfigError(ValueError):
    """Configuration cannot describe a valid experiment."""


class PremiseError(ValueError):
    """Inputs violate a hypothesis the requested comparison relies on."""


def _fmt(value) -> str:
    return repr(float(value))


def output_name(experiment: str, variant: str, seed, ext: str) -> str:
    return f"{experiment}__{variant}__{seed}.{ext}"


def variant_label(overrides: dict) -> str:
    if not overrides:
        return "baseline"
    return "+".join(f"{k}={overrides[k]:g}" if isinstance(overrides[k], (int, float))
                    else f"{k}={overrides[k]}" for k in sorted(overrides))


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    ``params`` holds the GARCH(1,1) triple for ``model="garch11"`` and the
    recursion's own parameters for the custom models (with ``recursion``
    naming the builder).  Each entry of ``variants`` overrides some of
    ``params``.
    """

    seed: int | None = None
    model: str = "garch11"
    params: dict = field(default_factory=lambda: {"alpha0": 0.2, "alpha1": 0.2, "beta1": 0.2})
    recursion: str | None = None
    coordinates: str = "M2"
    innovations: InnovationSpec = field(default_factory=InnovationSpec)
    init: InitialStateSpec = field(default_factory=lambda: InitialStateSpec("half_gaussian", 1.0))
    n_steps: int = 50
    n_paths: int = 100_000
    variants: list = field(default_factory=list)
    outputs: str = "out"
    allow_nonstationary: bool = False
    n_jobs: int = 1

    _KEYS = ("seed", "model", "params", "recursion", "coordinates", "innovations", "init",
             "n_steps", "n_paths", "variants", "outputs", "allow_nonstationary", "n_jobs")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - set(cls._KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values = dict(data)
        try:
            if "innovations" in values:
                values["innovations"] = InnovationSpec.from_dict(values["innovations"])
            if "init" in values:
                init = dict(values["init"])
                extra = set(init) - {"mode", "value"}
                if extra:
                    raise ConfigError(f"unknown init keys: {sorted(extra)}")
                values["init"] = InitialStateSpec(**init)
        except AsymmetricInnovationError:
            raise
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self, runtime: bool = True) -> dict:
        """Plain-data form; ``runtime=False`` drops fields that cannot change results."""
        out = {
            "seed": self.seed,
            "model": self.model,
            "params": dict(self.params),
            "recursion": self.recursion,
            "coordinates": self.coordinates,
            "innovations": self.innovations.to_dict(),
            "init": {"mode": self.init.mode, "value": self.init.value},
            "n_steps": self.n_steps,
            "n_paths": self.n_paths,
            "variants": [dict(v) for v in self.variants],
            "outputs": self.outputs,
            "allow_nonstationary": self.allow_nonstationary,
            "n_jobs": self.n_jobs,
        }
        if not runtime:
            del out["outputs"], out["n_jobs"]
        return out

    def validate(self, statistical: bool = True) -> "ExperimentConfig":
        if self.seed is None:
            raise ConfigError("a seed is required (--seed or \"seed\" in the config)")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.model not in _MODELS:
            raise ConfigError(f"model must be one of {_MODELS}, got {self.model!r}")
        if self.model != "garch11" and not self.recursion:
            raise ConfigError(f"model {self.model!r} needs a 'recursion' label")
        if self.coordinates not in ("M1", "M2"):
            raise ConfigError(f"coordinates must be 'M1' or 'M2', got {self.coordinates!r}")
        if not isinstance(self.n_steps, int) or self.n_steps < 1:
            raise ConfigError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        if not isinstance(self.n_paths, int) or self.n_paths < 1:
            raise ConfigError(f"n_paths must be a positive integer, got {self.n_paths!r}")
        if statistical and self.n_paths < MIN_PATHS:
            raise ConfigError(f"n_paths = {self.n_paths} is below the statistical floor of {MIN_PATHS}")
        if not isinstance(self.n_jobs, int) or self.n_jobs == 0 or self.n_jobs < -1:
            raise ConfigError(f"n_jobs must be a positive integer or -1, got {self.n_jobs!r}")
        for overrides in self.variants:
            if not isinstance(overrides, dict) or not overrides:
                raise ConfigError("each variant must be a non-empty mapping of parameter overrides")
            unknown = set(overrides) - set(self.params)
            if unknown:
                raise ConfigError(f"variant overrides unknown parameters {sorted(unknown)}")
            if all(overrides[k] == self.params[k] for k in overrides):
                raise ConfigError(f"variant {overrides} does not differ from the baseline")
        for overrides in [{}] + list(self.variants):
            self.recursion_for(overrides)
        return self

    def recursion_for(self, overrides: dict | None = None):
        params = {**self.params, **(overrides or {})}
        try:
            if self.model == "garch11":
                extra = set(params) - set(_GARCH_NAMES)
                if extra:
                    raise ConfigError(f"garch11 params take only {_GARCH_NAMES}, got {sorted(extra)}")
                gp = GarchParams(**params, unchecked=self.allow_nonstationary)
                return garch11_m2(gp) if self.coordinates == "M2" else garch11_m1(gp)
            rec = recursion_from_label(self.recursion, params)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        expected = "M1" if self.model == "m1_custom" else "M2"
        if rec.kind != expected:
            raise ConfigError(f"recursion {self.recursion!r} is {rec.kind}, model needs {expected}")
        return rec

    def simulate(self, overrides: dict | None = None, innovations: InnovationSpec | None = None):
        return simulate_paths(self.recursion_for(overrides), innovations or self.innovations,
                              self.init, self.n_steps, self.n_paths, self.seed, n_jobs=self.n_jobs)


def fig1_config(seed: int | None = None, **changes) -> ExperimentConfig:
    """Baseline with every coefficient at 0.2 plus three one-at-a-time 0.5 variants."""
    cfg = ExperimentConfig(
        seed=seed,
        variants=[{"alpha0": 0.5}, {"alpha1": 0.5}, {"beta1": 0.5}],
    )
    return replace(cfg, **changes)


@dataclass
class ExperimentReport:
    experiment: str
    seed: int | None
    config: dict
    summaries: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    gates: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    manifest: list = field(default_factory=list)
    exit_status: str | None = None

    @property
    def passed(self) -> bool:
        return all(g["passed"] for g in self.gates)

    @property
    def status(self) -> str:
        if self.exit_status is not None:
            return self.exit_status
        return "pass" if self.passed else "verdict_failure"

    def add_gate(self, name: str, passed: bool, **detail):
        self.gates.append({"name": name, "passed": bool(passed), **detail})

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "experiment": self.experiment,
            "seed": self.seed,
            "status": self.status,
            "passed": self.passed,
            "config": self.config,
            "summaries": self.summaries,
            "verdicts": self.verdicts,
            "gates": self.gates,
            "diagnostics": self.diagnostics,
            "manifest": self.manifest,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def write(self, out_dir, variant: str = "report") -> Path:
        name = output_name(self.experiment, variant, self.seed, "json")
        self.manifest.append(name)
        path = Path(out_dir) / name
        path.write_text(self.to_json())
        return path


def _write_curve(path: Path, grid, baseline, variant) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVE_HEADER)
        for row in zip(grid, baseline, variant):
            writer.writerow([_fmt(v) for v in row])


def _summary(sample) -> dict:
    sample = np.asarray(sample, dtype=float)
    n = sample.size
    centered = sample - sample.mean()
    var = float(np.mean(centered**2))
    return {
        "n": n,
        "mean": float(sample.mean()),
        "mean_se": float(math.sqrt(sample.var(ddof=1) / n)),
        "variance": float(sample.var(ddof=1)),
        "variance_se": float(math.sqrt(max(np.mean(centered**4) - var * var, 0.0) / n)),
        "beta2": float(kurtosis_beta2(EmpiricalDist(sample))),
    }


def _paired_variance_gap(base, other) -> tuple[float, float]:
    """Variance difference ``Var(other) - Var(base)`` and its paired standard error."""
    d = (other - other.mean()) ** 2 - (base - base.mean()) ** 2
    return float(other.var(ddof=1) - base.var(ddof=1)), float(d.std(ddof=1) / math.sqrt(d.size))


def _verdict_entry(name: str, variant: str, verdict) -> dict:
    return {"name": name, "variant": variant, **verdict.to_dict(curves=False)}


def _holds(verdict) -> bool:
    return verdict.direction in (Direction.A_BELOW_B, Direction.INDISTINGUISHABLE)


def _prepare_out(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.outputs)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_fig1(cfg: ExperimentConfig) -> ExperimentReport:
    """Compare the logreturn sum of the baseline against each variant.

    Writes the sums of every variant, kernel densities on a shared grid and
    bandwidth, stop-loss curves and the convex-order verdicts.  Gates: each
    variant's stop-loss curve lies above the baseline's everywhere within
    the noise band with means matching, its variance exceeds the
    baseline's by more than four paired standard errors, and every sample
    mean is within four standard errors of zero.
    """
    if cfg.model != "garch11":
        raise ConfigError("fig1 needs model = garch11")
    if not cfg.variants:
        raise ConfigError("fig1 needs at least one variant")
    cfg.validate()
    out = _prepare_out(cfg)
    report = ExperimentReport("fig1", cfg.seed, cfg.to_dict(runtime=False))

    labels = ["baseline"] + [variant_label(v) for v in cfg.variants]
    sums = {label: logreturn_sums(cfg.simulate(ov))
            for label, ov in zip(labels, [{}] + list(cfg.variants))}

    name = output_name("fig1-samples", "all", cfg.seed, "csv")
    with open(out / name, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["path_id"] + [f"S_{cfg.n_steps}_{label}" for label in labels])
        for i, row in enumerate(zip(*(sums[label] for label in labels))):
            writer.writerow([i] + [_fmt(v) for v in row])
    report.manifest.append(name)

    pooled = np.concatenate(list(sums.values()))
    bandwidth = silverman_bandwidth(pooled)
    lo, hi = np.quantile(pooled, [0.0005, 0.9995])
    grid = np.linspace(lo, hi, DENSITY_POINTS)
    densities = {label: binned_kde(s, grid, bandwidth) for label, s in sums.items()}
    report.diagnostics["kde_bandwidth"] = bandwidth
    for label in labels:
        name = output_name("fig1-density", label, cfg.seed, "csv")
        _write_curve(out / name, grid, densities["baseline"], densities[label])
        report.manifest.append(name)

    base = sums["baseline"]
    for label in labels:
        report.summaries[label] = _summary(sums[label])
        s = report.summaries[label]
        z = abs(s["mean"]) / s["mean_se"]
        report.add_gate(f"mean_zero[{label}]", z < GATE_SE, z=z, threshold=GATE_SE)

    base_dist = EmpiricalDist(base)
    for label in labels[1:]:
        other = EmpiricalDist(sums[label])
        verdict = check_cx(base_dist, other)
        report.verdicts.append(_verdict_entry("cx_S", label, verdict))
        name = output_name("fig1-stoploss", label, cfg.seed, "csv")
        _write_curve(out / name, verdict.grid, base_dist.stop_loss(verdict.grid),
                     other.stop_loss(verdict.grid))
        report.manifest.append(name)
        # every gap within the band; A_below_B additionally means the gap is resolved
        report.add_gate(f"stoploss_dominance[{label}]",
                        verdict.holds and verdict.is_consistent(),
                        direction=verdict.direction.value, margin=verdict.margin,
                        tolerance=verdict.tolerance)
        gap, se = _paired_variance_gap(base, sums[label])
        report.add_gate(f"variance_increase[{label}]", gap > GATE_SE * se,
                        gap=gap, se=se, z=gap / se, threshold=GATE_SE)

    report.write(out)
    return report


def run_sweep(cfg: ExperimentConfig, parameter: str, values) -> ExperimentReport:
    """Simulate the baseline with ``parameter`` set to each value in turn.

    Consecutive values are compared for ``|X_n|`` (st), ``X_n`` (cx) and
    ``S_n`` (cx), where ``X_n`` is the last simulated logreturn.
    """
    if cfg.model != "garch11":
        raise ConfigError("sweep needs model = garch11")
    if parameter not in _GARCH_NAMES:
        raise ConfigError(f"sweep parameter must be one of {_GARCH_NAMES}, got {parameter!r}")
    values = [float(v) for v in values]
    if not values:
        raise ConfigError("sweep needs at least one value")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(f"sweep values must be strictly increasing, got {values}")
    cfg = replace(cfg, variants=[])
    cfg.validate()
    for v in values:
        cfg.recursion_for({parameter: v})
    out = _prepare_out(cfg)
    report = ExperimentReport(f"sweep-{parameter}", cfg.seed, cfg.to_dict(runtime=False))
    report.diagnostics["values"] = values

    batches = [cfg.simulate({parameter: v}) for v in values]
    labels = [variant_label({parameter: v}) for v in values]
    sums = [logreturn_sums(b) for b in batches]
    for label, s in zip(labels, sums):
        report.summaries[label] = _summary(s)

    for i in range(len(values) - 1):
        pair = f"{labels[i]}->{labels[i + 1]}"
        xa, xb = batches[i].x[:, -1], batches[i + 1].x[:, -1]
        checks = [
            ("st_abs_X", check_st(EmpiricalDist(np.abs(xa)), EmpiricalDist(np.abs(xb)))),
            ("cx_X", check_cx(EmpiricalDist(xa), EmpiricalDist(xb))),
            ("cx_S", check_cx(EmpiricalDist(sums[i]), EmpiricalDist(sums[i + 1]))),
        ]
        for name, verdict in checks:
            report.verdicts.append(_verdict_entry(name, pair, verdict))
            report.add_gate(f"{name}[{pair}]", _holds(verdict) and verdict.is_consistent(),
                            direction=verdict.direction.value)
        gap, se = _paired_variance_gap(sums[i], sums[i + 1])
        report.diagnostics.setdefault("variance_steps", []).append(
            {"pair": pair, "gap": gap, "se": se, "z": gap / se if se > 0 else None})

    name = output_name(f"sweep-{parameter}", "variance", cfg.seed, "csv")
    base_var = report.summaries[labels[0]]["variance"]
    _write_curve(out / name, values, [base_var] * len(values),
                 [report.summaries[label]["variance"] for label in labels])
    report.manifest.append(name)
    report.write(out)
    return report


def parse_innovation(text: str) -> InnovationSpec:
    """Parse ``family[:key=value,...]``, e.g. ``student_t:df=5,normalized=true``.

    A JSON object is accepted as well.
    """
    text = text.strip()
    if text.startswith("{"):
        try:
            return InnovationSpec.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad innovation JSON: {exc}") from exc
    family, _, rest = text.partition(":")
    kwargs: dict = {"family": family}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"innovation option {item!r} must look like key=value")
        if key == "normalized":
            if value.lower() not in ("true", "false", "1", "0"):
                raise ConfigError(f"normalized must be true or false, got {value!r}")
            kwargs[key] = value.lower() in ("true", "1")
        elif key in ("df", "scale"):
            kwargs[key] = float(value)
        else:
            raise ConfigError(f"unknown innovation option {key!r}")
    return InnovationSpec.from_dict(kwargs)


def run_compare_innovations(cfg: ExperimentConfig, innov_a: InnovationSpec,
                            innov_b: InnovationSpec) -> ExperimentReport:
    """Simulate the same model under two innovation laws with shared uniforms.

    Verdicts are reported as measured; there are no gates beyond internal
    consistency of each verdict.
    """
    cfg = replace(cfg, variants=[])
    cfg.validate()
    out = _prepare_out(cfg)
    report = ExperimentReport("compare-innovations", cfg.seed, cfg.to_dict(runtime=False))
    report.diagnostics["innovations"] = {"A": innov_a.to_dict(), "B": innov_b.to_dict()}

    ba, bb = cfg.simulate(innovations=innov_a), cfg.simulate(innovations=innov_b)
    xa, xb = ba.x[:, -1], bb.x[:, -1]
    sa, sb = logreturn_sums(ba), logreturn_sums(bb)
    report.summaries = {"A": _summary(sa), "B": _summary(sb)}
    checks = [
        ("st_abs_X", check_st(EmpiricalDist(np.abs(xa)), EmpiricalDist(np.abs(xb)))),
        ("icx_sq_X", check_icx(EmpiricalDist(xa**2), EmpiricalDist(xb**2))),
        ("cx_X", check_cx(EmpiricalDist(xa), EmpiricalDist(xb))),
        ("cx_S", check_cx(EmpiricalDist(sa), EmpiricalDist(sb))),
    ]
    for name, verdict in checks:
        report.verdicts.append(_verdict_entry(name, "A_vs_B", verdict))
        report.add_gate(f"consistent[{name}]", verdict.is_consistent())
        if name == "cx_S":
            curve = output_name("compare-innovations", "stoploss-S", cfg.seed, "csv")
            _write_curve(out / curve, verdict.grid, EmpiricalDist(sa).stop_loss(verdict.grid),
                         EmpiricalDist(sb).stop_loss(verdict.grid))
            report.manifest.append(curve)

    report.diagnostics["beta2"] = {
        "exact": {"A": innov_a.kurtosis(), "B": innov_b.kurtosis()},
        "sample_eps": {"A": kurtosis_beta2(EmpiricalDist(ba.eps.ravel())),
                       "B": kurtosis_beta2(EmpiricalDist(bb.eps.ravel()))},
    }
    report.write(out)
    return report


def run_simulate(cfg: ExperimentConfig) -> ExperimentReport:
    """Simulate the baseline and write per-path sums and final volatilities."""
    cfg = replace(cfg, variants=[])
    cfg.validate(statistical=False)
    out = _prepare_out(cfg)
    report = ExperimentReport("simulate", cfg.seed, cfg.to_dict(runtime=False))
    batch = cfg.simulate()
    name = output_name("simulate", "baseline", cfg.seed, "csv")
    batch.to_csv(out / name)
    report.manifest.append(name)
    sums = logreturn_sums(batch)
    if sums.size >= 2:
        report.summaries["baseline"] = _summary(sums)
    report.write(out)
    return report


def manifest_ok(report: ExperimentReport, out_dir) -> bool:
    return all(os.path.getsize(Path(out_dir) / name) > 0 for name in report.manifest)
