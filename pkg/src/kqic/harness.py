"""Repeated-trial rejection-rate experiments and real-data analyses.

One experiment cell is a (method, parameter, n) combination; each cell runs
``trials`` independent trials.  Trial t of cell c derives its randomness
from the spawn key (1, c, t) under the master seed, and censoring-rate
tuning for parameter index p uses (0, p); any single trial is therefore
replayable from the report alone.  Reports are deterministic in the master
seed up to the recorded wall-clock runtimes.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import baselines
from .bootstrap import run_test
from .data import TruncatedDataset
from .errors import ConfigError, FeasibilityError
from .kernels import GAUSSIAN, IMQ
from .rng import stream
from .selection import SelectionConfig, median_heuristic_pair, select_or_median
from .simgen import DEPENDENT_CENSORING, GeneratorModel, gen_dataset, tune_censoring_rate

SCHEMA_VERSION = 1

METHODS = ("KQIC_Gauss", "KQIC_IMQ", "WLR", "WLR_SC", "MB", "MinP1", "MinP2")
_KERNEL_METHODS = {"KQIC_Gauss": GAUSSIAN, "KQIC_IMQ": IMQ}

CSV_HEADER = "method,param,n,trials,rejection_rate,mean_runtime_s"


@dataclass(frozen=True)
class ExperimentConfig:
    """A benchmark grid: generator template, sample sizes, parameter values.

    ``model.dependence`` is overridden by each entry of ``parameter_values``.
    ``bootstrap_draws`` is also the permutation budget of the MinP methods.
    """

    model: GeneratorModel
    n_values: tuple[int, ...]
    parameter_values: tuple[float, ...]
    methods: tuple[str, ...]
    trials: int = 200
    alpha: float = 0.05
    bootstrap_draws: int = 500
    selection: SelectionConfig | None = None
    master_seed: int = 0
    minp_min_events: int = 5

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(v) for v in self.n_values))
        object.__setattr__(self, "parameter_values", tuple(float(v) for v in self.parameter_values))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.methods:
            raise ConfigError("methods must be nonempty")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; choose from {METHODS}")
        if not self.n_values or any(n < 2 for n in self.n_values):
            raise ConfigError("n_values must be nonempty with every n >= 2")
        if not self.parameter_values:
            raise ConfigError("parameter_values must be nonempty")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must lie strictly between 0 and 1")


@dataclass(frozen=True)
class CellResult:
    """Aggregated outcome of one (method, parameter, n) cell."""

    method: str
    parameter: float
    n: int
    trials: int
    rejections: int
    rejection_rate: float
    mean_runtime_s: float
    cell_index: int
    trial_spawn_keys: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class RejectionReport:
    """Per-cell rejection rates plus a replayable config echo."""

    cells: tuple[CellResult, ...]
    config_echo: dict
    master_seed: int
    schema_version: int = SCHEMA_VERSION

    def to_dict(self, include_runtime: bool = True) -> dict:
        cells = []
        for c in self.cells:
            row = {
                "method": c.method,
                "param": c.parameter,
                "n": c.n,
                "trials": c.trials,
                "rejections": c.rejections,
                "rejection_rate": c.rejection_rate,
                "cell_index": c.cell_index,
                "trial_spawn_keys": [list(k) for k in c.trial_spawn_keys],
            }
            if include_runtime:
                row["mean_runtime_s"] = c.mean_runtime_s
            cells.append(row)
        return {
            "schema_version": self.schema_version,
            "master_seed": self.master_seed,
            "config": self.config_echo,
            "cells": cells,
        }

    def deterministic_view(self) -> dict:
        """Everything except wall-clock runtimes; identical across replays."""
        return self.to_dict(include_runtime=False)


def _config_echo(config: ExperimentConfig) -> dict:
    model = config.model
    sel = config.selection
    return {
        "model": {
            "kind": model.kind,
            "dependence": model.dependence,
            "censor_target": model.censor_target,
            "exp_convention": model.exp_convention,
        },
        "n_values": list(config.n_values),
        "parameter_values": list(config.parameter_values),
        "methods": list(config.methods),
        "trials": config.trials,
        "alpha": config.alpha,
        "bootstrap_draws": config.bootstrap_draws,
        "selection": None
        if sel is None
        else {
            "split_fraction": sel.split_fraction,
            "lam": sel.lam,
            "family": sel.family,
            "exponents": list(sel.exponents),
            "grid": None if sel.grid is None else f"explicit({len(sel.grid)})",
        },
        "master_seed": config.master_seed,
        "minp_min_events": config.minp_min_events,
    }


def _child_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63 - 1))


def _run_method(
    dataset: TruncatedDataset,
    method: str,
    config: ExperimentConfig,
    seed: int,
    selection_seed: int,
) -> bool:
    """Run one method on one dataset; True when the null is rejected."""
    draws, alpha = config.bootstrap_draws, config.alpha
    if method in _KERNEL_METHODS:
        family = _KERNEL_METHODS[method]
        if config.selection is not None:
            sel_cfg = replace(config.selection, seed=selection_seed, family=family)
            sel = select_or_median(dataset, sel_cfg)
            kx, ky = sel.chosen
            target = sel.test_subset
        else:
            kx, ky = median_heuristic_pair(dataset, family)
            target = dataset
        return run_test(target, kx, ky, draws=draws, alpha=alpha, seed=seed).reject
    if method == "WLR":
        return baselines.wlr_test(dataset, "R_weight", draws=draws, alpha=alpha, seed=seed).reject
    if method == "WLR_SC":
        return baselines.wlr_test(dataset, "SC_weight", draws=draws, alpha=alpha, seed=seed).reject
    if method == "MB":
        return baselines.mb_test(dataset, seed=seed, alpha=alpha).reject
    if method in (baselines.MINP1, baselines.MINP2):
        return baselines.minp_test(
            dataset,
            variant=method,
            min_events=config.minp_min_events,
            permutations=draws,
            seed=seed,
            alpha=alpha,
        ).reject
    raise ConfigError(f"unknown method {method!r}")


def resolve_censoring_rates(config: ExperimentConfig) -> dict[float, float | None]:
    """Tuned exponential censoring rate per parameter value (None when unused)."""
    rates: dict[float, float | None] = {}
    for pi, param in enumerate(config.parameter_values):
        model = replace(config.model, dependence=param)
        if model.kind == DEPENDENT_CENSORING or model.censor_target == 0.0:
            rates[param] = None
            continue
        tune_seed = _child_seed(stream(config.master_seed, 0, pi))
        rates[param] = tune_censoring_rate(model, model.censor_target, tune_seed)
    return rates


def run_benchmark(config: ExperimentConfig) -> RejectionReport:
    """Rejection rates over repeated trials for every (method, parameter, n) cell.

    Deterministic in ``master_seed`` (runtimes aside) regardless of execution
    order.  A feasibility error in any trial aborts its cell with a
    diagnostic naming the cell and trial; trials are never silently skipped.
    """
    rates = resolve_censoring_rates(config)
    cells = []
    cell_index = 0
    for method in config.methods:
        for param in config.parameter_values:
            model = replace(config.model, dependence=param, censor_rate=rates[param])
            for n in config.n_values:
                rejections = 0
                runtimes = []
                spawn_keys = []
                for t in range(config.trials):
                    trial_rng = stream(config.master_seed, 1, cell_index, t)
                    data_seed = _child_seed(trial_rng)
                    method_seed = _child_seed(trial_rng)
                    selection_seed = _child_seed(trial_rng)
                    spawn_keys.append((cell_index, t))
                    try:
                        dataset = gen_dataset(model, n, data_seed)
                        start = time.perf_counter()
                        reject = _run_method(dataset, method, config, method_seed, selection_seed)
                        runtimes.append(time.perf_counter() - start)
                    except FeasibilityError as exc:
                        raise FeasibilityError(
                            f"cell {cell_index} (method={method}, param={param}, n={n}) "
                            f"trial {t}: {exc}"
                        ) from exc
                    rejections += int(reject)
                cells.append(
                    CellResult(
                        method=method,
                        parameter=param,
                        n=n,
                        trials=config.trials,
                        rejections=rejections,
                        rejection_rate=rejections / config.trials,
                        mean_runtime_s=float(np.mean(runtimes)),
                        cell_index=cell_index,
                        trial_spawn_keys=tuple(spawn_keys),
                    )
                )
                cell_index += 1
    return RejectionReport(
        cells=tuple(cells), config_echo=_config_echo(config), master_seed=config.master_seed
    )


def run_realdata(
    dataset: TruncatedDataset,
    methods,
    draws: int = 500,
    alpha: float = 0.05,
    seed: int = 0,
    selection: SelectionConfig | None = None,
) -> list[dict]:
    """One p-value per method, for the combined data and per group label.

    Kernel methods select their scales on a 20/80 split by default (matching
    the benchmark protocol) and fall back to the median heuristic when the
    split is degenerate.  Groups with fewer than 10 subjects are analyzed
    anyway, with a warning.
    """
    methods = tuple(methods)
    if not methods:
        raise ConfigError("methods must be nonempty")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ConfigError(f"unknown methods {unknown}; choose from {METHODS}")
    groups: dict[str, TruncatedDataset] = {"combined": dataset}
    groups.update(dataset.by_group())
    sel_base = selection if selection is not None else SelectionConfig()
    rows = []
    for gi, (label, subset) in enumerate(groups.items()):
        if subset.n < 10:
            warnings.warn(f"group {label!r} has only {subset.n} subjects", stacklevel=2)
        for mi, method in enumerate(methods):
            rng = stream(seed, gi, mi)
            method_seed = _child_seed(rng)
            selection_seed = _child_seed(rng)
            if method in _KERNEL_METHODS:
                family = _KERNEL_METHODS[method]
                sel = select_or_median(subset, replace(sel_base, seed=selection_seed, family=family))
                outcome = run_test(sel.test_subset, *sel.chosen, draws=draws, alpha=alpha, seed=method_seed)
                stat, p, rej = outcome.statistic, outcome.p_value, outcome.reject
            elif method == "WLR":
                out = baselines.wlr_test(subset, "R_weight", draws=draws, alpha=alpha, seed=method_seed)
                stat, p, rej = out.statistic, out.p_value, out.reject
            elif method == "WLR_SC":
                out = baselines.wlr_test(subset, "SC_weight", draws=draws, alpha=alpha, seed=method_seed)
                stat, p, rej = out.statistic, out.p_value, out.reject
            elif method == "MB":
                out = baselines.mb_test(subset, seed=method_seed, alpha=alpha)
                stat, p, rej = out.statistic, out.p_value, out.reject
            else:
                out = baselines.minp_test(
                    subset, variant=method, permutations=draws, seed=method_seed, alpha=alpha
                )
                stat, p, rej = out.statistic, out.p_value, out.reject
            rows.append(
                {
                    "group": label,
                    "method": method,
                    "n": subset.n,
                    "statistic": float(stat),
                    "p_value": float(p),
                    "reject": bool(rej),
                }
            )
    return rows


def emit_report(report: RejectionReport, format: str = "json") -> str:
    """Serialize a report; canonical JSON re-emits byte-identically after parsing."""
    if format == "json":
        return json.dumps(report.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
    if format == "csv":
        lines = [CSV_HEADER]
        for c in report.cells:
            lines.append(
                f"{c.method},{c.parameter:.6f},{c.n},{c.trials},"
                f"{c.rejection_rate:.6f},{c.mean_runtime_s:.6f}"
            )
        return "\n".join(lines) + "\n"
    raise ConfigError(f"unknown report format {format!r}; use 'json' or 'csv'")


def config_from_dict(obj: dict) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from parsed JSON."""
    try:
        model_obj = dict(obj["model"])
        model = GeneratorModel(
            kind=model_obj["kind"],
            dependence=float(model_obj.get("dependence", 0.0)),
            censor_target=float(model_obj.get("censor_target", 0.0)),
            exp_convention=model_obj.get("exp_convention", "rate"),
        )
        sel_obj = obj.get("selection")
        selection = None
        if sel_obj is not None:
            selection = SelectionConfig(
                split_fraction=float(sel_obj.get("split_fraction", 0.2)),
                lam=float(sel_obj.get("lam", 0.01)),
                family=sel_obj.get("family", GAUSSIAN),
                exponents=tuple(sel_obj.get("exponents", range(-3, 4))),
            )
        return ExperimentConfig(
            model=model,
            n_values=tuple(obj["n_values"]),
            parameter_values=tuple(obj["parameter_values"]),
            methods=tuple(obj["methods"]),
            trials=int(obj.get("trials", 200)),
            alpha=float(obj.get("alpha", 0.05)),
            bootstrap_draws=int(obj.get("bootstrap_draws", 500)),
            selection=selection,
            master_seed=int(obj.get("master_seed", 0)),
            minp_min_events=int(obj.get("minp_min_events", 5)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad benchmark config: {exc}") from exc
