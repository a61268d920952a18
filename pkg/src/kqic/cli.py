"""Command-line interface.

Subcommands: ``test`` runs one quasi-independence test on a CSV file,
``simulate`` emits a synthetic dataset in the same CSV schema, and
``benchmark`` runs a rejection-rate experiment from a JSON config.  Exit
codes: 0 success, 1 data error, 2 config error, 3 feasibility error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import baselines
from .bootstrap import run_test
from .data import load_csv, to_csv
from .errors import ConfigError, DataError, FeasibilityError
from .harness import config_from_dict, emit_report, run_benchmark
from .kernels import CONSTANT, GAUSSIAN, IMQ, KernelSpec, median_heuristic
from .simgen import GeneratorModel, KINDS, gen_dataset, tune_censoring_rate

_KERNEL_FLAGS = {"gauss": GAUSSIAN, "imq": IMQ, "const": CONSTANT}


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _kernel_pair(dataset, kernel: str, bandwidth: str):
    family = _KERNEL_FLAGS[kernel]
    if family == CONSTANT:
        return KernelSpec.constant(), KernelSpec.constant()
    if bandwidth == "auto":
        sx = median_heuristic(dataset.entry)
        st = median_heuristic(dataset.observed)
    else:
        try:
            sx = st = float(bandwidth)
        except ValueError:
            raise ConfigError(f"--bandwidth must be 'auto' or a number, got {bandwidth!r}") from None
        if sx <= 0:
            raise ConfigError("--bandwidth must be positive")
    make = KernelSpec.gaussian if family == GAUSSIAN else KernelSpec.imq
    return make(sx), make(st)


def _cmd_test(args) -> int:
    dataset = load_csv(args.input)
    if args.method == "KQIC":
        kx, ky = _kernel_pair(dataset, args.kernel, args.bandwidth)
        out = run_test(dataset, kx, ky, draws=args.bootstrap, alpha=args.alpha, seed=args.seed)
        record = {
            "method": "KQIC",
            "kernel": args.kernel,
            "scales": [kx.scale, ky.scale],
            "n": dataset.n,
            "statistic": out.statistic,
            "threshold": out.threshold,
            "p_value": out.p_value,
            "reject": out.reject,
            "alpha": out.alpha,
            "bootstrap_draws": out.draws,
            "seed": out.seed,
        }
    else:
        if args.method == "WLR":
            out = baselines.wlr_test(dataset, "R_weight", draws=args.bootstrap, alpha=args.alpha, seed=args.seed)
        elif args.method == "WLR_SC":
            out = baselines.wlr_test(dataset, "SC_weight", draws=args.bootstrap, alpha=args.alpha, seed=args.seed)
        elif args.method == "MB":
            out = baselines.mb_test(dataset, seed=args.seed, alpha=args.alpha)
        else:
            out = baselines.minp_test(
                dataset, variant=args.method, min_events=args.min_events,
                permutations=args.bootstrap, seed=args.seed, alpha=args.alpha,
            )
        record = {
            "method": out.method,
            "n": dataset.n,
            "statistic": out.statistic,
            "p_value": out.p_value,
            "reject": out.reject,
            "alpha": out.alpha,
            "calibration": out.calibration,
            "seed": out.seed,
        }
        if out.note:
            record["note"] = out.note
    if args.output == "json":
        _write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n", args.out)
    else:
        keys = list(record)
        _write(",".join(keys) + "\n" + ",".join(str(record[k]) for k in keys) + "\n", args.out)
    return 0


def _cmd_simulate(args) -> int:
    model = GeneratorModel(
        kind=args.model,
        dependence=args.param,
        censor_target=args.censoring,
        exp_convention=args.exp_convention,
    )
    if model.censor_target > 0.0 and model.kind != "depcens":
        rate = tune_censoring_rate(model, model.censor_target, seed=args.seed)
        model = replace(model, censor_rate=rate)
    dataset = gen_dataset(model, args.n, args.seed)
    _write(to_csv(dataset), args.out)
    return 0


def _cmd_benchmark(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {args.config!r} is not valid JSON: {exc}") from exc
    report = run_benchmark(config_from_dict(obj))
    _write(emit_report(report, args.output), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kqic", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run one quasi-independence test on a CSV file")
    p_test.add_argument("--input", required=True, help="CSV file (entry,time,event[,group])")
    p_test.add_argument(
        "--method", default="KQIC",
        choices=["KQIC", "WLR", "WLR_SC", "MB", "MinP1", "MinP2"],
    )
    p_test.add_argument("--kernel", default="gauss", choices=sorted(_KERNEL_FLAGS))
    p_test.add_argument(
        "--bandwidth", default="auto",
        help="'auto' (median heuristic per coordinate) or a positive number for both",
    )
    p_test.add_argument("--bootstrap", type=int, default=500, help="bootstrap/permutation draws")
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--seed", type=int, default=0)
    p_test.add_argument("--min-events", type=int, default=5, help="MinP admissibility floor")
    p_test.add_argument("--output", default="json", choices=["json", "csv"])
    p_test.add_argument("--out", default=None, help="output file (default stdout)")
    p_test.set_defaults(func=_cmd_test)

    p_sim = sub.add_parser("simulate", help="emit a synthetic dataset as CSV")
    p_sim.add_argument("--model", required=True, choices=list(KINDS))
    p_sim.add_argument("--param", type=float, default=0.0, help="dependence parameter")
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--censoring", type=float, default=0.0, help="target censoring fraction")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--exp-convention", default="rate", choices=["rate", "scale"])
    p_sim.add_argument("--out", default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_bench = sub.add_parser("benchmark", help="run a rejection-rate experiment")
    p_bench.add_argument("--config", required=True, help="JSON config file")
    p_bench.add_argument("--output", default="json", choices=["json", "csv"])
    p_bench.add_argument("--out", default=None)
    p_bench.set_defaults(func=_cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FeasibilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
