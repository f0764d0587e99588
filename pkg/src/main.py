"""
Command-line entry point: scenario runs, policy comparisons, CI traces and
the estimator lifecycle

    python -m src.main run --scenario config/scenarios/week1_strict.yaml --out output/w1s
    python -m src.main compare --scenario ... --policy carbon-aware --policy greedy-throughput
    python -m src.main gen-trace --profile week1 --seed 7 --out traces/week1.csv
    python -m src.main dataset --per-mode 1000 --out artifacts/dataset.joblib
    python -m src.main train --dataset artifacts/dataset.joblib --out artifacts/estimator.joblib
    python -m src.main eval-estimator --estimator artifacts/estimator.joblib
"""
import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import pandas as pd

from src.carbon.traces import TRACE_PROFILES, TraceProfile, generate_trace, trace_profile
from src.device.hardware import load_device
from src.device.modes import load_mode_file
from src.estimator.dataset import generate_dataset
from src.estimator.model import DEFAULT_CLASSES, DEFAULT_SPLIT, EstimatorMetrics, evaluate, train
from src.loaders.artifact_loader import load_dataset, load_estimator, save_dataset, save_estimator
from src.loaders.report_loader import ReportLoader
from src.loaders.trace_loader import TraceLoader
from src.runtime.scenario import Scenario, load_scenario
from src.runtime.simulator import compare_policies, run_scenario
from src.search.value import ValueWeights
from src.utils.config import config_path, get_settings
from src.utils.errors import ConfigurationError, InsufficientDataError, TraceCoverageError
from src.utils.logger import setup_logger
from src.workload.generator import load_catalog

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_BREACHES = 3
EXIT_GATE = 4

DEFAULT_SPEARMAN_BAR = 0.80
DEFAULT_COMPARED = ("greedy-throughput", "carbon-aware")


def parse_weights(text: str) -> ValueWeights:
    """'1.0,0.25' -> ValueWeights(w_latency=1.0, w_power=0.25)"""
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != 2:
        raise ConfigurationError(f"--weights expects 'latency,power', got '{text}'")
    try:
        w_latency, w_power = float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigurationError(f"--weights values must be numbers, got '{text}'")
    return ValueWeights(w_latency=w_latency, w_power=w_power)


def _scenario_path(name: str) -> Path:
    """A file path, or a preset name under the config directory (week1_strict)"""
    path = Path(name)
    if path.exists() or path.suffix:
        return path
    return config_path(f"scenarios/{name}.yaml")


def _scenario(args: argparse.Namespace) -> Scenario:
    """Scenario file with the command-line overrides applied"""
    scenario = load_scenario(_scenario_path(args.scenario))
    if args.threshold:
        scenario = scenario.with_threshold(args.threshold)
    if args.weights:
        scenario = replace(scenario, weights=parse_weights(args.weights))
    if args.budget is not None:
        if args.budget < 1:
            raise ConfigurationError(f"--budget must be >= 1, got {args.budget}")
        scenario = replace(scenario, budget=replace(scenario.budget, max_evaluations=args.budget))
    if args.quantiles is not None:
        scenario = scenario.with_quantiles(args.quantiles)
    return scenario


def _out_dir(args: argparse.Namespace, default_name: str) -> Path:
    return Path(args.out) if args.out else get_settings().output_dir / default_name


def cmd_run(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    report = run_scenario(scenario, args.policy, args.seed)
    ReportLoader().load(report, _out_dir(args, f"{scenario.name}-{report.policy}"))

    totals = report.totals
    logger.info(
        f"{report.policy}: {totals['emissions_g']:.2f} gCO2, {totals['mean_power_w']:.2f} W mean, "
        f"{totals['mean_latency_ms']:.1f} ms mean latency, CDP {totals['cdp_g_s']:.3f}"
    )
    if report.has_breaches:
        logger.warning(f"{len(report.breaches)} SLA breaches recorded")
        return EXIT_BREACHES
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    policies = args.policy or list(DEFAULT_COMPARED)
    result = compare_policies(scenario, policies, args.seed)
    ReportLoader().load_comparison(result, _out_dir(args, f"{scenario.name}-comparison"))

    summary = result["comparison"].groupby("policy", sort=False)[
        ["power_normalized", "latency_normalized", "emissions_normalized", "cdp_normalized"]
    ].mean()
    print(summary.to_string(float_format=lambda value: f"{value:.3f}"))
    if any(report.has_breaches for report in result["reports"].values()):
        return EXIT_BREACHES
    return EXIT_OK


def _custom_profile(args: argparse.Namespace) -> TraceProfile:
    if args.low is None or args.high is None:
        raise ConfigurationError("--profile custom needs --low and --high")
    if not 0 <= args.low < args.high:
        raise ConfigurationError(f"Need 0 <= low < high, got [{args.low}, {args.high}]")
    return TraceProfile("custom", args.low, args.high, amplitude=args.amplitude, noise=args.noise)


def cmd_gen_trace(args: argparse.Namespace) -> int:
    profile = _custom_profile(args) if args.profile == "custom" else trace_profile(args.profile)
    days = args.days or profile.default_days
    trace = generate_trace(profile, days, args.seed if args.seed is not None else 0)

    out = Path(args.out) if args.out else get_settings().output_dir / f"{profile.name}.csv"
    if out.suffix.lower() == ".csv":
        TraceLoader().load(trace, out.parent, out.name)
    else:
        TraceLoader().load(trace, out)
    return EXIT_OK


def cmd_dataset(args: argparse.Namespace) -> int:
    modes = load_mode_file(args.modes)
    dataset = generate_dataset(
        modes,
        args.per_mode,
        args.seed if args.seed is not None else 0,
        catalog=load_catalog(Path(args.catalog) if args.catalog else None),
        device=load_device(args.device),
        max_partitions=args.max_partitions,
    )
    out = Path(args.out) if args.out else get_settings().output_dir / "dataset.joblib"
    save_dataset(dataset, out)
    if args.csv:
        ReportLoader().write_frame(dataset.to_frame(), args.csv)
    logger.info(f"Samples per mode: {dataset.counts_per_mode()}")
    return EXIT_OK


def _metrics_path(estimator_path: Path) -> Path:
    return estimator_path.with_suffix(".metrics.json")


def cmd_train(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.dataset)
    estimator = train(
        dataset,
        n_classes=args.quantiles,
        split_fraction=args.split,
        seed=args.seed if args.seed is not None else 0,
        device=load_device(args.device),
    )
    out = Path(args.out) if args.out else get_settings().output_dir / "estimator.joblib"
    save_estimator(estimator, out)
    ReportLoader().write_json(estimator.metrics.to_dict(), _metrics_path(out))
    return EXIT_OK


def _print_metrics(metrics: EstimatorMetrics) -> None:
    table = pd.DataFrame(
        {
            "accuracy": [metrics.latency_accuracy, metrics.power_accuracy],
            "spearman": [metrics.latency_spearman, metrics.power_spearman],
        },
        index=["latency", "power"],
    )
    print(table.to_string(float_format=lambda value: f"{value:.4f}"))
    print(f"feasibility_safety {metrics.feasibility_safety:.4f}")
    print(f"samples train={metrics.n_train} test={metrics.n_test}")


def cmd_eval_estimator(args: argparse.Namespace) -> int:
    """Held-out metrics (or metrics on --dataset) checked against the Spearman and safety bars"""
    estimator = load_estimator(args.estimator)
    if args.dataset:
        metrics = evaluate(estimator, load_dataset(args.dataset))
    elif estimator.metrics is not None:
        metrics = estimator.metrics
    else:
        raise ConfigurationError(f"{args.estimator} has no stored metrics; pass --dataset")

    _print_metrics(metrics)
    failures = []
    for head, rho in (("latency", metrics.latency_spearman), ("power", metrics.power_spearman)):
        if rho < args.min_spearman:
            failures.append(f"{head} Spearman {rho:.3f} < {args.min_spearman:.2f}")
    if metrics.feasibility_safety < args.min_safety:
        failures.append(f"feasibility safety {metrics.feasibility_safety:.3f} < {args.min_safety:.2f}")
    if failures:
        logger.error("Estimator gate failed: " + "; ".join(failures))
        return EXIT_GATE
    logger.info("Estimator gate passed")
    return EXIT_OK


def _add_scenario_flags(parser: argparse.ArgumentParser, policy_help: str, repeat: bool) -> None:
    parser.add_argument("--scenario", required=True, help="Scenario YAML file")
    if repeat:
        parser.add_argument("--policy", action="append", help=policy_help)
    else:
        parser.add_argument("--policy", help=policy_help)
    parser.add_argument("--seed", type=int, help="Search seed (defaults to the scenario seed)")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--weights", help="Value weights as 'latency,power'")
    parser.add_argument("--budget", type=int, help="Evaluations per search")
    parser.add_argument(
        "--quantiles", type=int, help="Class count the scenario's estimator must predict"
    )
    threshold = parser.add_mutually_exclusive_group()
    threshold.add_argument(
        "--strict", dest="threshold", action="store_const", const="strict", help="500 ms latency threshold"
    )
    threshold.add_argument(
        "--relaxed", dest="threshold", action="store_const", const="relaxed", help="2 s latency threshold"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greenedge", description="Carbon-aware multi-DNN edge runtime simulator"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Simulate one scenario under one policy")
    _add_scenario_flags(
        run, "carbon-aware | greedy-throughput | power-min | static:<mode>", repeat=False
    )
    run.set_defaults(handler=cmd_run)

    compare = subparsers.add_parser("compare", help="Run several policies and normalize to the first")
    _add_scenario_flags(compare, "Policy to compare (repeat; first is the baseline)", repeat=True)
    compare.set_defaults(handler=cmd_compare)

    gen_trace = subparsers.add_parser("gen-trace", help="Write a synthetic CI trace CSV")
    gen_trace.add_argument("--profile", required=True, choices=sorted(TRACE_PROFILES) + ["custom"])
    gen_trace.add_argument("--days", type=int, help="Simulated days (trace spans one more)")
    gen_trace.add_argument("--seed", type=int)
    gen_trace.add_argument("--out", help="CSV file or directory")
    gen_trace.add_argument("--low", type=float, help="custom: lowest CI")
    gen_trace.add_argument("--high", type=float, help="custom: highest CI")
    gen_trace.add_argument("--amplitude", type=float, default=1.15, help="custom: diurnal swing")
    gen_trace.add_argument("--noise", type=float, default=0.10, help="custom: noise level")
    gen_trace.set_defaults(handler=cmd_gen_trace)

    dataset = subparsers.add_parser("dataset", help="Generate an oracle-labelled training dataset")
    dataset.add_argument("--per-mode", dest="per_mode", type=int, default=1000)
    dataset.add_argument("--seed", type=int)
    dataset.add_argument("--out", help="Dataset artifact path")
    dataset.add_argument("--csv", help="Also export the summary features as CSV")
    dataset.add_argument("--modes", help="operating_modes.yaml")
    dataset.add_argument("--device", help="device.yaml")
    dataset.add_argument("--catalog", help="services.yaml")
    dataset.add_argument("--max-partitions", dest="max_partitions", type=int, default=3)
    dataset.set_defaults(handler=cmd_dataset)

    train_parser = subparsers.add_parser("train", help="Train the quantile-class estimator")
    train_parser.add_argument("--dataset", required=True)
    train_parser.add_argument("--quantiles", type=int, default=DEFAULT_CLASSES, help="Classes per head")
    train_parser.add_argument("--split", type=float, default=DEFAULT_SPLIT, help="Training fraction")
    train_parser.add_argument("--seed", type=int)
    train_parser.add_argument("--device", help="device.yaml")
    train_parser.add_argument("--out", help="Estimator artifact path")
    train_parser.set_defaults(handler=cmd_train)

    eval_parser = subparsers.add_parser("eval-estimator", help="Check estimator metrics against bars")
    eval_parser.add_argument("--estimator", required=True)
    eval_parser.add_argument("--dataset", help="Evaluate on this dataset instead of the held-out split")
    eval_parser.add_argument("--min-spearman", dest="min_spearman", type=float, default=DEFAULT_SPEARMAN_BAR)
    eval_parser.add_argument("--min-safety", dest="min_safety", type=float, default=0.0)
    eval_parser.set_defaults(handler=cmd_eval_estimator)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except (ConfigurationError, TraceCoverageError, InsufficientDataError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except Exception as e:
        logger.exception(f"Unexpected error in {args.command}: {e}")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
