import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from app.decorators import track_run
from app.estimators import PriorVariant
from app.extinction import FittedFamily, extinction_probability
from app.logger import get_logger
from app.models import (
    DirichletPriorKind,
    EstimatorConfig,
    EstimatorKind,
    ExtinctionResponse,
)
from app.offspring import parse_offspring_spec
from app.process import (
    GenerationSeries,
    collapse,
    read_observations,
    simulate_complete,
    write_counts_csv,
    write_series_csv,
)
from app.rng import SeedSpec
from app.scenarios import ScenarioCatalog, write_catalog
from app.services.bench import run_scenario
from app.services.covid import (
    DEFAULT_DAYS,
    early_detection_report,
    fetch_case_csv,
    load_case_series,
)
from app.services.estimation import Observation, estimate_response
from app.services.reporting import OutputFormat, emit, render
from app.types import GaltonWatsonError

logger = get_logger("cli")


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected comma-separated integers, got {text!r}")


def _k_value(text: str):
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be an integer or 'auto', got {text!r}")


@track_run
def simulate_command(args: argparse.Namespace) -> None:
    dist = parse_offspring_spec(args.offspring)
    counts = simulate_complete(
        dist, args.z0, args.generations, SeedSpec(args.seed, stream=args.stream)
    )
    target = args.out or sys.stdout
    if args.incomplete:
        write_series_csv(collapse(counts), target)
    else:
        write_counts_csv(counts, target)


@track_run
def extinction_command(args: argparse.Namespace) -> None:
    dist = parse_offspring_spec(args.offspring)
    result = extinction_probability(dist, tol=args.tol, force_bisection=args.force_bisection)
    response = ExtinctionResponse(
        offspring=dist.spec(),
        q=result.q,
        residual=result.residual,
        iterations=result.iterations,
        method=result.method,
    )
    emit(render(response, args.format), args.out)


def estimator_from_args(args: argparse.Namespace) -> EstimatorConfig:
    return EstimatorConfig(
        kind=args.method,
        k=args.k,
        prior=args.prior,
        variant=args.variant,
        a=args.a,
        base=args.base,
        support_size=args.support_size,
        cumulative=args.heyde_cumulative,
        k_trunc=args.k_trunc,
        iterations=args.iters,
        burn_in=args.burnin,
        max_tries=args.max_tries,
    )


@track_run
def estimate_command(args: argparse.Namespace) -> None:
    data = read_observations(args.input)
    if isinstance(data, GenerationSeries):
        obs = Observation(data)
    else:
        obs = Observation.from_counts(data)
    response = estimate_response(estimator_from_args(args), obs, SeedSpec(args.seed))
    emit(render(response, args.format), args.out)


@track_run
def bench_command(args: argparse.Namespace) -> None:
    catalog = ScenarioCatalog(args.catalog)
    if args.dump_catalog:
        write_catalog(Path(args.dump_catalog), catalog)
        return
    if args.list:
        for scenario in catalog.scenarios():
            print(f"{scenario.name:<28} {scenario.offspring:<32} {scenario.description}")
        return
    results = [
        run_scenario(
            scenario,
            seed=args.seed,
            replications=args.reps,
            workers=args.workers,
            progress=args.progress,
        )
        for scenario in catalog.select(args.scenario)
    ]
    emit(render(results, args.format), args.out)


@track_run
def covid_command(args: argparse.Namespace) -> None:
    if args.url:
        fetch_case_csv(args.input, url=args.url)
    cases = load_case_series(
        args.input,
        wave_starts=args.wave_start or (),
        wave_days=args.wave_days,
        wave_ends=args.wave_end,
        date_format=args.date_format,
        date_column=args.date_column,
        count_column=args.count_column,
    )
    estimators = None
    if args.methods:
        estimators = [
            EstimatorConfig(
                kind=m,
                k_trunc=args.k_trunc,
                iterations=args.iters,
                burn_in=args.burnin,
                cumulative=args.heyde_cumulative,
            )
            for m in args.methods
        ]
    reports = [
        early_detection_report(
            cases,
            days=args.days,
            estimators=estimators,
            offspring_family=args.offspring_family,
            wave=w,
            seed=args.seed,
        )
        for w in range(len(cases.waves))
    ]
    emit(render(reports, args.format), args.out)


def _add_output(parser: argparse.ArgumentParser, default: OutputFormat) -> None:
    parser.add_argument(
        "--format", choices=[f.value for f in OutputFormat], default=default.value
    )
    parser.add_argument("--out", help="Output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gw", description="Inference for Galton-Watson branching processes"
    )
    subparsers = parser.add_subparsers(dest="command", help="Command to execute")

    # simulate
    sim = subparsers.add_parser("simulate", help="Simulate one realization to CSV")
    sim.add_argument("--offspring", required=True, help="e.g. poisson:1.2 or finite:0.4,0.3,0.2,0.1")
    sim.add_argument("--z0", type=int, default=1)
    sim.add_argument("--generations", type=int, default=10)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--stream", type=int, default=0)
    mode = sim.add_mutually_exclusive_group()
    mode.add_argument("--complete", action="store_true", help="Write Z_ij counts (default)")
    mode.add_argument("--incomplete", action="store_true", help="Write generation totals only")
    sim.add_argument("--out", help="Output CSV (default: stdout)")
    sim.set_defaults(handler=simulate_command)

    # extinction
    ext = subparsers.add_parser("extinction", help="Extinction probability of an offspring law")
    ext.add_argument("--offspring", required=True)
    ext.add_argument("--tol", type=float)
    ext.add_argument("--force-bisection", action="store_true")
    _add_output(ext, OutputFormat.TEXT)
    ext.set_defaults(handler=extinction_command)

    # estimate
    est = subparsers.add_parser("estimate", help="Estimate m from an observation CSV")
    est.add_argument("--input", required=True)
    est.add_argument("--method", choices=[k.value for k in EstimatorKind], default="mle")
    est.add_argument("--k", type=_k_value, help="Support size for dirichlet, or 'auto'")
    est.add_argument("--prior", choices=[p.value for p in DirichletPriorKind], default="agnostic")
    est.add_argument("--variant", choices=[v.value for v in PriorVariant], default="A")
    est.add_argument("--a", type=float, default=1.0, help="DP concentration")
    est.add_argument("--base", default="poisson:agnostic", help="DP base measure")
    est.add_argument("--support-size", action="store_true")
    est.add_argument("--heyde-cumulative", action="store_true")
    est.add_argument("--k-trunc", type=int)
    est.add_argument("--iters", type=int)
    est.add_argument("--burnin", type=int)
    est.add_argument("--max-tries", type=int)
    est.add_argument("--seed", type=int, default=0)
    _add_output(est, OutputFormat.TEXT)
    est.set_defaults(handler=estimate_command)

    # bench
    bench = subparsers.add_parser("bench", help="Monte Carlo comparison of estimators")
    bench.add_argument("--scenario", default="all", help="Scenario, group or 'all'")
    bench.add_argument("--reps", type=int, help="Replications (default: per scenario)")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--progress", action="store_true")
    bench.add_argument("--catalog", help="Scenario YAML file")
    bench.add_argument("--list", action="store_true", help="List scenarios and exit")
    bench.add_argument("--dump-catalog", help="Write the catalog as YAML and exit")
    _add_output(bench, OutputFormat.JSON)
    bench.set_defaults(handler=bench_command)

    # covid
    covid = subparsers.add_parser("covid", help="Early-detection report from daily case counts")
    covid.add_argument("--input", required=True, help="CSV with date and count columns")
    covid.add_argument("--url", help="Download the CSV to --input first")
    covid.add_argument("--wave-start", action="append", help="ISO date; repeat for several waves")
    covid.add_argument("--wave-days", type=int)
    covid.add_argument("--wave-end", action="append", help="ISO date, one per wave start")
    covid.add_argument("--days", type=_int_list, default=list(DEFAULT_DAYS))
    covid.add_argument(
        "--offspring-family", choices=[f.value for f in FittedFamily], default="geometric"
    )
    covid.add_argument(
        "--methods", type=lambda s: s.split(","), help="e.g. mle,heyde,gibbs-dir,gibbs-dp"
    )
    covid.add_argument("--k-trunc", type=int)
    covid.add_argument("--iters", type=int)
    covid.add_argument("--burnin", type=int)
    covid.add_argument("--heyde-cumulative", action="store_true")
    covid.add_argument("--date-format")
    covid.add_argument("--date-column", default="date")
    covid.add_argument("--count-column", default="count")
    covid.add_argument("--seed", type=int, default=0)
    _add_output(covid, OutputFormat.TEXT)
    covid.set_defaults(handler=covid_command)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 1

    try:
        args.handler(args)
    except GaltonWatsonError as e:
        print(f"Error ({e.code}): {e.message}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
