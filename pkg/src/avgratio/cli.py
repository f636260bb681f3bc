"""Command-line front end.

    avgratio allocate --costs 1,2
    avgratio simulate --family pareto --shape 1 --tmin 1 --n 16 --trials 100000 --seed 42
    avgratio bounds --ns 2,4,8,16 --family exponential
    avgratio sweep --kind epsilon --n 5 --epsilons 1e-2,1e-4,1e-6
    avgratio sweep --kind n --ns 4,16,64 --trials 10000
    avgratio truthfulness --costs 1,2 --machine 0

Exit status: 0 on success, 2 on usage errors, 1 on internal numeric errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import bounds
from . import distributions as dist
from . import mechanism as mech
from . import simulation as sim
from .errors import InvalidInputError, NumericalError
from .results import ExperimentResult


def _float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return value


def _positive_float(text: str) -> float:
    value = _float(text)
    if value <= 0.0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if value < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}: {text!r}")
        return value

    return parse


def _list_of(item):
    def parse(text: str) -> list:
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            raise argparse.ArgumentTypeError("empty list")
        return [item(p) for p in parts]

    return parse


_seed = _int_at_least(0)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--seed", type=_seed, default=0)
    parser.add_argument("--workers", type=_int_at_least(1), default=1)
    parser.add_argument("--convention", choices=[c.value for c in dist.Convention],
                        default=dist.Convention.PAPER_LITERAL.value)
    parser.add_argument("--config", type=Path, help="flat key=value file; flags override it")


def _distribution_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=[f.value for f in dist.Family], default="pareto")
    parser.add_argument("--shape", type=_positive_float, default=1.0)
    parser.add_argument("--tmin", type=_positive_float, default=1.0)
    parser.add_argument("--quantile", type=_float, default=dist.THRESHOLD_QUANTILE,
                        help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avgratio", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("allocate", help="allocation probabilities for one cost vector")
    p.add_argument("--costs", type=_list_of(_positive_float))
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo average-case ratio")
    _distribution_flags(p)
    p.add_argument("--n", type=_int_at_least(2), default=16)
    p.add_argument("--trials", type=_int_at_least(1))
    p.add_argument("--budget", type=_int_at_least(1), default=sim.DEFAULT_BUDGET)
    _common(p)

    p = sub.add_parser("bounds", help="table of the closed-form bounds per n")
    _distribution_flags(p)
    p.add_argument("--ns", type=_list_of(_int_at_least(2)), default=[2, 4, 8, 16, 32, 64])
    _common(p)

    p = sub.add_parser("sweep", help="average ratio over n, or worst case over epsilon")
    _distribution_flags(p)
    p.add_argument("--kind", choices=("n", "epsilon"), default="n")
    p.add_argument("--ns", type=_list_of(_int_at_least(2)), default=[4, 16, 64, 256])
    p.add_argument("--trials", type=_int_at_least(1))
    p.add_argument("--n", type=_int_at_least(2), default=2)
    p.add_argument("--epsilons", type=_list_of(_positive_float), default=[1e-2, 1e-4, 1e-6])
    _common(p)

    p = sub.add_parser("truthfulness", help="grid search for a profitable misreport")
    p.add_argument("--costs", type=_list_of(_positive_float))
    p.add_argument("--machine", type=_int_at_least(0), default=0)
    p.add_argument("--grid-min", type=_positive_float, default=0.01)
    p.add_argument("--grid-max", type=_positive_float, default=100.0)
    p.add_argument("--grid-points", type=_int_at_least(2), default=100)
    _common(p)
    return parser


def read_config(path: Path) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidInputError(f"{path}:{lineno}: expected key=value")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if known.config is None or known.command is None:
        return
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sub = subparsers.choices.get(known.command)
    if sub is None:
        return
    try:
        values = read_config(known.config)
    except OSError as exc:
        parser.error(f"cannot read config: {exc}")
    except InvalidInputError as exc:
        parser.error(str(exc))
    dests = {a.dest for a in sub._actions}
    unknown = sorted(set(values) - dests)
    if unknown:
        sub.error(f"unknown config keys: {', '.join(unknown)}")
    # string defaults are run through each option's type converter by argparse
    sub.set_defaults(**values)


def _spec(args) -> dist.DistributionSpec:
    return dist.DistributionSpec(args.family, args.tmin, args.shape, args.convention)


def _threshold(args, spec) -> dist.ThresholdChoice:
    if not 0.0 < args.quantile < 1.0:
        raise InvalidInputError("quantile must lie in (0, 1)")
    return dist.solve_threshold(spec, args.quantile)


def _require(args, parser, *names):
    for name in names:
        if getattr(args, name) is None:
            parser.error(f"--{name.replace('_', '-')} is required")


def cmd_allocate(args) -> ExperimentResult:
    probs = mech.allocate(args.costs)
    outcome = mech.social_cost(args.costs)
    records = [
        {"index": i, "cost": c, "probability": p} for i, (c, p) in enumerate(zip(args.costs, probs))
    ]
    return ExperimentResult(
        command="allocate",
        parameters={"costs": ",".join(repr(c) for c in args.costs)},
        records=records,
        summary={
            "n": len(args.costs),
            "probability_sum": math.fsum(probs),
            "social_cost": outcome.social_cost,
            "optimal_cost": outcome.optimal_cost,
            "ratio": outcome.ratio,
            "worst_case": (len(args.costs) + 1) / 2,
        },
        tool_version=__version__,
        seed=args.seed,
    )


def estimate_record(est: sim.RatioEstimate, bound: float) -> dict:
    cfg = est.config
    return {
        "family": cfg.spec.family,
        "shape": cfg.spec.shape,
        "t_min": cfg.spec.t_min,
        "convention": cfg.spec.convention,
        "n": cfg.n,
        "trials": est.trials,
        "seed": cfg.seed,
        "workers": cfg.workers,
        "mean_ratio": est.mean_ratio,
        "std_error": est.std_error,
        "event_a_freq": est.event_a_freq,
        "lemma1_violations": est.lemma1_violations,
        "cap_violation_freq": est.cap_violation_freq,
        "max_ratio_seen": est.max_ratio_seen,
        "worst_case": (cfg.n + 1) / 2,
        "h": est.h,
        "theorem1_bound": bound,
        "bound_satisfied": est.mean_ratio + 3.0 * est.std_error < bound,
    }


def _distribution_params(args) -> dict:
    return {
        "family": args.family,
        "shape": args.shape,
        "t_min": args.tmin,
        "convention": args.convention,
        "quantile": args.quantile,
    }


def cmd_simulate(args) -> ExperimentResult:
    spec = _spec(args)
    choice = _threshold(args, spec)
    trials = sim.default_trials(args.n) if args.trials is None else args.trials
    cfg = sim.SimulationConfig(spec, args.n, trials, args.seed, args.workers, args.budget)
    est = sim.estimate_average_ratio(cfg, choice.h)
    return ExperimentResult(
        command="simulate",
        parameters={**_distribution_params(args), "n": args.n, "trials": trials, "workers": args.workers},
        records=[estimate_record(est, choice.theorem1_bound)],
        tool_version=__version__,
        seed=args.seed,
    )


def cmd_bounds(args) -> ExperimentResult:
    spec = _spec(args)
    choice = _threshold(args, spec)
    q = dist.cdf(spec, choice.h * spec.t_min)
    records = []
    for n in args.ns:
        even = n % 2 == 0 and n <= bounds.MAX_CENTRAL_N
        central = bounds.central_binomial_bound(n) if even else None
        stats = bounds.event_a_probability(n, q)
        records.append({
            "n": n,
            "binom_exact": central.exact if central else None,
            "robbins": central.robbins_bound if central else None,
            "q": q,
            "event_a_exact": stats.prob_exact,
            "lemma3_lower_bound": stats.lemma3_lower_bound,
            "lemma4_bound": bounds.lemma4_bound(n),
            "worst_case": (n + 1) / 2,
            "h": choice.h,
            "theorem1_bound": choice.theorem1_bound,
            "theorem1_n_term": bounds.theorem1_decomposition(choice.h, n),
        })
    return ExperimentResult(
        command="bounds",
        parameters={**_distribution_params(args), "ns": ",".join(map(str, args.ns))},
        records=records,
        tool_version=__version__,
        seed=args.seed,
    )


def cmd_sweep(args) -> ExperimentResult:
    if args.kind == "epsilon":
        rows = sim.worst_case_sweep(args.n, args.epsilons)
        records = [{"epsilon": e, "ratio": r, "limit": (args.n + 1) / 2} for e, r in rows]
        params = {"kind": "epsilon", "n": args.n, "epsilons": ",".join(map(repr, args.epsilons))}
    else:
        spec = _spec(args)
        choice = _threshold(args, spec)
        records = []
        for n in sorted(args.ns):
            trials = sim.default_trials(n) if args.trials is None else args.trials
            cfg = sim.SimulationConfig(spec, n, trials, args.seed, args.workers)
            records.append(estimate_record(sim.estimate_average_ratio(cfg, choice.h), choice.theorem1_bound))
        params = {
            **_distribution_params(args),
            "kind": "n",
            "ns": ",".join(map(str, args.ns)),
            "trials": "default" if args.trials is None else args.trials,
        }
    return ExperimentResult(
        command="sweep", parameters=params, records=records, tool_version=__version__, seed=args.seed
    )


def cmd_truthfulness(args) -> ExperimentResult:
    if not args.grid_min < args.grid_max:
        raise InvalidInputError("--grid-min must be below --grid-max")
    if args.machine >= len(args.costs):
        raise InvalidInputError(f"--machine {args.machine} out of range for {len(args.costs)} machines")
    grid = np.geomspace(args.grid_min, args.grid_max, args.grid_points)
    reports = [mech.deviation_cost(args.costs, args.machine, d) for d in grid]
    best = mech.best_deviation(args.costs, args.machine, grid)
    return ExperimentResult(
        command="truthfulness",
        parameters={
            "costs": ",".join(repr(c) for c in args.costs),
            "machine": args.machine,
            "grid_min": args.grid_min,
            "grid_max": args.grid_max,
            "grid_points": args.grid_points,
        },
        records=[
            {"declared": r.declared_cost, "deviated_expected_cost": r.deviated_expected_cost}
            for r in reports
        ],
        summary={
            "true_cost": best.true_cost,
            "truthful_expected_cost": best.truthful_expected_cost,
            "best_declaration": best.declared_cost,
            "best_deviated_expected_cost": best.deviated_expected_cost,
            "profitable": best.profitable,
        },
        tool_version=__version__,
        seed=args.seed,
    )


COMMANDS = {
    "allocate": (cmd_allocate, ("costs",)),
    "simulate": (cmd_simulate, ()),
    "bounds": (cmd_bounds, ()),
    "sweep": (cmd_sweep, ()),
    "truthfulness": (cmd_truthfulness, ("costs",)),
}


def run(argv: list[str] | None = None) -> tuple[ExperimentResult, str]:
    """Parse ``argv`` and execute the command; returns the result and output format."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    _apply_config(parser, argv)
    args = parser.parse_args(argv)
    fn, required = COMMANDS[args.command]
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    _require(args, subparsers.choices[args.command], *required)
    return fn(args), args.format


def main(argv: list[str] | None = None) -> int:
    try:
        result, fmt = run(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except InvalidInputError as exc:
        print(f"avgratio: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"avgratio: internal numeric error: {exc}", file=sys.stderr)
        return 1
    text = result.to_json() if fmt == "json" else result.to_csv()
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
