"""Command-line interface for survey simulation, estimation, and comparison.

Exit codes are a stable contract for scripting:

* 0  success
* 2  invalid flags or malformed/unreadable input
* 3  numerical failure: the estimate did not converge, or the data is not
     identifiable without regularization (outputs, when defined, are still
     written)

Every stochastic command takes a mandatory ``--seed``; given identical flags,
all data outputs are byte-identical across runs (the experiment report's
runtime column is the one measured, hence non-deterministic, value).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import formats
from .core import (
    MonteCarloSettings,
    Recourse,
    compare_recourses,
    costs_from_strengths,
)
from .inference import EstimatorConfig, NotIdentifiableError, expand_recourse_comparisons, map_estimate
from .simulation import (
    PairwiseSimConfig,
    RecourseSimConfig,
    derive_seed,
    draw_true_strengths,
    run_pairwise_experiment,
    run_recourse_experiment,
    simulate_pairwise_survey,
    simulate_recourse_survey,
)

__all__ = ["main", "entrypoint", "build_parser"]

# Per-feature comparison budgets used by both experiment presets.
PRESET_PER_FEATURE_SCHEDULE = (50, 100, 200, 500)
FIGURE2_SIZES = (5, 10, 15, 20)
FIGURE4_RECOURSE_SIZES = (1, 2, 3, 4, 5, 6)
FIGURE4_NUM_FEATURES = 20


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recourse-costs",
        description=(
            "Infer per-feature ease-of-modification costs from comparison "
            "surveys, simulate such surveys, and compare whole recourses."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim_pw = sub.add_parser(
        "simulate-pairwise",
        help="generate a pairwise survey from random ground-truth strengths",
    )
    sim_pw.add_argument("--num-features", type=int, required=True)
    sim_pw.add_argument("--comparisons", type=int, required=True)
    sim_pw.add_argument("--seed", type=int, required=True)
    sim_pw.add_argument("--beta-out", type=Path, required=True,
                        help="where to write the generating strengths")
    sim_pw.add_argument("--out", type=Path, required=True, help="where to write the survey")
    sim_pw.add_argument("--format", choices=("csv", "json"), default="csv")
    sim_pw.set_defaults(func=cmd_simulate_pairwise)

    sim_rc = sub.add_parser(
        "simulate-recourse",
        help="generate a recourse-vs-recourse survey from random ground-truth strengths",
    )
    sim_rc.add_argument("--num-features", type=int, required=True)
    sim_rc.add_argument("--recourse-size", type=int, required=True)
    sim_rc.add_argument("--comparisons", type=int, required=True)
    sim_rc.add_argument("--seed", type=int, required=True)
    sim_rc.add_argument("--label-mode", choices=("bernoulli", "deterministic"),
                        default="bernoulli")
    sim_rc.add_argument("--beta-out", type=Path, required=True)
    sim_rc.add_argument("--out", type=Path, required=True)
    sim_rc.add_argument("--format", choices=("csv", "json"), default="csv")
    sim_rc.set_defaults(func=cmd_simulate_recourse)

    est = sub.add_parser(
        "estimate",
        help="fit zero-mean strengths (and optionally costs) to a survey file",
    )
    est.add_argument("--input", type=Path, required=True)
    est.add_argument("--input-kind", choices=("pairwise", "recourse"), required=True)
    est.add_argument("--pseudo-count", type=float, default=0.1)
    est.add_argument("--tol", type=float, default=1e-8)
    est.add_argument("--max-iter", type=int, default=10_000)
    est.add_argument("--out", type=Path, required=True, help="strengths output")
    est.add_argument("--costs-out", type=Path, default=None, help="optional costs output")
    est.add_argument("--format", choices=("csv", "json"), default="csv",
                     help="format of both the input and the outputs")
    est.set_defaults(func=cmd_estimate)

    cmp_p = sub.add_parser(
        "compare",
        help="decide which of two recourses is easier under a costs file",
    )
    cmp_p.add_argument("--costs", type=Path, required=True)
    cmp_p.add_argument("--costs-format", choices=("csv", "json"), default="csv")
    cmp_p.add_argument("--recourse-a", required=True, help="';'-separated feature ids")
    cmp_p.add_argument("--recourse-b", required=True, help="';'-separated feature ids")
    cmp_p.add_argument("--mc-samples", type=int, default=None,
                       help="estimate by Monte Carlo with this many samples")
    cmp_p.add_argument("--seed", type=int, default=None, help="required with --mc-samples")
    cmp_p.add_argument("--format", choices=("text", "json"), default="text")
    cmp_p.set_defaults(func=cmd_compare)

    exp = sub.add_parser(
        "experiment",
        help="run the parameter-recovery experiment grid and write its report",
    )
    exp.add_argument("--kind", choices=("pairwise", "recourse"), default=None)
    exp.add_argument("--preset", choices=("figure2", "figure4"), default=None,
                     help="canned grid matching the bundled figures "
                          "(figure2: pairwise over catalog sizes 5-20; "
                          "figure4: recourse sizes 1-6 on 20 features)")
    exp.add_argument("--num-features", type=_int_list, default=None,
                     help="comma-separated catalog sizes (pairwise kind)")
    exp.add_argument("--recourse-size", type=_int_list, default=None,
                     help="comma-separated recourse sizes (recourse kind)")
    exp.add_argument("--schedule", type=_int_list, default=None,
                     help="comma-separated total-comparison budgets")
    exp.add_argument("--trials", type=int, default=10)
    exp.add_argument("--seed", type=int, required=True)
    exp.add_argument("--label-mode", choices=("bernoulli", "deterministic"),
                     default="bernoulli")
    exp.add_argument("--out", type=Path, required=True)
    exp.add_argument("--format", choices=("csv", "json"), default="csv")
    exp.set_defaults(func=cmd_experiment)

    return parser


def cmd_simulate_pairwise(args: argparse.Namespace) -> int:
    truth = draw_true_strengths(args.num_features, derive_seed(args.seed, 0))
    if args.comparisons < 1:
        raise ValueError(f"--comparisons must be >= 1, got {args.comparisons}")
    survey = simulate_pairwise_survey(truth, args.comparisons, derive_seed(args.seed, 1))
    formats.write_strengths(args.beta_out, truth, args.format)
    formats.write_pairwise(args.out, survey.records, args.format)
    return 0


def cmd_simulate_recourse(args: argparse.Namespace) -> int:
    truth = draw_true_strengths(args.num_features, derive_seed(args.seed, 0))
    records = simulate_recourse_survey(
        truth, args.recourse_size, args.comparisons, derive_seed(args.seed, 1), args.label_mode
    )
    formats.write_strengths(args.beta_out, truth, args.format)
    formats.write_recourse(args.out, records, truth.catalog, args.format)
    return 0


def cmd_estimate(args: argparse.Namespace) -> int:
    config = EstimatorConfig(
        pseudo_count=args.pseudo_count, tolerance=args.tol, max_iterations=args.max_iter
    )
    if args.input_kind == "pairwise":
        records = formats.read_pairwise_records(args.input, args.format)
    else:
        records = formats.read_recourse_records(args.input, args.format)

    if not records:
        # A prior-only fit is symmetric, so with regularization an empty
        # survey legitimately yields the empty (vacuously all-zero) output.
        if config.pseudo_count <= 0.0:
            raise ValueError("input has no records and --pseudo-count is 0: nothing to fit")
        formats.write_value_rows(args.out, [], args.format)
        if args.costs_out is not None:
            formats.write_value_rows(args.costs_out, [], args.format)
        print("no survey records; wrote empty strengths", file=sys.stderr)
        return 0

    if args.input_kind == "pairwise":
        dataset = formats.read_pairwise(args.input, args.format)
    else:
        recourse_records, catalog = formats.read_recourse(args.input, args.format)
        dataset = expand_recourse_comparisons(recourse_records, catalog)

    result = map_estimate(dataset, config)
    formats.write_strengths(args.out, result.strengths, args.format)
    if args.costs_out is not None:
        formats.write_costs(args.costs_out, costs_from_strengths(result.strengths), args.format)
    print(
        f"fit: records={len(records)} features={dataset.catalog.size} "
        f"iterations={result.iterations} converged={str(result.converged).lower()} "
        f"final_delta={result.final_delta:.3e} log_posterior={result.log_posterior:.6f}",
        file=sys.stderr,
    )
    if not result.converged:
        print("warning: did not converge; outputs hold the best iterate", file=sys.stderr)
        return 3
    return 0


def _parse_recourse_flag(name: str, text: str) -> Recourse:
    parts = text.split(";")
    if any(not p for p in parts):
        raise ValueError(f"{name}: empty feature id in {text!r}")
    return Recourse(parts)


def cmd_compare(args: argparse.Namespace) -> int:
    costs = formats.read_costs(args.costs, args.costs_format)
    first = _parse_recourse_flag("--recourse-a", args.recourse_a)
    second = _parse_recourse_flag("--recourse-b", args.recourse_b)
    mc = None
    if args.mc_samples is not None:
        if args.seed is None:
            raise ValueError("--mc-samples requires --seed")
        mc = MonteCarloSettings(samples=args.mc_samples, seed=args.seed)
    outcome = compare_recourses(first, second, costs, mc)
    easier = {"r1": "A", "r2": "B", "tie": "tie"}[outcome.easier]
    if args.format == "json":
        import json

        print(json.dumps({"rho_ab": outcome.rho_12, "rho_ba": outcome.rho_21, "easier": easier}))
    else:
        print(f"rho_ab={outcome.rho_12!r} rho_ba={outcome.rho_21!r} easier={easier}")
    return 0


def _experiment_plan(args: argparse.Namespace) -> list[tuple[str, int, int, tuple[int, ...]]]:
    """Resolve preset/flags into (kind, num_features, recourse_size, totals) entries."""
    if args.preset is not None:
        clashing = [
            flag
            for flag, value in (
                ("--kind", args.kind),
                ("--num-features", args.num_features),
                ("--recourse-size", args.recourse_size),
                ("--schedule", args.schedule),
            )
            if value is not None
        ]
        if clashing:
            raise ValueError(f"--preset fixes {', '.join(clashing)}; drop those flags")
        if args.preset == "figure2":
            return [
                ("pairwise", n, 1, tuple(c * n for c in PRESET_PER_FEATURE_SCHEDULE))
                for n in FIGURE2_SIZES
            ]
        return [
            (
                "recourse",
                FIGURE4_NUM_FEATURES,
                size,
                tuple(c * FIGURE4_NUM_FEATURES for c in PRESET_PER_FEATURE_SCHEDULE),
            )
            for size in FIGURE4_RECOURSE_SIZES
        ]

    if args.kind is None:
        raise ValueError("either --preset or --kind is required")
    if args.schedule is None:
        raise ValueError("--schedule is required without a preset")
    if args.kind == "pairwise":
        if args.num_features is None:
            raise ValueError("--num-features is required for --kind pairwise")
        return [("pairwise", n, 1, args.schedule) for n in args.num_features]
    sizes = args.recourse_size
    if sizes is None:
        raise ValueError("--recourse-size is required for --kind recourse")
    num_features = args.num_features if args.num_features is not None else (FIGURE4_NUM_FEATURES,)
    if len(num_features) != 1:
        raise ValueError("--kind recourse takes exactly one --num-features value")
    return [("recourse", num_features[0], size, args.schedule) for size in sizes]


def cmd_experiment(args: argparse.Namespace) -> int:
    plan = _experiment_plan(args)
    rows = []
    for kind, num_features, recourse_size, schedule in plan:
        if kind == "pairwise":
            report = run_pairwise_experiment(
                PairwiseSimConfig(
                    num_features=num_features,
                    comparisons_schedule=schedule,
                    trials=args.trials,
                    seed=args.seed,
                )
            )
        else:
            report = run_recourse_experiment(
                RecourseSimConfig(
                    recourse_size=recourse_size,
                    comparisons_schedule=schedule,
                    trials=args.trials,
                    seed=args.seed,
                    num_features=num_features,
                    label_mode=args.label_mode,
                )
            )
        rows.extend(report.rows)
        print(
            f"ran {kind} grid entry: features={num_features} size={recourse_size} "
            f"budgets={list(schedule)} trials={args.trials}",
            file=sys.stderr,
        )
    formats.write_experiment(args.out, rows, args.format)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NotIdentifiableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
