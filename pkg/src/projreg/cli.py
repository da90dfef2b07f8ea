"""Command-line front end.

Exit status is 0 on success, 2 for invalid input and 3 when the input is
valid but numerically degenerate. Failures print one JSON line on stderr.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .analysis import lemma_check, noise_inject, proposition_check
from .exceptions import NotInjectiveError, NumericalError, ValidationError
from .experiment import (
    ExperimentConfig,
    derive_seed,
    rows_to_csv,
    run_experiment,
    trial_inputs,
)
from .operator_learning import (
    LearnedOperator,
    collinearity_report,
    hs_deviation_bound_check,
    learn_centered,
    learn_uncentered,
)
from .problems import SyntheticProblem, example_images
from .solvers import map_estimate, method1, method3, oracle_dls, span_basis
from .training import TrainingSet, assemble, rank_bounds_check, sample_stats

log = logging.getLogger("projreg")

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _config(args):
    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    changes = {}
    env_seed = os.environ.get("PROJREG_SEED")
    if env_seed is not None:
        try:
            changes["base_seed"] = int(env_seed)
        except ValueError:
            raise ValidationError(f"PROJREG_SEED={env_seed!r} is not an integer") from None
    if getattr(args, "seed", None) is not None:
        changes["base_seed"] = args.seed
    if getattr(args, "n", None) is not None:
        changes["n"] = [args.n]
    if getattr(args, "delta", None) is not None:
        changes["delta"] = [args.delta]
    if getattr(args, "alpha", None) is not None:
        changes["alpha"] = [args.alpha]
    if getattr(args, "trunc", None) is not None:
        changes["truncation_rank"] = [args.trunc]
    if getattr(args, "tol", None) is not None:
        changes["rel_tol"] = args.tol
    return config.replace(**changes) if changes else config


def cmd_generate(args):
    out = Path(args.out)
    if args.example:
        images = example_images(args.example)
        problem = SyntheticProblem(
            K=np.eye(3), prior_mean=images.mean(axis=0), prior_factor=np.eye(3),
            x_dagger=images[0], kernel_width=float("nan"), seed=0,
        )
        ts = assemble(images, images, 0.0)
        y = problem.x_dagger
    else:
        config = _config(args)
        problem, images, y = trial_inputs(config, 0)
        n = max(config.n)
        ts = noise_inject(problem.K, images[:n], config.delta[0],
                          derive_seed(config.base_seed, 3, 0))
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.ini").write_text(config.to_text())
    problem.save(out / "problem")
    ts.save(out / "training")
    io.write_dense_map(out / "y.csv", y)
    log.info("wrote problem, training set (n=%d) and observation to %s", ts.n, out)
    return 0


def cmd_learn(args):
    ts = TrainingSet.load(args.training)
    out = Path(args.out)
    rel_tol = args.tol if args.tol is not None else 1e-12
    learn_uncentered(ts, rel_tol, args.trunc).save(out / "uncentered")
    model = sample_stats(ts, rel_tol)
    if model.p_prime > 0:
        learn_centered(model, ts).save(out / "centered")
    else:
        log.warning("p' = 0: centered operator not written")
    log.info("learned operators written to %s", out)
    return 0


def cmd_solve(args):
    learned_dir = Path(args.learned)
    y = io.read_vector(args.y)
    solver_tol = args.tol if args.tol is not None else 1e-10
    if args.method == "i":
        rec = method1(LearnedOperator.load(learned_dir / "uncentered"), y, solver_tol)
    elif args.method in ("iii", "map"):
        path = learned_dir / "centered"
        if not path.exists():
            raise NumericalError("no centered operator (p' = 0 at learning time)")
        learned = LearnedOperator.load(path)
        model = learned.centered_model()
        if args.method == "iii":
            rec = method3(model, learned, y, solver_tol)
        else:
            if args.alpha is None:
                raise ValidationError("--alpha is required for --method map")
            rec = map_estimate(model, learned, y, args.alpha)
    else:
        if not (args.problem and args.training):
            raise ValidationError("oracle-dls needs --problem and --training")
        problem = SyntheticProblem.load(args.problem)
        ts = TrainingSet.load(args.training)
        rec = oracle_dls(problem.K, span_basis(ts.Y), y, solver_tol)
    if args.problem:
        x_true = SyntheticProblem.load(args.problem).x_dagger
        rec.diagnostics["err_x"] = float(
            np.linalg.norm(rec.x_hat - x_true) / np.linalg.norm(x_true)
        )
    rec.save(args.out)
    log.info("method %s: residual %.3e", rec.method, rec.residual_norm)
    return 0


def diagnose_report(ts, problem=None, rel_tol=1e-12, solver_tol=1e-10):
    """Collect all diagnostics for a training set as an ordered dict."""
    report = {"n": ts.n, "m": ts.m, "q": ts.q, "delta": ts.delta}
    bounds = rank_bounds_check(ts, rel_tol)
    report.update(p=bounds.p, p_prime=bounds.p_prime, rank_bounds_holds=bounds.holds)
    col = collinearity_report(ts, rel_tol)
    report.update(condition_number=col.condition_number,
                  smallest_sigma=col.smallest_sigma, amplification=col.amplification)
    if problem is not None:
        dev = hs_deviation_bound_check(ts, learn_uncentered(ts, rel_tol), problem.K)
        report.update(opnorm_lhs=dev.lhs, opnorm_rhs=dev.rhs, opnorm_holds=dev.holds,
                      sigmak_holds=dev.per_vector_holds,
                      full_deviation=dev.full_deviation)
    model = sample_stats(ts, rel_tol)
    if model.p_prime == 0:
        return report
    learned = learn_centered(model, ts)
    lemma = lemma_check(model, learned, solver_tol)
    report["injective"] = lemma.injective
    for name, (defect, passed) in lemma.identities.items():
        report[f"lemma_{name}_defect"] = float(defect)
        report[f"lemma_{name}_pass"] = "n/a" if passed is None else bool(passed)
    if problem is not None and lemma.injective:
        try:
            dec = proposition_check(problem, model, learned, rel_tol=solver_tol)
        except NotInjectiveError:
            return report
        report.update(mu_n=dec.mu_n, equality_defect=dec.equality_defect,
                      d_norm=dec.d_norm, bound_rhs=dec.bound_rhs,
                      bound_holds=dec.bound_holds)
    return report


def cmd_diagnose(args):
    if args.example:
        images = example_images(args.example)
        ts = assemble(images, images, 0.0)
    elif args.training:
        ts = TrainingSet.load(args.training)
    else:
        raise ValidationError("diagnose needs a training directory or --example")
    problem = SyntheticProblem.load(args.problem) if args.problem else None
    rel_tol = args.tol if args.tol is not None else 1e-12
    report = diagnose_report(ts, problem, rel_tol)
    text = "".join(f"{k}={io.format_value(v)}\n" for k, v in report.items())
    sys.stdout.write(text)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "report").write_text(text)
    return 0


def cmd_experiment(args):
    config = _config(args)
    out = Path(args.out or config.output_dir)
    rows = run_experiment(config)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(rows_to_csv(rows))
    (out / "config.ini").write_text(config.to_text())
    log.info("%d rows written to %s", len(rows), out / "results.csv")
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="suppress progress output")
    common.add_argument("--tol", type=float, help="relative singular-value cutoff")

    parser = argparse.ArgumentParser(
        prog="projreg", description="Data-driven regularization by projection."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="synthetic problem + training set")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--example", type=int, choices=(1, 2),
                   help="write one of the canned three-image sets instead")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("learn", parents=[common], help="learn K_n from a training set")
    p.add_argument("training")
    p.add_argument("--out", required=True)
    p.add_argument("--trunc", type=int)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("solve", parents=[common], help="reconstruct from an observation")
    p.add_argument("learned")
    p.add_argument("y")
    p.add_argument("--method", choices=("i", "iii", "map", "oracle-dls"), default="iii")
    p.add_argument("--alpha", type=float)
    p.add_argument("--problem", help="problem directory (truth, for oracle-dls and err_x)")
    p.add_argument("--training", help="training directory (for oracle-dls)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("diagnose", parents=[common], help="rank, bound and identity checks")
    p.add_argument("training", nargs="?")
    p.add_argument("--example", type=int, choices=(1, 2))
    p.add_argument("--problem")
    p.add_argument("--out")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("experiment", parents=[common], help="seeded sweep to CSV")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--trunc", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_experiment)
    return parser


def _fail(exc, code):
    record = {"error": type(exc).__name__, "exit_code": code, "message": str(exc)}
    sys.stderr.write(json.dumps(record) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(message)s", stream=sys.stderr, force=True,
    )
    try:
        return args.func(args)
    except (ValidationError, FileNotFoundError, KeyError) as exc:
        return _fail(exc, EXIT_VALIDATION)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        return _fail(exc, EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())
