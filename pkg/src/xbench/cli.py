"""
xbench: command-line front end for the sampled ALS experiments.

Tensors are read and written as .dt files, fitted models as .npz archives
and experiment results as CSV reports.

Usage:
    xbench synth-cp --output cp10.dt
    xbench cp --input cp10.dt --rank 4 --method es --j1 1000 --j2 50 --init range
    xbench tr --input tr8.dt --ranks 3 --method sampled --j2 1000 --report tr.csv
    xbench compare-dist --input img.dt --kind tr --ranks 3 --j1 1000 10000 --report kl.csv
    xbench recovery --kind cp --seeds 10 --report recovery.csv
    xbench features --input coil.dt --labels labels.txt --kind cp --rank 10 --method es
    xbench project --model model.npz --input new.dt --output features.csv
    xbench tensorize --input cat.npy --order 6 --output cat.dt
    python -m src.xbench --help

Logging:
    Logs go to the console and to a rotating file (5MB max per file, 3 backups).

Environment Variables (Optional):
    SKETCHED_ALS_LOG_FILE: Log file path (default: xbench.log)
    SKETCHED_ALS_LOG_LEVEL: Log level (default: INFO)
    SKETCHED_ALS_MAX_DENSE_ENTRIES: Memory guard for dense materializations (default: 2**26)

Exit codes:
    0 success, 2 invalid configuration or input, 3 numerical degeneracy, 1 anything else
"""

import argparse
import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import ValidationError

from .. import settings
from ..errors import (
    ConfigError,
    DegenerateInputError,
    IndexRangeError,
    InvalidInputError,
    MemoryGuardError,
)
from ..schemas import SampledAlsConfig
from ..tensor import CpModel, load_model, read_dt, save_model, write_dt
from .experiments import (
    fit_decomposition,
    project_samples,
    recovery_summary,
    run_distribution_experiment,
    run_feature_extraction,
    run_recovery_experiment,
)
from .images import tensorize_image
from .report import ExperimentReport, write_reports
from .synth import synth_cp, synth_tr

logger = logging.getLogger(__name__)

CP_METHODS = {"exact": "exact", "es": "es", "arls-lev": "baseline"}
TR_METHODS = {"exact": "exact", "es": "es", "sampled": "baseline"}


def configure_logging() -> None:
    logging.basicConfig(
        level=settings.log_level(),
        format="%(asctime)s [%(levelname)s] %(message)s",
        handlers=[
            logging.StreamHandler(),
            RotatingFileHandler(settings.log_file(), maxBytes=5_000_000, backupCount=3),
        ],
    )


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.replace("x", ",").split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def _ranks(values: list[int] | None) -> int | list[int] | None:
    if values is None:
        return None
    return values[0] if len(values) == 1 else values


def _add_fit_options(parser: argparse.ArgumentParser, j1: int, j2: int) -> None:
    parser.add_argument("--j1", type=int, default=j1, help=f"sketch dimension (default: {j1})")
    parser.add_argument("--j2", type=int, default=j2, help=f"samples per solve (default: {j2})")
    parser.add_argument("--iters", type=int, default=20, help="maximum ALS sweeps (default: 20)")
    parser.add_argument("--tol", type=float, default=1e-6, help="stop tolerance on rel_error change")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--init", choices=["normal", "range"], default="normal")
    parser.add_argument("--regularization", type=float, default=0.0, help="Tikhonov constant")
    parser.add_argument("--exhaustive", action="store_true", help="use every row instead of sampling")


def _fit_config(args: argparse.Namespace) -> SampledAlsConfig:
    return SampledAlsConfig(
        j1=args.j1,
        j2=args.j2,
        max_iterations=args.iters,
        tolerance=args.tol,
        seed=args.seed,
        init=args.init,
        regularization=args.regularization,
        exhaustive=args.exhaustive,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xbench", description="Sampled ALS for CP and tensor-ring decompositions"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-cp", help="planted spike CP tensor")
    p.add_argument("--output", required=True, help="output .dt file")
    p.add_argument("--dims", type=_int_list, default=[6] * 10, help="e.g. 6,6,6 (default: 6 x 10)")
    p.add_argument("--rank", type=int, default=4)
    p.add_argument("--spike", type=float, default=4.0)
    p.add_argument("--noise-sd", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model-output", help="optional .npz for the ground-truth model")

    p = sub.add_parser("synth-tr", help="planted point-mass TR tensor")
    p.add_argument("--output", required=True, help="output .dt file")
    p.add_argument("--dims", type=_int_list, help="default: 6 x 8 (6 x 10 with --large)")
    p.add_argument("--ranks", type=_int_list, default=[3])
    p.add_argument("--spike", type=float, default=3.0)
    p.add_argument("--noise-sd", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--large", action="store_true", help="allow the 10-way instance (~484 MB)")
    p.add_argument("--model-output", help="optional .npz for the ground-truth model")

    p = sub.add_parser("cp", help="fit a CP decomposition")
    p.add_argument("--input", required=True, help="input .dt file")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--method", choices=list(CP_METHODS), default="es")
    _add_fit_options(p, j1=1000, j2=50)
    p.add_argument("--model-output", help="save the fitted model (.npz)")
    p.add_argument("--report", help="CSV report path")

    p = sub.add_parser("tr", help="fit a tensor-ring decomposition")
    p.add_argument("--input", required=True, help="input .dt file")
    p.add_argument("--ranks", type=_int_list, required=True, help="one rank or one per mode")
    p.add_argument("--method", choices=list(TR_METHODS), default="es")
    p.add_argument("--tt", action="store_true", help="force the closing rank to 1 (tensor train)")
    _add_fit_options(p, j1=10_000, j2=1000)
    p.add_argument("--model-output", help="save the fitted model (.npz)")
    p.add_argument("--report", help="CSV report path")

    p = sub.add_parser("compare-dist", help="KL of sampled vs exact leverage distributions")
    p.add_argument("--input", required=True, help="input .dt file")
    p.add_argument("--kind", choices=["cp", "tr"], required=True)
    p.add_argument("--rank", type=int, help="CP rank")
    p.add_argument("--ranks", type=_int_list, help="TR ranks")
    p.add_argument("--j1", type=int, nargs="+", default=[1000, 10_000], help="J1 grid")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--iters", type=int, default=10, help="exact ALS sweeps before freezing")
    p.add_argument("--mode", type=int, default=-1)
    p.add_argument("--tt", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="CSV report path")

    p = sub.add_parser("recovery", help="planted-model recovery: sketched vs product sampling")
    p.add_argument("--kind", choices=["cp", "tr"], required=True)
    p.add_argument("--seeds", type=int, default=10, help="number of seeds (0..seeds-1)")
    p.add_argument("--j1", type=int)
    p.add_argument("--j2", type=int)
    p.add_argument("--baseline-j2", type=int, help="samples for the baseline (default: --j2)")
    p.add_argument("--iters", type=int, default=20)
    p.add_argument("--dims", type=_int_list)
    p.add_argument("--rank", type=int)
    p.add_argument("--ranks", type=_int_list)
    p.add_argument("--noise-sd", type=float, default=0.01)
    p.add_argument("--init", choices=["normal", "range"], default="range")
    p.add_argument("--parallel", action="store_true", help="run both arms concurrently")
    p.add_argument("--large", action="store_true")
    p.add_argument("--report", help="CSV report path")

    p = sub.add_parser("features", help="1-NN classification on decomposition features")
    p.add_argument("--input", required=True, help="input .dt file")
    p.add_argument("--labels", required=True, help="one integer label per line")
    p.add_argument("--kind", choices=["cp", "tr"], required=True)
    p.add_argument("--rank", type=int)
    p.add_argument("--ranks", type=_int_list)
    p.add_argument("--method", choices=["exact", "es", "arls-lev", "sampled"], default="es")
    p.add_argument("--mode", type=int, default=-1, help="sample mode (default: last)")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--tt", action="store_true")
    _add_fit_options(p, j1=1000, j2=1000)
    p.add_argument("--report", help="CSV report path")

    p = sub.add_parser("project", help="features for new samples from a frozen model")
    p.add_argument("--model", required=True, help="fitted model (.npz)")
    p.add_argument("--input", required=True, help="new samples (.dt), stacked along --mode")
    p.add_argument("--output", required=True, help="features (.csv or .npy)")
    p.add_argument("--mode", type=int, default=-1)
    _add_fit_options(p, j1=1000, j2=1000)

    p = sub.add_parser("tensorize", help="reshape a square grayscale .npy image into a .dt tensor")
    p.add_argument("--input", required=True, help="2^a x 2^a image (.npy)")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--output", required=True, help="output .dt file")

    return parser


def _write(args: argparse.Namespace, reports: list[ExperimentReport]) -> None:
    if getattr(args, "report", None):
        write_reports(args.report, reports)


def _require_rank(args: argparse.Namespace, kind: str):
    rank = args.rank if kind == "cp" else _ranks(args.ranks)
    if rank is None:
        raise ConfigError(f"--{'rank' if kind == 'cp' else 'ranks'} is required for {kind}")
    return rank


def cmd_synth_cp(args: argparse.Namespace) -> None:
    X, truth = synth_cp(args.dims, args.rank, args.spike, args.noise_sd, args.seed)
    write_dt(args.output, X)
    if args.model_output:
        save_model(args.model_output, truth)
    logger.info("[OK] Saved %s -> %s", X, args.output)


def cmd_synth_tr(args: argparse.Namespace) -> None:
    X, truth = synth_tr(
        args.dims, _ranks(args.ranks), args.spike, args.noise_sd, args.seed, args.large
    )
    write_dt(args.output, X)
    if args.model_output:
        save_model(args.model_output, truth)
    logger.info("[OK] Saved %s -> %s", X, args.output)


def cmd_fit(args: argparse.Namespace) -> None:
    kind = args.command
    X = read_dt(args.input)
    if kind == "cp":
        rank, method, tt = args.rank, CP_METHODS[args.method], False
    else:
        rank, method, tt = _ranks(args.ranks), TR_METHODS[args.method], args.tt
    config = _fit_config(args)
    fit = fit_decomposition(X, kind, rank, method, config, tt)
    if args.model_output:
        save_model(args.model_output, fit.model)
        logger.info("[OK] Saved model -> %s", args.model_output)
    report = ExperimentReport.from_fit(
        "fit",
        fit.diagnostics,
        config.seed,
        j1=config.j1 if method == "es" else None,
        j2=config.j2 if method != "exact" else None,
        config={"kind": kind, "rank": rank, "input": args.input, "tt": tt},
    )
    _write(args, [report])


def cmd_compare_dist(args: argparse.Namespace) -> None:
    X = read_dt(args.input)
    reports = run_distribution_experiment(
        X,
        args.kind,
        _require_rank(args, args.kind),
        args.j1,
        seed=args.seed,
        repeats=args.repeats,
        als_iterations=args.iters,
        mode=args.mode,
        tt=args.tt,
    )
    for report in reports:
        logger.info("%-16s J1=%-6s KL=%.4e", report.method, report.j1, report.kl_divergence)
    _write(args, reports)


def cmd_recovery(args: argparse.Namespace) -> None:
    rank = args.rank if args.kind == "cp" else _ranks(args.ranks)
    reports = run_recovery_experiment(
        args.kind,
        seeds=range(args.seeds),
        j1=args.j1,
        j2=args.j2,
        baseline_j2=args.baseline_j2,
        iterations=args.iters,
        dims=args.dims,
        rank=rank,
        noise_sd=args.noise_sd,
        init=args.init,
        parallel=args.parallel,
        large=args.large,
    )
    for method, summary in recovery_summary(reports).items():
        logger.info(
            "[OK] %-16s success %.0f%%  failure %.0f%%",
            method,
            100 * summary["success_rate"],
            100 * summary["failure_rate"],
        )
    _write(args, reports)


def cmd_features(args: argparse.Namespace) -> None:
    X = read_dt(args.input)
    labels = np.loadtxt(args.labels, dtype=np.int64, ndmin=1)
    methods = CP_METHODS if args.kind == "cp" else TR_METHODS
    if args.method not in methods:
        raise ConfigError(f"method {args.method!r} is not available for {args.kind}")
    report = run_feature_extraction(
        X,
        labels,
        args.kind,
        _require_rank(args, args.kind),
        methods[args.method],
        _fit_config(args),
        mode=args.mode,
        folds=args.folds,
        tt=args.tt,
    )
    _write(args, [report])


def cmd_project(args: argparse.Namespace) -> None:
    model = load_model(args.model)
    X_new = read_dt(args.input)
    features = project_samples(model, X_new, args.mode, _fit_config(args))
    output = Path(args.output)
    if output.suffix == ".npy":
        np.save(output, features)
    else:
        prefix = "a" if isinstance(model, CpModel) else "g"
        columns = [f"{prefix}{k}" for k in range(features.shape[1])]
        pd.DataFrame(features, columns=columns).to_csv(output, index_label="sample")
    logger.info("[OK] %d feature rows -> %s", features.shape[0], output)


def cmd_tensorize(args: argparse.Namespace) -> None:
    image = np.load(args.input, allow_pickle=False)
    X = tensorize_image(image, args.order)
    write_dt(args.output, X)
    logger.info("[OK] Saved %s -> %s", X, args.output)


COMMANDS = {
    "synth-cp": cmd_synth_cp,
    "synth-tr": cmd_synth_tr,
    "cp": cmd_fit,
    "tr": cmd_fit,
    "compare-dist": cmd_compare_dist,
    "recovery": cmd_recovery,
    "features": cmd_features,
    "project": cmd_project,
    "tensorize": cmd_tensorize,
}


def run(argv: list[str] | None = None) -> int:
    """Parse, dispatch and map library errors to exit codes."""
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
        return 0
    except (ConfigError, InvalidInputError, IndexRangeError, MemoryGuardError) as e:
        logger.error("[ERROR] %s", e)
        for note in getattr(e, "__notes__", []):
            logger.error("  %s", note)
        return 2
    except ValidationError as e:
        logger.error("[ERROR] invalid configuration: %s", e)
        return 2
    except DegenerateInputError as e:
        logger.error("[ERROR] numerical degeneracy: %s", e)
        for note in getattr(e, "__notes__", []):
            logger.error("  %s", note)
        return 3
    except Exception as e:
        logger.error("[FATAL] %s failed: %s", args.command, str(e), exc_info=True)
        return 1


def main() -> None:
    configure_logging()
    sys.exit(run())


if __name__ == "__main__":
    main()
