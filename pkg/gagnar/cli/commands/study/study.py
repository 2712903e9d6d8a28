"""Study mode: the full replicate study for one scenario."""

import logging
from dataclasses import replace
from pathlib import Path

from ....core.model import N_BASE_REGRESSORS
from ....core.study import run_study, write_study_report
from ...shared.colors import Colors
from ...shared.config import resolve_workers, sampler_from_args
from ...shared.outputs import print_written
from ...shared.progress import progress_bar
from ..simulate.simulate import load_scenario_from_args

logger = logging.getLogger(__name__)


def print_report(report) -> None:
    print(f"{Colors.BOLD}{report.scenario}{Colors.RESET}: {report.n_replicates} replicate(s)")
    print(f"  mean ARI          {report.mean_ari:.4f}")
    print(f"  share K = {report.k_true:<7} {report.share_k_correct:.2%}")
    for name, value in report.rmse.items():
        print(f"  RMSE {name:<12} {value:.4f}")
    counts = ", ".join(f"{h:g}: {n}" for h, n in report.h_counts().items())
    print(f"  {Colors.DIM}selected h -> {counts}{Colors.RESET}")


def run_study_command(args) -> int:
    spec = load_scenario_from_args(args)
    if args.seed is None:
        args.seed = spec.seed
    config = sampler_from_args(args, N_BASE_REGRESSORS + spec.n_covariates)
    spec = replace(spec, seed=config.rng_seed)

    with progress_bar(spec.replicates, "Replicates", enabled=not args.quiet) as bar:
        report = run_study(
            spec,
            h_grid=list(args.h_grid),
            config=config,
            workers=resolve_workers(args),
            on_replicate_done=lambda outcome: bar.update(),
        )

    print_report(report)
    print_written(write_study_report(report, Path(args.output_dir)))
    return 0
