#!/usr/bin/env python3
"""gagnar command line: simulate, fit, select-h, predict, evaluate and study."""

import argparse
import logging
import sys
from typing import List, Optional

from .. import __version__
from ..core.errors import GagnarError
from .commands import (
    run_evaluate_command,
    run_fit_command,
    run_predict_command,
    run_select_h_command,
    run_simulate_command,
    run_study_command,
)
from .shared.colors import error_line
from .shared.config import RunConfig, effective_config, parse_floats
from .shared.constants import EXIT_INTERRUPTED, EXIT_OK
from .shared.logs import setup_logging

logger = logging.getLogger(__name__)


def _floats(text: str):
    try:
        return parse_floats(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from exc


def _flag(parser, *names, help):
    """Boolean switch that stays None when absent so config files can set it."""
    parser.add_argument(*names, action="store_const", const=True, default=None, help=help)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="INI file with run settings")
    common.add_argument(
        "--print-config", action="store_true", help="print the effective settings and exit"
    )
    common.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO")
    common.add_argument("--quiet", action="store_true", help="no progress bars, errors only")
    common.add_argument("--workers", type=int, metavar="N", help="worker threads (GAGNAR_WORKERS)")
    common.add_argument("-o", "--out", dest="output_dir", metavar="DIR", help="output directory")
    return common


def _data_options() -> argparse.ArgumentParser:
    data = argparse.ArgumentParser(add_help=False)
    group = data.add_argument_group("data")
    group.add_argument("--edges", metavar="CSV", help="edge list with src,dst columns")
    group.add_argument("--responses", metavar="CSV", help="N x T responses")
    group.add_argument("--covariates", metavar="CSV", help="N x p static covariates")
    _flag(group, "--one-based", help="node ids in the edge list start at 1")
    _flag(group, "--responses-header", help="responses file has a header row")
    group.add_argument("--train-end", type=int, metavar="T", help="fit on the first T columns")
    return data


def _model_options() -> argparse.ArgumentParser:
    model = argparse.ArgumentParser(add_help=False)
    prior = model.add_argument_group("prior")
    prior.add_argument("--tau0", type=_floats, metavar="X[,X...]", help="prior mean of theta")
    prior.add_argument("--sigma0-scale", type=float, metavar="S", help="Sigma0 = S * I")
    prior.add_argument("--a0", type=float, help="inverse-gamma shape")
    prior.add_argument("--b0", type=float, help="inverse-gamma scale")
    prior.add_argument("--alpha", type=float, help="concentration of the gaCRP")

    sampler = model.add_argument_group("sampler")
    sampler.add_argument("--iterations", type=int, metavar="N", help="total sweeps")
    sampler.add_argument("--burn-in", type=int, metavar="N", help="discarded sweeps")
    sampler.add_argument("--seed", type=int, help="random seed")
    _flag(sampler, "--shuffle-order", help="visit nodes in random order each sweep")
    sampler.add_argument("--dense-threshold", type=int, metavar="N", help="largest N with dense weights")
    return model


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gagnar",
        description="Grouped network autoregression with a graph-assisted CRP prior",
    )
    parser.add_argument("--version", action="version", version=f"gagnar {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    common = _common_options()
    data = _data_options()
    model = _model_options()

    simulate = sub.add_parser("simulate", parents=[common], help="simulate datasets from a scenario")
    simulate.add_argument("--scenario", required=True, help="scenario file or bundled name")
    simulate.add_argument("--seed", type=int, help="override the scenario seed")
    simulate.add_argument("--replicates", type=int, metavar="R", help="override replicate count")
    _flag(simulate, "--one-based", help="write 1-based node ids in edge lists")
    simulate.set_defaults(handler=run_simulate_command)

    fit = sub.add_parser("fit", parents=[common, data, model], help="run one chain and report the Dahl estimate")
    fit.add_argument("--h", type=float, help="smoothing scale")
    fit.add_argument("--from-draws", metavar="JSONL", help="reuse a saved draws file")
    fit.set_defaults(handler=run_fit_command)

    select = sub.add_parser("select-h", parents=[common, data, model], help="choose h by LPML")
    select.add_argument("--h-grid", type=_floats, metavar="LIST", help="e.g. 0,0.5,1 or 0:5:0.2")
    select.set_defaults(handler=run_select_h_command)

    predict = sub.add_parser("predict", parents=[common, data, model], help="one-step-ahead prediction and ReMSPE")
    predict.add_argument("--h", type=float, help="smoothing scale")
    predict.add_argument("--from-draws", metavar="JSONL", help="reuse a saved draws file")
    predict.set_defaults(handler=run_predict_command)

    evaluate = sub.add_parser(
        "evaluate", parents=[common, data], help="ARI and RMSE against known truth, ReMSPE on a test window"
    )
    evaluate.add_argument("--summary", metavar="JSON", help="summary.json of a fit")
    evaluate.add_argument("--truth-labels", metavar="CSV", help="labels.csv of the truth")
    evaluate.add_argument("--truth-params", metavar="CSV", help="truth_params.csv")
    evaluate.set_defaults(handler=run_evaluate_command)

    study = sub.add_parser("study", parents=[common, model], help="replicate simulation study")
    study.add_argument("--scenario", required=True, help="scenario file or bundled name")
    study.add_argument("--replicates", type=int, metavar="R", help="override replicate count")
    study.add_argument("--h-grid", type=_floats, metavar="LIST", help="e.g. 0,0.4,0.8")
    study.set_defaults(handler=run_study_command)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse, configure and dispatch; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(verbose=args.verbose, quiet=args.quiet)

    try:
        run_config = RunConfig(args.config)
        if run_config.has_config():
            logger.info(f"Loaded settings from {', '.join(run_config.loaded_files)}")
        run_config.apply_to_args(args)
        if args.print_config:
            sys.stdout.write(effective_config(args))
            return EXIT_OK
        return args.handler(args)
    except GagnarError as exc:
        print(error_line(str(exc)), file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:
        print("\nInterrupted", file=sys.stderr)
        return EXIT_INTERRUPTED


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
