"""Evaluate mode: ARI and parameter RMSE against the truth, ReMSPE on a test window."""

import logging
from pathlib import Path
from typing import List, Tuple

import numpy as np

from ....core import storage
from ....core.errors import ValidationError
from ....core.posthoc import adjusted_rand_index, node_parameters, rmse_params
from ...shared.outputs import (
    fit_from_summary,
    forecast_window,
    load_inputs,
    print_written,
    write_metrics,
)

logger = logging.getLogger(__name__)


def truth_metrics(
    z_hat: np.ndarray, theta_hat: np.ndarray, sigma2_hat: np.ndarray, args
) -> List[Tuple[str, float]]:
    z_true = storage.read_labels(args.truth_labels)
    if z_true.shape != z_hat.shape:
        raise ValidationError(
            f"Estimate has {z_hat.size} nodes but the truth has {z_true.size}"
        )
    metrics = [("ari", adjusted_rand_index(z_hat, z_true))]
    if args.truth_params:
        theta_true, sigma2_true = storage.read_group_params(args.truth_params)
        if z_true.max() >= theta_true.shape[0]:
            raise ValidationError("Truth labels refer to groups missing from the parameter file")
        rmse = rmse_params(
            [node_parameters(z_hat, theta_hat, sigma2_hat)],
            [node_parameters(z_true, theta_true, sigma2_true)],
        )
        metrics += [(f"rmse_{name}", value) for name, value in rmse.items()]
    return metrics


def run_evaluate_command(args) -> int:
    if not args.summary:
        raise ValidationError("evaluate needs --summary")
    has_truth = bool(args.truth_labels)
    has_window = args.train_end is not None
    if not has_truth and not has_window:
        raise ValidationError(
            "evaluate needs --truth-labels, a test window (--train-end with --responses and --edges), or both"
        )
    if args.truth_params and not has_truth:
        raise ValidationError("--truth-params needs --truth-labels")

    fit = fit_from_summary(storage.read_summary(args.summary))
    metrics = []
    if has_truth:
        metrics += truth_metrics(fit.z_hat, fit.theta_hat, fit.sigma2_hat, args)
    if has_window:
        panel, adj = load_inputs(args)
        if panel.n_nodes != fit.z_hat.size:
            raise ValidationError(
                f"Estimate has {fit.z_hat.size} nodes but the panel has {panel.n_nodes}"
            )
        logger.info(f"Scoring t={args.train_end + 1}..{panel.n_times} from K={fit.K_hat} groups")
        _, score = forecast_window(fit, panel, adj, args.train_end)
        metrics.append(("remspe", score))

    print_written([write_metrics(Path(args.output_dir), metrics)])
    return 0
