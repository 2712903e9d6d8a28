"""Input loading and result files shared by the subcommands."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ...core.errors import DataIOError, ValidationError
from ...core.graph import AdjacencyMatrix, load_edge_list, row_normalized_adjacency
from ...core.model import GroupParams, PanelData, summarize_groups
from ...core.posthoc import FitResult, comembership, posterior_k_distribution, predict, remspe
from ...core.sampler import ChainDraws
from ...core import storage
from .colors import Colors
from .constants import COMEMBERSHIP_FILE, DRAWS_FILE, LABELS_FILE, METRICS_FILE, SUMMARY_FILE

logger = logging.getLogger(__name__)


def load_inputs(args) -> Tuple[PanelData, AdjacencyMatrix]:
    """Panel and graph named by --responses/--covariates/--edges."""
    if not args.responses:
        raise ValidationError("No responses file given (--responses or [data] responses)")
    if not args.edges:
        raise ValidationError("No edge list given (--edges or [data] edges)")
    panel = storage.load_panel(args.responses, args.covariates, header=bool(args.responses_header))
    adj = load_edge_list(args.edges, panel.n_nodes, one_based=bool(args.one_based))
    logger.info(
        f"Loaded N={panel.n_nodes} T={panel.n_times} p={panel.n_covariates} "
        f"with {adj.matrix.nnz} edges"
    )
    return panel, adj


def training_window(panel: PanelData, train_end: Optional[int]) -> PanelData:
    """Columns 0..train_end-1, or the whole panel."""
    if train_end is None:
        return panel
    if not 2 <= train_end <= panel.n_times:
        raise ValidationError(
            f"train_end must lie in 2..{panel.n_times}, got {train_end}"
        )
    return panel.window(0, train_end)


def forecast_window(
    fit: FitResult, panel: PanelData, adj: AdjacencyMatrix, train_end: int
) -> Tuple[np.ndarray, float]:
    """One-step-ahead predictions for columns train_end.. and their ReMSPE."""
    if not 2 <= train_end < panel.n_times:
        raise ValidationError(
            f"train_end must lie in 2..{panel.n_times - 1} to leave a test window"
        )
    Y_hat = predict(fit, panel, row_normalized_adjacency(adj), train_end)
    return Y_hat, remspe(panel.Y[:, train_end:], Y_hat, panel.Y[:, :train_end])


def write_metrics(out_dir: Path, metrics: List[Tuple[str, float]]) -> Path:
    """Print the metrics and write them to metrics.csv."""
    for name, value in metrics:
        print(f"  {name:<14} {Colors.CYAN}{value:.6g}{Colors.RESET}")
    path = out_dir / METRICS_FILE
    storage.write_table(path, ["metric", "value"], ((n, float(v)) for n, v in metrics))
    return path


def _rounded_group(row: Dict[str, Any]) -> Dict[str, Any]:
    rounded = dict(row)
    for key in ("beta0", "beta1", "beta2", "sigma2"):
        rounded[key] = storage.significant(row[key])
    rounded["gamma"] = [storage.significant(g) for g in row["gamma"]]
    return rounded


def fit_summary(fit: FitResult, draws: ChainDraws) -> Dict[str, Any]:
    """JSON-ready description of a Dahl estimate (labels 1-based, 6 significant digits)."""
    return {
        "h": storage.significant(fit.h),
        "seed": draws.seed,
        "n_draws": draws.n_draws,
        "K_hat": fit.K_hat,
        "m_b": fit.m_b,
        "iteration": fit.iteration,
        "lpml": storage.significant(fit.lpml),
        "group_sizes": fit.group_sizes.tolist(),
        "labels": (fit.z_hat + 1).tolist(),
        "groups": [_rounded_group(row) for row in summarize_groups(fit.params_hat)],
        "k_distribution": {
            str(k): storage.significant(v) for k, v in posterior_k_distribution(draws).items()
        },
    }


def estimate_from_summary(summary: Dict[str, Any]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(zero-based labels, theta, sigma2) stored in a summary file."""
    try:
        z = np.asarray(summary["labels"], dtype=np.int64) - 1
        groups = summary["groups"]
        theta = np.array(
            [[g["beta0"], g["beta1"], g["beta2"], *g["gamma"]] for g in groups],
            dtype=np.float64,
        )
        sigma2 = np.array([g["sigma2"] for g in groups], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataIOError(f"Summary file is missing estimate fields: {exc}") from exc
    return z, theta, sigma2


def fit_from_summary(summary: Dict[str, Any]) -> FitResult:
    """Point estimate stored in a summary file, ready for prediction."""
    z, theta, sigma2 = estimate_from_summary(summary)
    if z.size == 0 or z.min() < 0 or z.max() >= theta.shape[0]:
        raise DataIOError("Summary labels refer to groups missing from its parameter table")
    return FitResult(
        z_hat=z,
        K_hat=theta.shape[0],
        params_hat=[GroupParams(t, s) for t, s in zip(theta, sigma2)],
        m_b=int(summary.get("m_b", 0)),
        iteration=int(summary.get("iteration", 0)),
        lpml=float(summary.get("lpml", np.nan)),
        mean_comembership=comembership(z),
        h=float(summary.get("h", 0.0)),
    )


def write_fit_outputs(
    out_dir: Path, fit: FitResult, draws: ChainDraws, include_draws: bool = True
) -> List[Path]:
    """draws.jsonl, summary.json, labels.csv and comembership.csv."""
    paths = []
    if include_draws:
        paths.append(out_dir / DRAWS_FILE)
        storage.write_draws(paths[-1], draws)
    paths.append(out_dir / SUMMARY_FILE)
    storage.write_summary(paths[-1], fit_summary(fit, draws))
    paths.append(out_dir / LABELS_FILE)
    storage.write_labels(paths[-1], fit.z_hat)
    paths.append(out_dir / COMEMBERSHIP_FILE)
    storage.write_matrix_csv(paths[-1], fit.mean_comembership)
    return paths


def print_fit(fit: FitResult) -> None:
    print(
        f"{Colors.BOLD}Dahl estimate{Colors.RESET} at h={fit.h:g}: "
        f"K={Colors.CYAN}{fit.K_hat}{Colors.RESET}, draw {fit.m_b + 1} "
        f"(sweep {fit.iteration}), LPML={fit.lpml:.6g}"
    )
    header = f"  {'group':>5} {'size':>5} {'sigma2':>10} {'beta0':>10} {'beta1':>10} {'beta2':>10}  gamma"
    print(f"{Colors.DIM}{header}{Colors.RESET}")
    for row, size in zip(summarize_groups(fit.params_hat), fit.group_sizes):
        gamma = ", ".join(f"{g:.4g}" for g in row["gamma"])
        print(
            f"  {row['group']:>5} {size:>5} {row['sigma2']:>10.4g} {row['beta0']:>10.4g} "
            f"{row['beta1']:>10.4g} {row['beta2']:>10.4g}  [{gamma}]"
        )


def print_written(paths: List[Path]) -> None:
    for path in paths:
        print(f"{Colors.DIM}wrote {path}{Colors.RESET}")
