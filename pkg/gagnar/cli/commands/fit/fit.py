"""Fit mode: one chain at a fixed h, Dahl estimate, LPML and HPD intervals."""

import logging
from pathlib import Path
from typing import Tuple

from ....core import storage
from ....core.posthoc import FitResult, dahl_select, node_parameter_hpd
from ....core.sampler import ChainDraws, run_chain
from ...shared.config import sampler_from_args
from ...shared.constants import HPD_FILE, HPD_MASS, PROGRESS_EVERY
from ...shared.outputs import (
    load_inputs,
    print_fit,
    print_written,
    training_window,
    write_fit_outputs,
)
from ...shared.progress import progress_bar

logger = logging.getLogger(__name__)


def sample_and_select(args, h=None) -> Tuple[FitResult, ChainDraws]:
    """Run a chain on the training window named by ``args``."""
    panel, adj = load_inputs(args)
    panel = training_window(panel, args.train_end)
    config = sampler_from_args(args, panel.n_regressors, h=h)

    with progress_bar(config.total_iters, f"Sampling h={config.h:g}", enabled=not args.quiet) as bar:

        def _tick(sweep, state):
            if sweep % PROGRESS_EVERY == 0 or sweep == config.total_iters:
                bar.update(current=sweep)

        draws = run_chain(config, panel, adj, on_iteration=_tick)
    return dahl_select(draws), draws


def write_hpd(path: Path, draws: ChainDraws, mass: float = HPD_MASS) -> None:
    n_params = draws.theta[0].shape[1] + 1
    names = ["beta0", "beta1", "beta2"] + [f"gamma{k + 1}" for k in range(n_params - 4)]
    names.append("sigma2")
    rows = []
    for node in range(draws.n_nodes):
        for name, (low, high) in zip(names, node_parameter_hpd(draws, node, mass)):
            rows.append((node + 1, name, low, high))
    storage.write_table(path, ["node", "parameter", "lower", "upper"], rows)


def run_fit_command(args) -> int:
    """Fit at ``args.h`` or reload ``args.from_draws``; writes results to the output dir."""
    out_dir = Path(args.output_dir)
    if args.from_draws:
        draws = storage.read_draws(args.from_draws)
        fit = dahl_select(draws)
    else:
        fit, draws = sample_and_select(args)

    print_fit(fit)
    paths = write_fit_outputs(out_dir, fit, draws, include_draws=not args.from_draws)
    paths.append(out_dir / HPD_FILE)
    write_hpd(paths[-1], draws)
    print_written(paths)
    return 0
