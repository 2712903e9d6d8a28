"""Select-h mode: one chain per grid value, keep the largest LPML."""

import logging
from pathlib import Path

from ....core import storage
from ....core.posthoc import select_h
from ...shared.colors import Colors, best_marker
from ...shared.config import resolve_workers, sampler_from_args
from ...shared.constants import LPML_FILE
from ...shared.outputs import (
    load_inputs,
    print_fit,
    print_written,
    training_window,
    write_fit_outputs,
)
from ...shared.progress import progress_bar

logger = logging.getLogger(__name__)


def print_selection_table(selection) -> None:
    print(f"{Colors.BOLD}{'h':>8} {'LPML':>14} {'modal K':>8} {'Dahl K':>7}{Colors.RESET}")
    for row in selection.table:
        print(
            f"{best_marker(row.h == selection.h_best)}{row.h:>7g} {row.lpml:>14.6g} "
            f"{row.modal_k:>8} {row.k_hat:>7}"
        )


def run_select_h_command(args) -> int:
    panel, adj = load_inputs(args)
    panel = training_window(panel, args.train_end)
    config = sampler_from_args(args, panel.n_regressors)
    grid = list(args.h_grid)
    workers = resolve_workers(args)
    logger.info(f"Running {len(grid)} chains on {min(workers, len(grid))} worker(s)")

    with progress_bar(len(grid), "Chains", enabled=not args.quiet) as bar:
        selection = select_h(
            panel, adj, grid, config, workers=workers, on_chain_done=lambda h, fit: bar.update()
        )

    print_selection_table(selection)
    print_fit(selection.best_fit)

    out_dir = Path(args.output_dir)
    paths = [out_dir / LPML_FILE]
    storage.write_table(
        paths[0],
        ["h", "lpml", "modal_k", "k_hat"],
        ((float(r.h), float(r.lpml), r.modal_k, r.k_hat) for r in selection.table),
    )
    paths += write_fit_outputs(out_dir, selection.best_fit, selection.best_draws)
    print_written(paths)
    return 0
