"""Predict mode: fit on the training window, predict the rest one step ahead."""

import logging
from pathlib import Path

from ....core import storage
from ....core.errors import ValidationError
from ....core.posthoc import dahl_select
from ...shared.colors import Colors
from ...shared.constants import PREDICTIONS_FILE
from ...shared.outputs import forecast_window, load_inputs, print_written, write_metrics
from ..fit.fit import sample_and_select

logger = logging.getLogger(__name__)


def run_predict_command(args) -> int:
    if args.train_end is None:
        raise ValidationError("predict needs --train-end (or [split] train_end)")
    panel, adj = load_inputs(args)
    if not 2 <= args.train_end < panel.n_times:
        raise ValidationError(
            f"train_end must lie in 2..{panel.n_times - 1} to leave a test window"
        )

    if args.from_draws:
        fit = dahl_select(storage.read_draws(args.from_draws))
    else:
        fit, _ = sample_and_select(args)

    start = args.train_end
    logger.info(f"Predicting t={start + 1}..{panel.n_times} from K={fit.K_hat} groups at h={fit.h:g}")
    Y_hat, score = forecast_window(fit, panel, adj, start)
    print(
        f"{Colors.BOLD}ReMSPE{Colors.RESET} over t={start + 1}..{panel.n_times}: "
        f"{Colors.CYAN}{score:.6g}{Colors.RESET}"
    )

    out_dir = Path(args.output_dir)
    path = out_dir / PREDICTIONS_FILE
    storage.write_matrix_csv(path, Y_hat, header=[f"t{t + 1}" for t in range(start, panel.n_times)])
    print_written([path, write_metrics(out_dir, [("remspe", score)])])
    return 0
