"""Subcommands of the gagnar command line."""

from .evaluate.evaluate import run_evaluate_command
from .fit.fit import run_fit_command
from .predict.predict import run_predict_command
from .select_h.select_h import run_select_h_command
from .simulate.simulate import run_simulate_command
from .study.study import run_study_command

__all__ = [
    "run_evaluate_command",
    "run_fit_command",
    "run_predict_command",
    "run_select_h_command",
    "run_simulate_command",
    "run_study_command",
]
