"""One-step-ahead prediction on a held-out window."""

from .predict import run_predict_command

__all__ = ["run_predict_command"]
