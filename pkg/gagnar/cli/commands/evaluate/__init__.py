"""Compare an estimate with known truth."""

from .evaluate import run_evaluate_command

__all__ = ["run_evaluate_command"]
