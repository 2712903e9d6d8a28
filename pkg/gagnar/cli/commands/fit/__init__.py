"""Fit one chain and report the Dahl estimate."""

from .fit import run_fit_command

__all__ = ["run_fit_command"]
